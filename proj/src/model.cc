// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#include "sedfpd/model.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "sedfpd/error.h"
#include "sedfpd/labels.h"
#include "sedfpd/rng.h"

namespace sedfpd {

namespace {

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.9;

// Activations are (T * F) x C, column-major: each channel one contiguous
// column, row index t * F + f.
using Act = Eigen::MatrixXd;

void im2col(const Act& x, int frames, int bins, int k, Act& cols) {
  const int cin = static_cast<int>(x.cols());
  const int pad = k / 2;
  cols.setZero(static_cast<Eigen::Index>(frames) * bins, static_cast<Eigen::Index>(cin) * k * k);
  for (int ci = 0; ci < cin; ++ci)
    for (int dt = 0; dt < k; ++dt)
      for (int df = 0; df < k; ++df) {
        const Eigen::Index col = (static_cast<Eigen::Index>(ci) * k + dt) * k + df;
        double* dst = cols.col(col).data();
        const double* src = x.col(ci).data();
        const int f_lo = std::max(0, pad - df);
        const int f_hi = std::min(bins, bins + pad - df);
        for (int t = 0; t < frames; ++t) {
          const int ts = t + dt - pad;
          if (ts < 0 || ts >= frames) continue;
          const double* s = src + static_cast<std::size_t>(ts) * bins + (df - pad);
          double* d = dst + static_cast<std::size_t>(t) * bins;
          for (int f = f_lo; f < f_hi; ++f) d[f] = s[f];
        }
      }
}

void col2im(const Act& cols, int frames, int bins, int k, int cin, Act& x) {
  const int pad = k / 2;
  x.setZero(static_cast<Eigen::Index>(frames) * bins, cin);
  for (int ci = 0; ci < cin; ++ci)
    for (int dt = 0; dt < k; ++dt)
      for (int df = 0; df < k; ++df) {
        const Eigen::Index col = (static_cast<Eigen::Index>(ci) * k + dt) * k + df;
        const double* src = cols.col(col).data();
        double* dst = x.col(ci).data();
        const int f_lo = std::max(0, pad - df);
        const int f_hi = std::min(bins, bins + pad - df);
        for (int t = 0; t < frames; ++t) {
          const int ts = t + dt - pad;
          if (ts < 0 || ts >= frames) continue;
          double* d = dst + static_cast<std::size_t>(ts) * bins + (df - pad);
          const double* s = src + static_cast<std::size_t>(t) * bins;
          for (int f = f_lo; f < f_hi; ++f) d[f] += s[f];
        }
      }
}

int effective_pool(int pool, int bins) { return pool == 0 ? bins : pool; }

void fill_normal(Eigen::MatrixXd& m, Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
  m.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = stddev * rng.normal();
}

void check_finite_grid(const FeatureGrid& g) {
  if (!g.values.allFinite()) throw ValidationError("feature grid contains non-finite values");
}

}  // namespace

std::vector<int> ModelShape::bins_per_block() const {
  if (channels.empty() || channels.size() != freq_pool.size())
    throw ValidationError("model: channels and freq_pool must be nonempty and of equal length");
  if (kernel < 1 || kernel % 2 == 0) throw ValidationError("model: kernel must be odd and >= 1");
  if (in_bins <= 0) throw ValidationError("model: in_bins must be > 0");
  if (classes <= 0 || classes > kMaxClasses) throw ValidationError("model: classes must be in 1..64");
  if (proj_dim <= 0) throw ValidationError("model: proj_dim must be > 0");
  std::vector<int> out;
  int f = in_bins;
  for (std::size_t b = 0; b < channels.size(); ++b) {
    if (channels[b] <= 0) throw ValidationError("model: channel counts must be > 0");
    if (freq_pool[b] < 0) throw ValidationError("model: freq_pool must be >= 0");
    f = freq_pool[b] == 0 ? 1 : f / freq_pool[b];
    if (f == 0)
      throw ValidationError("model: frequency axis exhausted at block " + std::to_string(b));
    out.push_back(f);
  }
  if (out.back() != 1)
    throw ValidationError("model: last block must collapse the frequency axis to one bin");
  return out;
}

ModelParams ModelParams::init(const ModelShape& shape, std::uint64_t seed) {
  shape.bins_per_block();
  ModelParams p;
  p.shape = shape;
  Rng rng(derive_seed(seed, {0x494e4954ULL}));
  const int k = shape.kernel;
  int in_ch = 1;
  for (int out_ch : shape.channels) {
    ConvBlockParams blk;
    const int fan_in = in_ch * k * k;
    fill_normal(blk.weight, out_ch, fan_in, std::sqrt(2.0 / fan_in), rng);
    blk.bias = Eigen::VectorXd::Zero(out_ch);
    blk.gamma = Eigen::VectorXd::Ones(out_ch);
    blk.beta = Eigen::VectorXd::Zero(out_ch);
    blk.running_mean = Eigen::VectorXd::Zero(out_ch);
    blk.running_var = Eigen::VectorXd::Ones(out_ch);
    p.encoder.blocks.push_back(std::move(blk));
    in_ch = out_ch;
  }
  const int e = shape.embed_dim();
  const double s = 1.0 / std::sqrt(static_cast<double>(e));
  fill_normal(p.classifier.cls_w, e, shape.classes, s, rng);
  p.classifier.cls_b = Eigen::RowVectorXd::Zero(shape.classes);
  fill_normal(p.classifier.att_w, e, shape.classes, s, rng);
  p.classifier.att_b = Eigen::RowVectorXd::Zero(shape.classes);
  fill_normal(p.projection.w, e, shape.proj_dim, s, rng);
  p.projection.b = Eigen::RowVectorXd::Zero(shape.proj_dim);
  return p;
}

ModelParams ModelParams::zeros_like(const ModelParams& src) {
  ModelParams p = src;
  for (auto& t : p.tensors()) std::fill(t.data, t.data + t.size, 0.0);
  return p;
}

std::vector<TensorView> ModelParams::tensors() {
  std::vector<TensorView> out;
  auto add_m = [&](std::string name, Eigen::MatrixXd& m, bool trainable = true) {
    out.push_back({std::move(name), m.data(), static_cast<std::size_t>(m.size()),
                   {m.rows(), m.cols()}, trainable});
  };
  auto add_v = [&](std::string name, Eigen::VectorXd& v, bool trainable = true) {
    out.push_back({std::move(name), v.data(), static_cast<std::size_t>(v.size()), {v.size()},
                   trainable});
  };
  auto add_r = [&](std::string name, Eigen::RowVectorXd& v) {
    out.push_back({std::move(name), v.data(), static_cast<std::size_t>(v.size()), {v.size()}, true});
  };
  for (std::size_t b = 0; b < encoder.blocks.size(); ++b) {
    auto& blk = encoder.blocks[b];
    const std::string pre = "encoder.block" + std::to_string(b) + ".";
    add_m(pre + "weight", blk.weight);
    add_v(pre + "bias", blk.bias);
    add_v(pre + "gamma", blk.gamma);
    add_v(pre + "beta", blk.beta);
    add_v(pre + "running_mean", blk.running_mean, false);
    add_v(pre + "running_var", blk.running_var, false);
  }
  add_m("classifier.cls_w", classifier.cls_w);
  add_r("classifier.cls_b", classifier.cls_b);
  add_m("classifier.att_w", classifier.att_w);
  add_r("classifier.att_b", classifier.att_b);
  add_m("projection.w", projection.w);
  add_r("projection.b", projection.b);
  return out;
}

std::vector<FrameEmbeddings> encoder_forward(std::span<const FeatureGrid> grids, const ModelShape& shape,
                                             EncoderParams& params, Mode mode, EncoderTape* tape) {
  const std::vector<int> bins = shape.bins_per_block();
  if (params.blocks.size() != shape.channels.size())
    throw ValidationError("encoder: parameter block count does not match shape");
  const std::size_t n = grids.size();
  const int k = shape.kernel;
  std::vector<int> frames(n);
  std::vector<Act> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& g = grids[i];
    if (g.frames() == 0) throw ValidationError("encoder: empty feature grid");
    if (g.bins() != shape.in_bins)
      throw ValidationError("encoder: grid has " + std::to_string(g.bins()) + " bins, model expects " +
                            std::to_string(shape.in_bins));
    check_finite_grid(g);
    frames[i] = g.frames();
    x[i] = Eigen::Map<const Eigen::VectorXd>(g.values.data(), g.values.size());
  }
  if (tape) {
    tape->mode = mode;
    tape->frames = frames;
    tape->blocks.assign(params.blocks.size(), {});
  }

  int in_bins = shape.in_bins;
  int in_ch = 1;
  for (std::size_t b = 0; b < params.blocks.size(); ++b) {
    auto& blk = params.blocks[b];
    const int out_ch = shape.channels[b];
    if (blk.weight.rows() != out_ch || blk.weight.cols() != in_ch * k * k)
      throw ValidationError("encoder: block " + std::to_string(b) + " weight shape mismatch");
    const int pool = effective_pool(shape.freq_pool[b], in_bins);
    const int out_bins = bins[b];

    std::vector<Act> cols(n), y(n);
    double count = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      im2col(x[i], frames[i], in_bins, k, cols[i]);
      y[i].noalias() = cols[i] * blk.weight.transpose();
      y[i].rowwise() += blk.bias.transpose();
      count += static_cast<double>(y[i].rows());
    }

    Eigen::VectorXd mean(out_ch), var(out_ch);
    if (mode == Mode::Train) {
      mean.setZero();
      for (std::size_t i = 0; i < n; ++i) mean += y[i].colwise().sum().transpose();
      mean /= count;
      var.setZero();
      for (std::size_t i = 0; i < n; ++i)
        var += (y[i].rowwise() - mean.transpose()).array().square().matrix().colwise().sum().transpose();
      var /= count;
      const double unbias = count > 1.0 ? count / (count - 1.0) : 1.0;
      blk.running_mean = kBnMomentum * blk.running_mean + (1.0 - kBnMomentum) * mean;
      blk.running_var = kBnMomentum * blk.running_var + (1.0 - kBnMomentum) * unbias * var;
    } else {
      mean = blk.running_mean;
      var = blk.running_var;
    }
    const Eigen::VectorXd inv_std = (var.array() + kBnEps).rsqrt().matrix();

    std::vector<Act> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      Act xhat = (y[i].rowwise() - mean.transpose()) * inv_std.asDiagonal();
      Act act = ((xhat * blk.gamma.asDiagonal()).rowwise() + blk.beta.transpose()).cwiseMax(0.0);
      Act& pooled = next[i];
      pooled.setZero(static_cast<Eigen::Index>(frames[i]) * out_bins, out_ch);
      const double scale = 1.0 / pool;
      for (int c = 0; c < out_ch; ++c) {
        const double* a = act.col(c).data();
        double* o = pooled.col(c).data();
        for (int t = 0; t < frames[i]; ++t)
          for (int g = 0; g < out_bins; ++g) {
            double s = 0.0;
            const double* src = a + static_cast<std::size_t>(t) * in_bins + g * pool;
            for (int j = 0; j < pool; ++j) s += src[j];
            o[static_cast<std::size_t>(t) * out_bins + g] = s * scale;
          }
      }
      if (tape) tape->blocks[b].xhat.push_back(std::move(xhat));
    }
    if (tape) {
      auto& tb = tape->blocks[b];
      tb.cols = std::move(cols);
      tb.inv_std = inv_std;
      tb.in_bins = in_bins;
      tb.out_bins = out_bins;
      tb.pool = pool;
      tb.count = count;
    }
    x = std::move(next);
    in_bins = out_bins;
    in_ch = out_ch;
  }

  std::vector<FrameEmbeddings> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i];  // (T * 1) x E
  return out;
}

FrameEmbeddings encoder_forward(const FeatureGrid& grid, const ModelShape& shape,
                                EncoderParams& params, Mode mode) {
  return encoder_forward(std::span<const FeatureGrid>(&grid, 1), shape, params, mode).front();
}

void encoder_backward(const EncoderTape& tape, const ModelShape& shape, const EncoderParams& params,
                      std::span<const FrameEmbeddings> d_emb, EncoderParams& grads,
                      std::vector<RowMatrix>* d_input) {
  if (tape.empty()) throw UsageError("encoder_backward called without a retained forward pass");
  const std::size_t n = tape.frames.size();
  if (d_emb.size() != n) throw ValidationError("encoder_backward: gradient count does not match batch");
  const int k = shape.kernel;

  std::vector<Act> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (d_emb[i].rows() != tape.frames[i] || d_emb[i].cols() != shape.embed_dim())
      throw ValidationError("encoder_backward: embedding gradient shape mismatch");
    d[i] = d_emb[i];
  }

  for (std::size_t b = params.blocks.size(); b-- > 0;) {
    const auto& blk = params.blocks[b];
    const auto& tb = tape.blocks[b];
    auto& gb = grads.blocks[b];
    const int out_ch = static_cast<int>(blk.weight.rows());
    const int in_ch = b == 0 ? 1 : shape.channels[b - 1];
    const double scale = 1.0 / tb.pool;

    std::vector<Act> d_bn(n);
    for (std::size_t i = 0; i < n; ++i) {
      const int frames = tape.frames[i];
      const Act& xhat = tb.xhat[i];
      Act& g = d_bn[i];
      g.setZero(xhat.rows(), out_ch);
      for (int c = 0; c < out_ch; ++c) {
        const double* up = d[i].col(c).data();
        const double* xh = xhat.col(c).data();
        double* dst = g.col(c).data();
        const double gam = blk.gamma(c), bet = blk.beta(c);
        for (int t = 0; t < frames; ++t)
          for (int q = 0; q < tb.out_bins; ++q) {
            const double v = up[static_cast<std::size_t>(t) * tb.out_bins + q] * scale;
            const std::size_t base = static_cast<std::size_t>(t) * tb.in_bins + q * tb.pool;
            for (int j = 0; j < tb.pool; ++j)
              if (gam * xh[base + j] + bet > 0.0) dst[base + j] = v;
          }
      }
    }

    Eigen::VectorXd sum_g = Eigen::VectorXd::Zero(out_ch);
    Eigen::VectorXd sum_gx = Eigen::VectorXd::Zero(out_ch);
    for (std::size_t i = 0; i < n; ++i) {
      sum_g += d_bn[i].colwise().sum().transpose();
      sum_gx += d_bn[i].cwiseProduct(tb.xhat[i]).colwise().sum().transpose();
    }
    gb.gamma += sum_gx;
    gb.beta += sum_g;

    std::vector<Act> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      Act dy;
      if (tape.mode == Mode::Train) {
        // dY = inv_std * gamma * (g - mean(g) - xhat * mean(g * xhat))
        const Eigen::RowVectorXd mg = (sum_g / tb.count).transpose();
        const Eigen::RowVectorXd mgx = (sum_gx / tb.count).transpose();
        dy = (d_bn[i].rowwise() - mg) - tb.xhat[i] * mgx.asDiagonal();
        dy = dy * (tb.inv_std.cwiseProduct(blk.gamma)).asDiagonal();
      } else {
        dy = d_bn[i] * (tb.inv_std.cwiseProduct(blk.gamma)).asDiagonal();
      }
      gb.weight.noalias() += dy.transpose() * tb.cols[i];
      gb.bias += dy.colwise().sum().transpose();
      if (b > 0 || d_input) {
        const Act dcols = dy * blk.weight;
        col2im(dcols, tape.frames[i], tb.in_bins, k, in_ch, next[i]);
      }
    }
    d = std::move(next);
  }

  if (d_input) {
    d_input->resize(n);
    for (std::size_t i = 0; i < n; ++i)
      (*d_input)[i] = Eigen::Map<const RowMatrix>(d[i].data(), tape.frames[i], shape.in_bins);
  }
}

ClassifierOutput classify_frames(const FrameEmbeddings& emb, const ClassifierParams& params) {
  if (emb.cols() != params.cls_w.rows())
    throw ValidationError("classify_frames: embedding width does not match parameters");
  ClassifierOutput out;
  RowMatrix z = emb * params.cls_w;
  z.rowwise() += params.cls_b;
  out.frame_probs = (1.0 / (1.0 + (-z.array()).exp())).matrix();
  RowMatrix a = emb * params.att_w;
  a.rowwise() += params.att_b;
  const Eigen::RowVectorXd mx = a.colwise().maxCoeff();
  a = (a.rowwise() - mx).array().exp().matrix();
  const Eigen::RowVectorXd denom = a.colwise().sum();
  out.attention = a * denom.cwiseInverse().asDiagonal();
  out.clip_probs = out.attention.cwiseProduct(out.frame_probs).colwise().sum();
  return out;
}

void classify_backward(const FrameEmbeddings& emb, const ClassifierParams& params,
                       const ClassifierOutput& out, const Eigen::RowVectorXd& d_clip_probs,
                       const RowMatrix* d_frame_probs, ClassifierParams& grads, RowMatrix& d_emb) {
  const auto& p = out.frame_probs;
  const auto& att = out.attention;
  RowMatrix dp = att * d_clip_probs.asDiagonal();
  if (d_frame_probs) dp += *d_frame_probs;
  const RowMatrix d_att = p * d_clip_probs.asDiagonal();
  const Eigen::RowVectorXd inner = att.cwiseProduct(d_att).colwise().sum();
  const RowMatrix da = att.cwiseProduct(d_att.rowwise() - inner);
  const RowMatrix dz = dp.cwiseProduct(p).cwiseProduct((1.0 - p.array()).matrix());
  grads.cls_w.noalias() += emb.transpose() * dz;
  grads.cls_b += dz.colwise().sum();
  grads.att_w.noalias() += emb.transpose() * da;
  grads.att_b += da.colwise().sum();
  d_emb.noalias() += dz * params.cls_w.transpose();
  d_emb.noalias() += da * params.att_w.transpose();
}

RowMatrix project_frames(const FrameEmbeddings& emb, const ProjectionParams& params) {
  if (emb.cols() != params.w.rows())
    throw ValidationError("project_frames: embedding width does not match parameters");
  RowMatrix q = emb * params.w;
  q.rowwise() += params.b;
  return q;
}

void project_backward(const FrameEmbeddings& emb, const ProjectionParams& params,
                      const RowMatrix& d_out, ProjectionParams& grads, RowMatrix& d_emb) {
  if (d_out.rows() != emb.rows() || d_out.cols() != params.w.cols())
    throw ValidationError("project_backward: gradient shape mismatch");
  grads.w.noalias() += emb.transpose() * d_out;
  grads.b += d_out.colwise().sum();
  d_emb.noalias() += d_out * params.w.transpose();
}

const BatchOutputs& SedNet::forward(std::span<const FeatureGrid> grids, Mode mode) {
  out_.embeddings = encoder_forward(grids, params_.shape, params_.encoder, mode, &tape_);
  out_.classifier.clear();
  out_.projections.clear();
  for (const auto& e : out_.embeddings) {
    out_.classifier.push_back(classify_frames(e, params_.classifier));
    out_.projections.push_back(project_frames(e, params_.projection));
  }
  has_forward_ = true;
  return out_;
}

ModelParams SedNet::backward(const OutputGrads& grads, std::vector<RowMatrix>* d_inputs) const {
  if (!has_forward_) throw UsageError("SedNet::backward called before forward");
  const std::size_t n = out_.embeddings.size();
  auto check = [n](std::size_t sz, const char* what) {
    if (sz != 0 && sz != n)
      throw ValidationError(std::string("SedNet::backward: ") + what + " count does not match batch");
  };
  check(grads.d_clip_probs.size(), "clip-probability gradient");
  check(grads.d_frame_probs.size(), "frame-probability gradient");
  check(grads.d_projections.size(), "projection gradient");

  ModelParams g = ModelParams::zeros_like(params_);
  std::vector<FrameEmbeddings> d_emb(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& emb = out_.embeddings[i];
    d_emb[i] = RowMatrix::Zero(emb.rows(), emb.cols());
    if (!grads.d_clip_probs.empty() || !grads.d_frame_probs.empty()) {
      const Eigen::RowVectorXd dc = grads.d_clip_probs.empty()
                                        ? Eigen::RowVectorXd::Zero(params_.shape.classes)
                                        : grads.d_clip_probs[i];
      const RowMatrix* df = grads.d_frame_probs.empty() ? nullptr : &grads.d_frame_probs[i];
      classify_backward(emb, params_.classifier, out_.classifier[i], dc, df, g.classifier, d_emb[i]);
    }
    if (!grads.d_projections.empty())
      project_backward(emb, params_.projection, grads.d_projections[i], g.projection, d_emb[i]);
  }
  encoder_backward(tape_, params_.shape, params_.encoder, d_emb, g.encoder, d_inputs);
  return g;
}

namespace {

constexpr char kMagic[8] = {'S', 'E', 'D', 'F', 'P', 'D', 'C', 'K'};
constexpr std::uint32_t kCheckpointVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint IO assumes a little-endian host");

template <typename T>
void put(std::string& s, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  s.append(buf, sizeof(T));
}

class Reader {
 public:
  Reader(std::string bytes, std::string path) : bytes_(std::move(bytes)), path_(std::move(path)) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void copy(double* dst, std::size_t count) {
    need(count * sizeof(double));
    std::memcpy(dst, bytes_.data() + pos_, count * sizeof(double));
    pos_ += count * sizeof(double);
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw ValidationError(path_ + ": truncated checkpoint");
  }
  std::string bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params) {
  std::string out(kMagic, sizeof kMagic);
  const auto views = params.tensors();
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(views.size()));
  for (const auto& v : views) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(v.name.size()));
    out += v.name;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(v.dims.size()));
    for (auto d : v.dims) put<std::int64_t>(out, d);
    out.append(reinterpret_cast<const char*>(v.data), v.size * sizeof(double));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed: " + path);
}

void load_checkpoint(const std::string& path, ModelParams& params) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint: " + path);
  Reader r(std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>()), path);
  if (r.str(sizeof kMagic) != std::string(kMagic, sizeof kMagic))
    throw ValidationError(path + ": not a checkpoint file");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw ValidationError(path + ": unsupported checkpoint version " + std::to_string(version));
  auto views = params.tensors();
  const auto count = r.get<std::uint32_t>();
  if (count != views.size())
    throw ValidationError(path + ": checkpoint has " + std::to_string(count) + " tensors, model has " +
                          std::to_string(views.size()));
  for (auto& v : views) {
    const std::string name = r.str(r.get<std::uint32_t>());
    if (name != v.name) throw ValidationError(path + ": expected tensor '" + v.name + "', found '" + name + "'");
    const auto ndim = r.get<std::uint32_t>();
    std::vector<std::int64_t> dims(ndim);
    for (auto& d : dims) d = r.get<std::int64_t>();
    if (dims != v.dims) throw ValidationError(path + ": shape mismatch for tensor '" + name + "'");
    r.copy(v.data, v.size);
  }
  if (!r.done()) throw ValidationError(path + ": trailing bytes after last tensor");
}

}  // namespace sedfpd
