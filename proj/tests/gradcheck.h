// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#ifndef SEDFPD_TESTS_GRADCHECK_H_
#define SEDFPD_TESTS_GRADCHECK_H_

// Finite-difference checks of the network's backward passes, shared by the
// model unit tests and the acceptance runner. Each check returns the worst
// normwise relative error over the tensors it probes.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "sedfpd/fpdloss.h"
#include "sedfpd/model.h"
#include "sedfpd/train.h"
#include "test_util.h"

namespace sedfpd::testing {

// Normwise relative error ||a - n|| / max(||a|| + ||n||, floor). The floor
// is 1e5 times the central-difference roundoff estimate eps (1 + |L|) / h per
// entry, so a gradient that is identically zero (a bias in front of
// train-mode batch norm, say) is not scored on rounding noise alone.
struct GradReport {
  double error = 0.0;
  std::string worst;
  double loss = 0.0;
  double step = 1e-6;

  void add(const std::string& name, const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric) {
    const double noise = std::numeric_limits<double>::epsilon() * (1.0 + std::abs(loss)) / step *
                         std::sqrt(static_cast<double>(analytic.size()));
    const double denom = std::max({analytic.norm() + numeric.norm(), 1e-6, 1e5 * noise});
    const double e = (analytic - numeric).norm() / denom;
    if (e >= error) error = e, worst = name;
  }
};

inline Eigen::VectorXd flat(const double* p, std::size_t n) {
  return Eigen::Map<const Eigen::VectorXd>(p, static_cast<Eigen::Index>(n));
}

// Central differences of f over every entry of [data, data + n).
inline Eigen::VectorXd numeric_grad(double* data, std::size_t n, double step,
                                    const std::function<double()>& f) {
  Eigen::VectorXd g(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double orig = data[i];
    data[i] = orig + step;
    const double lp = f();
    data[i] = orig - step;
    const double lm = f();
    data[i] = orig;
    g(static_cast<Eigen::Index>(i)) = (lp - lm) / (2.0 * step);
  }
  return g;
}

inline double inner(const RowMatrix& a, const RowMatrix& b) { return a.cwiseProduct(b).sum(); }

inline RowMatrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  RowMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

// Small random geometry whose last block collapses the frequency axis.
inline ModelShape random_shape(Rng& rng) {
  ModelShape s;
  const int blocks = static_cast<int>(rng.uniform_int(1, 3));
  s.in_bins = static_cast<int>(rng.uniform_int(3, 10));
  s.channels.clear();
  s.freq_pool.clear();
  int bins = s.in_bins;
  for (int b = 0; b < blocks; ++b) {
    s.channels.push_back(static_cast<int>(rng.uniform_int(1, 4)));
    const bool last = b + 1 == blocks;
    const int pool = last ? 0 : (bins >= 4 ? 2 : 1);
    s.freq_pool.push_back(pool);
    if (!last) bins /= pool;
  }
  s.kernel = rng.uniform() < 0.7 ? 3 : 1;
  s.classes = static_cast<int>(rng.uniform_int(1, 4));
  s.proj_dim = static_cast<int>(rng.uniform_int(2, 5));
  return s;
}

// Initial weights with every buffer perturbed away from its neutral value.
inline ModelParams random_params(const ModelShape& shape, Rng& rng) {
  ModelParams p = ModelParams::init(shape, rng.uniform_int(0, 1L << 40));
  for (auto& blk : p.encoder.blocks) {
    for (Eigen::Index i = 0; i < blk.gamma.size(); ++i) {
      blk.bias(i) = 0.1 * rng.normal();
      blk.gamma(i) = rng.uniform(0.5, 1.5);
      blk.beta(i) = 0.3 * rng.normal();
      blk.running_mean(i) = 0.2 * rng.normal();
      blk.running_var(i) = rng.uniform(0.5, 2.0);
    }
  }
  for (Eigen::Index i = 0; i < p.classifier.cls_b.size(); ++i) {
    p.classifier.cls_b(i) = 0.2 * rng.normal();
    p.classifier.att_b(i) = 0.2 * rng.normal();
  }
  for (Eigen::Index i = 0; i < p.projection.b.size(); ++i) p.projection.b(i) = 0.2 * rng.normal();
  return p;
}

inline std::vector<FeatureGrid> random_batch_grids(Rng& rng, int clips, int bins, int min_t, int max_t) {
  std::vector<FeatureGrid> g;
  for (int i = 0; i < clips; ++i)
    g.push_back(random_grid(rng, static_cast<int>(rng.uniform_int(min_t, max_t)), bins));
  return g;
}

/// Encoder in train or eval mode against the scalar sum_i <R_i, emb_i>,
/// over every trainable encoder tensor and the input grids.
inline GradReport encoder_grad_check(std::uint64_t seed, double step, Mode mode = Mode::Train) {
  Rng rng(seed);
  const ModelShape shape = random_shape(rng);
  ModelParams params = random_params(shape, rng);
  std::vector<FeatureGrid> grids = random_batch_grids(rng, static_cast<int>(rng.uniform_int(1, 3)),
                                                      shape.in_bins, 1, 7);
  std::vector<RowMatrix> r;
  for (const auto& g : grids) r.push_back(random_matrix(rng, g.frames(), shape.embed_dim()));

  auto scalar = [&] {
    EncoderParams enc = params.encoder;
    const auto emb = encoder_forward(grids, shape, enc, mode);
    double s = 0.0;
    for (std::size_t i = 0; i < emb.size(); ++i) s += inner(emb[i], r[i]);
    return s;
  };

  EncoderParams enc = params.encoder;
  EncoderTape tape;
  encoder_forward(grids, shape, enc, mode, &tape);
  ModelParams grads = ModelParams::zeros_like(params);
  std::vector<RowMatrix> d_in;
  encoder_backward(tape, shape, params.encoder, r, grads.encoder, &d_in);

  GradReport rep{0.0, "", scalar(), step};
  auto views = params.tensors();
  auto gviews = grads.tensors();
  for (std::size_t k = 0; k < views.size(); ++k) {
    if (!views[k].trainable || views[k].name.rfind("encoder.", 0) != 0) continue;
    rep.add(views[k].name, flat(gviews[k].data, gviews[k].size),
            numeric_grad(views[k].data, views[k].size, step, scalar));
  }
  for (std::size_t i = 0; i < grids.size(); ++i)
    rep.add("input" + std::to_string(i), flat(d_in[i].data(), d_in[i].size()),
            numeric_grad(grids[i].values.data(), grids[i].values.size(), step, scalar));
  return rep;
}

/// Attention-pooling head against <Rc, clip_probs> + <Rf, frame_probs>.
inline GradReport classifier_grad_check(std::uint64_t seed, double step) {
  Rng rng(seed);
  const ModelShape shape = random_shape(rng);
  ModelParams params = random_params(shape, rng);
  RowMatrix emb = random_matrix(rng, rng.uniform_int(1, 8), shape.embed_dim());
  const RowMatrix rc = random_matrix(rng, 1, shape.classes);
  const RowMatrix rf = random_matrix(rng, emb.rows(), shape.classes);
  const Eigen::RowVectorXd dc = rc.row(0);
  auto scalar = [&] {
    const auto out = classify_frames(emb, params.classifier);
    return out.clip_probs.dot(dc) + inner(out.frame_probs, rf);
  };
  const auto out = classify_frames(emb, params.classifier);
  ModelParams grads = ModelParams::zeros_like(params);
  RowMatrix d_emb = RowMatrix::Zero(emb.rows(), emb.cols());
  classify_backward(emb, params.classifier, out, dc, &rf, grads.classifier, d_emb);

  GradReport rep{0.0, "", scalar(), step};
  auto& c = params.classifier;
  auto& g = grads.classifier;
  rep.add("cls_w", flat(g.cls_w.data(), g.cls_w.size()), numeric_grad(c.cls_w.data(), c.cls_w.size(), step, scalar));
  rep.add("cls_b", flat(g.cls_b.data(), g.cls_b.size()), numeric_grad(c.cls_b.data(), c.cls_b.size(), step, scalar));
  rep.add("att_w", flat(g.att_w.data(), g.att_w.size()), numeric_grad(c.att_w.data(), c.att_w.size(), step, scalar));
  rep.add("att_b", flat(g.att_b.data(), g.att_b.size()), numeric_grad(c.att_b.data(), c.att_b.size(), step, scalar));
  rep.add("emb", flat(d_emb.data(), d_emb.size()), numeric_grad(emb.data(), emb.size(), step, scalar));
  return rep;
}

/// Projection head against <R, projections>.
inline GradReport projection_grad_check(std::uint64_t seed, double step) {
  Rng rng(seed);
  const ModelShape shape = random_shape(rng);
  ModelParams params = random_params(shape, rng);
  RowMatrix emb = random_matrix(rng, rng.uniform_int(1, 8), shape.embed_dim());
  const RowMatrix r = random_matrix(rng, emb.rows(), shape.proj_dim);
  auto scalar = [&] { return inner(project_frames(emb, params.projection), r); };
  ModelParams grads = ModelParams::zeros_like(params);
  RowMatrix d_emb = RowMatrix::Zero(emb.rows(), emb.cols());
  project_backward(emb, params.projection, r, grads.projection, d_emb);

  GradReport rep{0.0, "", scalar(), step};
  auto& p = params.projection;
  auto& g = grads.projection;
  rep.add("w", flat(g.w.data(), g.w.size()), numeric_grad(p.w.data(), p.w.size(), step, scalar));
  rep.add("b", flat(g.b.data(), g.b.size()), numeric_grad(p.b.data(), p.b.size(), step, scalar));
  rep.add("emb", flat(d_emb.data(), d_emb.size()), numeric_grad(emb.data(), emb.size(), step, scalar));
  return rep;
}

/// Weak BCE against finite differences in the clip probabilities.
inline GradReport bce_grad_check(std::uint64_t seed, double step) {
  Rng rng(seed);
  const int classes = static_cast<int>(rng.uniform_int(1, 8));
  Eigen::RowVectorXd p(classes);
  WeakLabelRecord weak{"x", {}};
  for (int c = 0; c < classes; ++c) {
    p(c) = rng.uniform(0.02, 0.98);
    if (rng.uniform() < 0.5) weak.classes.insert(c);
  }
  const auto res = bce_weak_loss(p, weak);
  GradReport rep{0.0, "", res.loss, step};
  rep.add("clip_probs", res.grad.transpose(),
          numeric_grad(p.data(), p.size(), step, [&] { return bce_weak_loss(p, weak).loss; }));
  return rep;
}

/// Whole network on a two-clip batch: summed weak BCE plus an FPD term over
/// same-timestamp projection pairs, differentiated w.r.t. every trainable
/// parameter.
inline GradReport pipeline_grad_check(std::uint64_t seed, double step, Metric metric) {
  Rng rng(seed);
  ModelShape shape = random_shape(rng);
  shape.proj_dim = std::max(shape.proj_dim, 2);
  ModelParams params = random_params(shape, rng);
  const std::vector<FeatureGrid> grids = random_batch_grids(rng, 2, shape.in_bins, 2, 7);
  std::vector<WeakLabelRecord> weak(2);
  for (int i = 0; i < 2; ++i)
    for (int c = 0; c < shape.classes; ++c)
      if (rng.uniform() < 0.5) weak[i].classes.insert(c);
  LossConfig lc;
  lc.metric = metric;
  lc.alpha = 0.5;
  const int frames = std::min(grids[0].frames(), grids[1].frames());
  std::vector<bool> positive(frames);
  for (int t = 0; t < frames; ++t) positive[t] = rng.uniform() < 0.5;

  struct Eval {
    double loss;
    OutputGrads grads;
  };
  auto evaluate = [&](SedNet& net) {
    const auto& out = net.forward(grids, Mode::Train);
    Eval e{0.0, {}};
    for (int i = 0; i < 2; ++i) {
      const auto b = bce_weak_loss(out.classifier[i].clip_probs, weak[i]);
      e.loss += b.loss;
      e.grads.d_clip_probs.push_back(b.grad);
    }
    PairBatch pb;
    for (int t = 0; t < frames; ++t) {
      VectorPair vp{out.projections[0].row(t).transpose(), out.projections[1].row(t).transpose()};
      (positive[t] ? pb.positives : pb.negatives).push_back(std::move(vp));
    }
    const PairLoss pl = fpd_loss(pb, lc);
    e.loss += pl.loss;
    for (int i = 0; i < 2; ++i) e.grads.d_projections.push_back(RowMatrix::Zero(out.projections[i].rows(), shape.proj_dim));
    std::size_t kp = 0, kn = 0;
    for (int t = 0; t < frames; ++t) {
      const VectorPair& g = positive[t] ? pl.positive_grads[kp++] : pl.negative_grads[kn++];
      e.grads.d_projections[0].row(t) += g.a.transpose();
      e.grads.d_projections[1].row(t) += g.b.transpose();
    }
    return e;
  };

  SedNet net(params);
  const Eval base = evaluate(net);
  const ModelParams grads = net.backward(base.grads);

  GradReport rep{0.0, "", base.loss, step};
  auto views = params.tensors();
  auto gviews = grads.tensors();
  auto scalar = [&] {
    SedNet probe(params);
    return evaluate(probe).loss;
  };
  for (std::size_t k = 0; k < views.size(); ++k) {
    if (!views[k].trainable) continue;
    rep.add(views[k].name, flat(gviews[k].data, gviews[k].size),
            numeric_grad(views[k].data, views[k].size, step, scalar));
  }
  return rep;
}

}  // namespace sedfpd::testing

#endif  // SEDFPD_TESTS_GRADCHECK_H_
