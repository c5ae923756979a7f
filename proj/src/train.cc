// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#include "sedfpd/train.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

#include "sedfpd/error.h"
#include "sedfpd/parallel.h"
#include "sedfpd/rng.h"

namespace sedfpd {

namespace {

constexpr double kProbFloor = 1e-7;

struct PoolSplit {
  std::vector<std::size_t> ss;
  std::vector<std::size_t> rw;
  int n_ss = 0;
  int n_rw = 0;
};

PoolSplit split_pools(const Dataset& data, const TrainConfig& cfg) {
  PoolSplit p;
  for (std::size_t i = 0; i < data.examples.size(); ++i)
    (data.examples[i].source == Source::SS ? p.ss : p.rw).push_back(i);
  const int parts = cfg.ss_parts + cfg.rw_parts;
  p.n_ss = static_cast<int>(std::lround(static_cast<double>(cfg.batch_size) * cfg.ss_parts / parts));
  if (cfg.ss_parts > 0 && p.n_ss == 0) p.n_ss = 1;
  if (cfg.rw_parts > 0 && p.n_ss == cfg.batch_size) p.n_ss = cfg.batch_size - 1;
  p.n_rw = cfg.batch_size - p.n_ss;
  if (p.n_ss > 0 && p.ss.empty()) throw ValidationError("batch ratio needs SS clips but the SS pool is empty");
  if (p.n_rw > 0 && p.rw.empty()) throw ValidationError("batch ratio needs RW clips but the RW pool is empty");
  return p;
}

// Draws `count` indices from `pool` at positions step*count .. +count of an
// endless stream made of one fresh permutation per pool epoch.
void draw(const std::vector<std::size_t>& pool, int count, long step, std::uint64_t seed,
          std::uint64_t pool_tag, std::vector<std::size_t>& out) {
  if (count == 0) return;
  const long size = static_cast<long>(pool.size());
  long cached_epoch = -1;
  std::vector<std::size_t> perm;
  for (int j = 0; j < count; ++j) {
    const long k = step * count + j;
    const long epoch = k / size;
    if (epoch != cached_epoch) {
      perm = pool;
      Rng rng(derive_seed(seed, {0x42415443ULL, pool_tag, static_cast<std::uint64_t>(epoch)}));
      rng.shuffle(perm);
      cached_epoch = epoch;
    }
    out.push_back(perm[static_cast<std::size_t>(k % size)]);
  }
}

void check_finite(double v, const char* term, long step) {
  if (!std::isfinite(v)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "non-finite %s at step %ld", term, step);
    throw NumericError(buf);
  }
}

template <bool kWithFpd>
StepMetrics compute_step(SedNet& net, const TrainConfig& cfg, const Dataset& data,
                         std::span<const std::size_t> batch, long step_index, bool fpd_active,
                         ModelParams& grads) {
  const std::size_t n = batch.size();
  std::vector<FeatureGrid> grids;
  grids.reserve(n);
  for (std::size_t k : batch) grids.push_back(data.examples.at(k).features);
  const BatchOutputs& out = net.forward(grids, Mode::Train);

  StepMetrics m;
  OutputGrads og;
  og.d_clip_probs.resize(n);
  for (std::size_t b = 0; b < n; ++b) {
    BceResult r = bce_weak_loss(out.classifier[b].clip_probs, data.examples[batch[b]].weak);
    m.l_cls += r.loss / static_cast<double>(n);
    og.d_clip_probs[b] = r.grad / static_cast<double>(n);
  }
  check_finite(m.l_cls, "L_cls", step_index);

  if constexpr (kWithFpd) {
    if (fpd_active) {
      m.fpd_active = true;
      const int classes = data.classes();
      std::vector<FrameTagGrid> tag_grids;
      std::vector<TagMask> clip_tags;
      tag_grids.reserve(n);
      for (std::size_t b = 0; b < n; ++b) {
        const Example& ex = data.examples[batch[b]];
        if (ex.has_strong) {
          tag_grids.push_back(strong_to_frame_grid(ex.strong, ex.features.frames(), classes,
                                                   ex.features.frame_hop, ex.features.sample_rate));
        } else {
          tag_grids.push_back(restrict_wps_to_weak(
              wps_from_probs(out.classifier[b].frame_probs, cfg.tau_pos, cfg.tau_neg), ex.weak));
        }
        clip_tags.push_back(to_mask(ex.weak.classes));
      }
      const PairingOptions popts{cfg.background_as_class};
      const auto clip_pairs = enumerate_clip_pairs(clip_tags);
      const PairCounts counts = count_frame_cases(tag_grids, clip_pairs, popts);
      m.positive = counts.positive;
      m.negative = counts.negative;
      m.ignored = counts.ignored;
      const auto pairs = cap_pairs_per_case(build_frame_pairs(tag_grids, clip_pairs, popts), cfg.pair_cap,
                                            derive_seed(cfg.seed, {0x43415050ULL,
                                                                   static_cast<std::uint64_t>(step_index)}));

      PairBatch pb;
      std::vector<const FramePair*> pos_src, neg_src;
      for (const auto& fp : pairs) {
        VectorPair vp{out.projections[fp.i].row(fp.t).transpose(), out.projections[fp.j].row(fp.t).transpose()};
        if (fp.pair_case == PairCase::Positive) {
          pb.positives.push_back(std::move(vp));
          pos_src.push_back(&fp);
        } else {
          pb.negatives.push_back(std::move(vp));
          neg_src.push_back(&fp);
        }
      }
      og.d_projections.resize(n);
      for (std::size_t b = 0; b < n; ++b)
        og.d_projections[b] = RowMatrix::Zero(out.projections[b].rows(), out.projections[b].cols());
      const std::size_t kept = pairs.size();
      if (kept > 0) {
        const PairLoss pl = fpd_loss(pb, cfg.loss);
        const double scale = cfg.fpd_reduction == FpdReduction::Mean ? 1.0 / static_cast<double>(kept) : 1.0;
        m.l_fpd = pl.loss * scale;
        check_finite(m.l_fpd, "L_FPD", step_index);
        const double w = cfg.lambda_fpd * scale;
        auto scatter = [&](const std::vector<const FramePair*>& src, const std::vector<VectorPair>& g) {
          for (std::size_t k = 0; k < src.size(); ++k) {
            og.d_projections[src[k]->i].row(src[k]->t) += w * g[k].a.transpose();
            og.d_projections[src[k]->j].row(src[k]->t) += w * g[k].b.transpose();
          }
        };
        scatter(pos_src, pl.positive_grads);
        scatter(neg_src, pl.negative_grads);
      }
    }
  }

  grads = net.backward(og);
  return m;
}

}  // namespace

std::string fpd_reduction_name(FpdReduction r) { return r == FpdReduction::Sum ? "sum" : "mean"; }

FpdReduction parse_fpd_reduction(const std::string& s) {
  if (s == "sum") return FpdReduction::Sum;
  if (s == "mean") return FpdReduction::Mean;
  throw ValidationError("unknown FPD reduction '" + s + "' (expected sum or mean)");
}

void TrainConfig::validate() const {
  if (batch_size < 2) throw ValidationError("train.batch_size must be >= 2");
  if (ss_parts < 0 || rw_parts < 0 || ss_parts + rw_parts == 0)
    throw ValidationError("train.ss_parts and train.rw_parts must be >= 0 and not both 0");
  if (!(learning_rate > 0.0)) throw ValidationError("train.learning_rate must be > 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    throw ValidationError("Adam betas must lie in [0, 1)");
  if (!(adam_eps > 0.0)) throw ValidationError("train.adam_eps must be > 0");
  if (!(lambda_fpd >= 0.0)) throw ValidationError("train.lambda_fpd must be >= 0");
  if (epochs < 0) throw ValidationError("train.epochs must be >= 0");
  if (fpd_warmup_epochs < 0) throw ValidationError("train.fpd_warmup_epochs must be >= 0");
  if (!(tau_neg >= 0.0 && tau_neg <= tau_pos && tau_pos <= 1.0))
    throw ValidationError("WPS thresholds must satisfy 0 <= tau_neg <= tau_pos <= 1");
  loss.validate();
}

Dataset load_dataset(const std::string& manifest_path, const std::vector<std::string>& class_names,
                     const FeatureConfig& features, int sample_rate, const std::string& strong_tsv,
                     const std::string& weak_tsv, int jobs) {
  const DatasetManifest manifest = read_manifest(manifest_path, class_names);
  const ClassMap cmap(class_names);
  const std::filesystem::path dir = manifest.base_dir;
  const std::string strong_path = strong_tsv.empty() ? (dir / "strong.tsv").string() : strong_tsv;
  const std::string weak_path = weak_tsv.empty() ? (dir / "weak.tsv").string() : weak_tsv;

  std::map<std::string, std::vector<StrongLabel>> strong_by_clip;
  if (std::filesystem::exists(strong_path))
    for (auto& l : read_strong_labels(strong_path, cmap)) strong_by_clip[l.clip_id].push_back(l);
  std::map<std::string, std::set<int>> weak_by_clip;
  if (std::filesystem::exists(weak_path))
    for (auto& r : read_weak_labels(weak_path, cmap)) weak_by_clip[r.clip_id].insert(r.classes.begin(), r.classes.end());

  Dataset data;
  data.class_names = class_names;
  data.examples.resize(manifest.entries.size());
  parallel_for(manifest.entries.size(), jobs, [&](std::size_t i) {
    const ManifestEntry& e = manifest.entries[i];
    Clip clip = load_clip(manifest.resolve(e).string(), sample_rate);
    clip.source = e.source;
    Example& ex = data.examples[i];
    ex.id = clip.id;
    ex.source = e.source;
    ex.duration = clip.duration();
    ex.features = extract_features(clip, features);
    ex.weak.clip_id = ex.id;
    if (e.strong) {
      ex.has_strong = true;
      if (auto it = strong_by_clip.find(ex.id); it != strong_by_clip.end()) ex.strong = it->second;
    }
    if (auto it = weak_by_clip.find(ex.id); it != weak_by_clip.end()) {
      ex.weak.classes = it->second;
    } else if (e.strong) {
      for (const auto& l : ex.strong) ex.weak.classes.insert(l.cls);
    } else if (e.weak) {
      throw ValidationError("clip " + ex.id + " is marked weak but has no row in " + weak_path);
    }
  });
  return data;
}

Dataset merge_datasets(std::vector<Dataset> parts) {
  Dataset out;
  if (parts.empty()) return out;
  out.class_names = parts.front().class_names;
  std::set<std::string> ids;
  for (auto& p : parts) {
    if (p.class_names != out.class_names) throw ValidationError("merge_datasets: class lists differ");
    for (auto& ex : p.examples) {
      if (!ids.insert(ex.id).second) throw ValidationError("duplicate clip id across manifests: " + ex.id);
      out.examples.push_back(std::move(ex));
    }
  }
  return out;
}

BceResult bce_weak_loss(const Eigen::RowVectorXd& clip_probs, const WeakLabelRecord& weak) {
  const Eigen::Index c_count = clip_probs.size();
  BceResult r;
  r.grad = Eigen::RowVectorXd::Zero(c_count);
  if (c_count == 0) return r;
  const double inv_c = 1.0 / static_cast<double>(c_count);
  for (Eigen::Index c = 0; c < c_count; ++c) {
    const double y = weak.classes.count(static_cast<int>(c)) ? 1.0 : 0.0;
    const double raw = clip_probs[c];
    const double p = std::clamp(raw, kProbFloor, 1.0 - kProbFloor);
    r.loss -= inv_c * (y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    if (raw > kProbFloor && raw < 1.0 - kProbFloor) r.grad[c] = inv_c * (p - y) / (p * (1.0 - p));
  }
  return r;
}

long steps_per_epoch(const Dataset& data, const TrainConfig& cfg) {
  const PoolSplit p = split_pools(data, cfg);
  const std::size_t used = (p.n_ss > 0 ? p.ss.size() : 0) + (p.n_rw > 0 ? p.rw.size() : 0);
  return std::max<long>(1, static_cast<long>((used + cfg.batch_size - 1) / cfg.batch_size));
}

std::vector<std::size_t> assemble_batch(const Dataset& data, const TrainConfig& cfg, long step) {
  if (step < 0) throw ValidationError("assemble_batch: step must be >= 0");
  const PoolSplit p = split_pools(data, cfg);
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>(cfg.batch_size));
  draw(p.ss, p.n_ss, step, cfg.seed, 0, out);
  draw(p.rw, p.n_rw, step, cfg.seed, 1, out);
  return out;
}

void adam_update(ModelParams& params, const ModelParams& grads, AdamState& state, const TrainConfig& cfg) {
  auto pv = params.tensors();
  const auto gv = grads.tensors();
  if (pv.size() != gv.size()) throw UsageError("adam_update: parameter/gradient layout mismatch");
  if (state.m.empty()) {
    state.m.resize(pv.size());
    state.v.resize(pv.size());
    for (std::size_t k = 0; k < pv.size(); ++k) {
      state.m[k].assign(pv[k].size, 0.0);
      state.v[k].assign(pv[k].size, 0.0);
    }
  }
  ++state.t;
  const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  for (std::size_t k = 0; k < pv.size(); ++k) {
    if (!pv[k].trainable) continue;
    if (pv[k].size != gv[k].size) throw UsageError("adam_update: tensor size mismatch for " + pv[k].name);
    double* p = pv[k].data;
    const double* g = gv[k].data;
    double* m = state.m[k].data();
    double* v = state.v[k].data();
    for (std::size_t i = 0; i < pv[k].size; ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    }
  }
}

Trainer::Trainer(ModelParams init, TrainConfig cfg, bool fpd_compiled_in)
    : net_(std::move(init)), cfg_(std::move(cfg)), fpd_compiled_in_(fpd_compiled_in) {
  cfg_.validate();
}

StepMetrics Trainer::compute_gradients(const Dataset& data, std::span<const std::size_t> batch,
                                       long step_index, ModelParams& grads) {
  if (batch.size() < 2) throw ValidationError("train_step: batch needs at least 2 clips");
  const long spe = steps_per_epoch(data, cfg_);
  const bool fpd_active = step_index / spe >= cfg_.fpd_warmup_epochs;
  if (fpd_compiled_in_) return compute_step<true>(net_, cfg_, data, batch, step_index, fpd_active, grads);
  return compute_step<false>(net_, cfg_, data, batch, step_index, false, grads);
}

StepMetrics Trainer::step(const Dataset& data, std::span<const std::size_t> batch, long step_index) {
  ModelParams grads;
  const StepMetrics m = compute_gradients(data, batch, step_index, grads);
  adam_update(net_.params(), grads, adam_, cfg_);
  return m;
}

EvalMetrics evaluate(ModelParams& params, const Dataset& eval_set, const EvalConfig& cfg) {
  std::vector<StrongLabel> ref, est;
  std::vector<WeakLabelRecord> ref_tags, est_tags;
  std::map<std::string, double> durations;
  for (const Example& ex : eval_set.examples) {
    const FrameEmbeddings emb = encoder_forward(ex.features, params.shape, params.encoder, Mode::Eval);
    const ClassifierOutput co = classify_frames(emb, params.classifier);
    for (auto& e : decode_events(ex.id, co.frame_probs, cfg.threshold, cfg.median_window,
                                 ex.features.frame_hop, ex.features.sample_rate))
      est.push_back(std::move(e));
    ref.insert(ref.end(), ex.strong.begin(), ex.strong.end());
    WeakLabelRecord rt{ex.id, {}}, et{ex.id, {}};
    for (const auto& l : ex.strong) rt.classes.insert(l.cls);
    for (Eigen::Index c = 0; c < co.clip_probs.size(); ++c)
      if (co.clip_probs[c] >= cfg.tag_threshold) et.classes.insert(static_cast<int>(c));
    ref_tags.push_back(std::move(rt));
    est_tags.push_back(std::move(et));
    durations[ex.id] = ex.duration;
  }
  const ScoringOptions opts{cfg.averaging, eval_set.classes()};
  EvalMetrics m;
  m.event = event_based_f1(ref, est, cfg.collars, opts);
  m.segment = segment_based_f1(ref, est, cfg.segment_length, opts, durations);
  m.tagging = tagging_f1(ref_tags, est_tags, opts);
  return m;
}

MetricStats metric_stats(const std::vector<double>& values) {
  MetricStats s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (n - 1.0));
  }
  s.best = *std::max_element(values.begin(), values.end());
  return s;
}

void finalize_summary(RunSummary& s) {
  std::vector<double> ev, sg, tg;
  for (const auto& r : s.records) {
    ev.push_back(r.event_f1);
    sg.push_back(r.segment_f1);
    tg.push_back(r.tagging_f1);
  }
  s.event = metric_stats(ev);
  s.segment = metric_stats(sg);
  s.tagging = metric_stats(tg);
}

SeedRecord train_one_seed(const TrainConfig& cfg_in, const ModelShape& shape, const Dataset& train,
                          const Dataset& eval_set, const EvalConfig& eval_cfg, const std::string& system,
                          ModelParams* final_params, bool fpd_compiled_in) {
  TrainConfig cfg = cfg_in;
  Trainer trainer(ModelParams::init(shape, cfg.seed), cfg, fpd_compiled_in);
  const long spe = steps_per_epoch(train, cfg);
  SeedRecord rec;
  rec.system = system;
  rec.seed = cfg.seed;
  long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double cls = 0.0, fpd = 0.0;
    for (long s = 0; s < spe; ++s, ++step) {
      const auto batch = assemble_batch(train, cfg, step);
      const StepMetrics m = trainer.step(train, batch, step);
      cls += m.l_cls;
      fpd += m.l_fpd;
    }
    rec.cls_loss.push_back(cls / static_cast<double>(spe));
    rec.fpd_loss.push_back(fpd / static_cast<double>(spe));
  }
  const EvalMetrics em = evaluate(trainer.net().params(), eval_set, eval_cfg);
  rec.event_f1 = em.event.f1;
  rec.segment_f1 = em.segment.f1;
  rec.tagging_f1 = em.tagging.f1;
  if (final_params) *final_params = trainer.net().params();
  return rec;
}

RunSummary run_experiment(const TrainConfig& cfg, const ModelShape& shape, const Dataset& train,
                          const Dataset& eval_set, const EvalConfig& eval_cfg, int n_seeds, int jobs,
                          const std::string& system) {
  if (n_seeds < 1) throw ValidationError("run_experiment: n_seeds must be >= 1");
  cfg.validate();
  std::vector<SeedRecord> records(static_cast<std::size_t>(n_seeds));
  std::vector<ModelParams> finals(static_cast<std::size_t>(n_seeds));
  parallel_for(records.size(), jobs, [&](std::size_t k) {
    TrainConfig c = cfg;
    c.seed = cfg.seed + k;
    records[k] = train_one_seed(c, shape, train, eval_set, eval_cfg, system, &finals[k]);
  });
  RunSummary s;
  s.system = system;
  s.records = std::move(records);
  finalize_summary(s);
  std::size_t best = 0;
  for (std::size_t k = 1; k < s.records.size(); ++k)
    if (s.records[k].event_f1 > s.records[best].event_f1) best = k;
  s.best_params = std::move(finals[best]);
  return s;
}

void write_run_summary(const std::string& path, const RunSummary& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write run summary " + path);
  for (const auto& r : s.records) {
    nlohmann::ordered_json j;
    j["system"] = r.system;
    j["seed"] = r.seed;
    j["event_f1"] = r.event_f1;
    j["segment_f1"] = r.segment_f1;
    j["tagging_f1"] = r.tagging_f1;
    j["cls_loss"] = r.cls_loss;
    j["fpd_loss"] = r.fpd_loss;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

RunSummary read_run_summary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open run summary " + path);
  RunSummary s;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      SeedRecord r;
      r.system = j.at("system").get<std::string>();
      r.seed = j.at("seed").get<std::uint64_t>();
      r.event_f1 = j.at("event_f1").get<double>();
      r.segment_f1 = j.at("segment_f1").get<double>();
      r.tagging_f1 = j.at("tagging_f1").get<double>();
      r.cls_loss = j.value("cls_loss", std::vector<double>{});
      r.fpd_loss = j.value("fpd_loss", std::vector<double>{});
      if (s.records.empty())
        s.system = r.system;
      else if (r.system != s.system)
        throw ValidationError("mixed systems in one summary file");
      s.records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, line_no, e.what());
    } catch (const ValidationError& e) {
      throw ParseError(path, line_no, e.what());
    }
  }
  if (s.records.empty()) throw ValidationError("run summary " + path + " has no records");
  finalize_summary(s);
  return s;
}

std::string format_summary_table(const std::vector<RunSummary>& summaries) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-12s %5s  %-22s %-22s %-22s\n", "system", "seeds", "event F1 (mean+-std/best)",
                "segment F1", "tagging F1");
  os << buf;
  auto cell = [](const MetricStats& m) {
    char c[64];
    std::snprintf(c, sizeof c, "%.3f +- %.4f / %.3f", m.mean, m.stddev, m.best);
    return std::string(c);
  };
  for (const auto& s : summaries) {
    std::snprintf(buf, sizeof buf, "%-12s %5zu  %-22s %-22s %-22s\n", s.system.c_str(), s.records.size(),
                  cell(s.event).c_str(), cell(s.segment).c_str(), cell(s.tagging).c_str());
    os << buf;
  }
  return os.str();
}

}  // namespace sedfpd
