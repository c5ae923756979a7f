// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "eval_oracle.h"
#include "fpd_oracle.h"
#include "gradcheck.h"
#include "pairing_oracle.h"
#include "sedfpd/cli.h"
#include "sedfpd/config.h"
#include "sedfpd/report.h"
#include "sedfpd/labels.h"
#include "sedfpd/train.h"
#include "test_util.h"
#include "toy_data.h"

using namespace sedfpd;
using namespace sedfpd::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "sedfpd");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (code != 0) std::fprintf(stderr, "sedfpd exited %d: %s", code, err.str().c_str());
  return code;
}

// ---------------------------------------------------------------------------

Outcome gradient_correctness() {
  constexpr double kStep = 1e-6;
  constexpr int kConfigs = 20;
  Timer timer;
  std::map<std::string, double> worst;
  for (int s = 0; s < kConfigs; ++s) {
    const std::uint64_t seed = 1000 + s;
    worst["encoder"] = std::max(worst["encoder"], encoder_grad_check(seed, kStep, Mode::Train).error);
    worst["encoder-eval"] = std::max(worst["encoder-eval"], encoder_grad_check(seed, kStep, Mode::Eval).error);
    worst["attention"] = std::max(worst["attention"], classifier_grad_check(seed, kStep).error);
    worst["projection"] = std::max(worst["projection"], projection_grad_check(seed, kStep).error);
    worst["bce"] = std::max(worst["bce"], bce_grad_check(seed, kStep).error);
    for (LossMode mode : {LossMode::AsWritten, LossMode::DistanceInterpreted}) {
      LossConfig c;
      c.mode = mode;
      const std::string m = mode == LossMode::AsWritten ? "/as-written" : "/distance";
      c.metric = Metric::Euc;
      worst["fpd_euc" + m] = std::max(worst["fpd_euc" + m], grad_check_loss(c, seed));
      c.metric = Metric::IP;
      c.norm_scope = s % 2 ? NormScope::AllPairs : NormScope::NegativeOnly;
      worst["fpd_ip" + m] = std::max(worst["fpd_ip" + m], grad_check_loss(c, seed));
    }
    worst["pipeline-euc"] = std::max(worst["pipeline-euc"], pipeline_grad_check(seed, kStep, Metric::Euc).error);
    worst["pipeline-ip"] = std::max(worst["pipeline-ip"], pipeline_grad_check(seed, kStep, Metric::IP).error);
  }
  Outcome o;
  std::string parts;
  for (const auto& [name, err] : worst) {
    const double limit = name.rfind("pipeline", 0) == 0 ? 1e-3 : 1e-4;
    if (!(err < limit)) o.pass = false;
    parts += " " + name + "=" + fmt("%.1e", err);
  }
  const double t = timer.seconds();
  if (t >= 60.0) o.pass = false;
  o.detail = std::to_string(kConfigs) + " configs each;" + parts + "; " + fmt("%.1f", t) + " s";
  return o;
}

Outcome loss_oracle() {
  Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int dim = static_cast<int>(rng.uniform_int(1, 8));
    const int n = static_cast<int>(rng.uniform_int(0, 10));
    PairBatch b;
    for (int k = 0; k < n; ++k) {
      VectorPair p{random_vector(rng, dim, rng.uniform(0.1, 3.0)), random_vector(rng, dim, rng.uniform(0.1, 3.0))};
      if (rng.uniform() < 0.3) p.b = p.a + 0.05 * random_vector(rng, dim);
      (rng.uniform() < 0.5 ? b.positives : b.negatives).push_back(std::move(p));
    }
    for (Metric m : {Metric::Euc, Metric::IP})
      for (NormScope scope : {NormScope::NegativeOnly, NormScope::AllPairs}) {
        LossConfig c;
        c.metric = m;
        c.mode = LossMode::AsWritten;
        c.norm_scope = scope;
        c.alpha = rng.uniform() < 0.5 ? 0.1 : rng.uniform(0.0, 1.0);
        const double got = m == Metric::Euc ? fpd_loss_euc(b, c).loss : fpd_loss_ip(b, c).loss;
        worst = std::max(worst, std::abs(got - oracle_loss(b, c)));
      }
  }
  // Worked constants.
  auto vec = [](std::initializer_list<double> v) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double d : v) x(i++) = d;
    return x;
  };
  LossConfig aw;
  aw.mode = LossMode::AsWritten;
  LossConfig ip_all = aw;
  ip_all.metric = Metric::IP;
  ip_all.norm_scope = NormScope::AllPairs;
  LossConfig ip_neg = ip_all;
  ip_neg.norm_scope = NormScope::NegativeOnly;
  LossConfig di;
  bool constants = true;
  constants &= fpd_loss_ip({{}, {{vec({1, 0}), vec({0, 1})}}}, ip_all).loss == 0.1 + 1.0;
  constants &= fpd_loss_euc({{{vec({1, 2}), vec({1, 2})}}, {}}, aw).loss == 1.0;
  constants &= fpd_loss_euc({{{vec({1, 2}), vec({1, 2})}}, {}}, di).loss == 0.0;
  constants &= fpd_loss_euc({{}, {{vec({19, 0}), vec({0, 0})}}}, aw).loss == 0.1 - 1.0 / 20.0;
  constants &= fpd_loss_ip({{{vec({1, -2}), vec({-1, 2})}}, {}}, ip_neg).loss == 0.0;
  constants &= aw.alpha == 0.1;
  Outcome o;
  o.pass = worst <= 1e-10 && constants;
  o.detail = "500 batches, max |loss - oracle| = " + fmt("%.2e", worst) +
             "; worked constants " + (constants ? "exact" : "MISMATCH");
  return o;
}

Outcome pair_exhaustiveness() {
  Rng rng(77);
  long frame_pairs = 0, ignored_partial = 0;
  bool ok = true;
  for (int trial = 0; trial < 200; ++trial) {
    const RandomBatch b = random_batch(rng, 40);
    const bool bg = trial % 4 == 3;
    const PairingOptions opts{bg};
    const auto cps = enumerate_clip_pairs(b.clip_tags);
    const int n = static_cast<int>(b.grids.size());
    ok &= cps.size() == static_cast<std::size_t>(n * (n - 1) / 2);
    auto got = build_frame_pairs(b.grids, cps, opts);
    std::vector<FramePair> expect;
    long candidates = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const auto si = from_mask(b.clip_tags[i]), sj = from_mask(b.clip_tags[j]);
        const ClipCase cc = oracle_clip(si, sj);
        // Partial overlap: neither matching nor completely different.
        if (!si.empty() && !sj.empty() && si != sj && !disjoint(si, sj)) {
          ok &= cc == ClipCase::Ignored;
          ++ignored_partial;
        }
        for (int t = 0; t < std::min(b.grids[i].frames, b.grids[j].frames); ++t) {
          ++candidates;
          const PairCase pc = oracle_frame(cc, b.grids[i], b.grids[j], t, bg);
          if (pc != PairCase::Ignored) expect.push_back({i, j, t, pc});
        }
      }
    std::sort(got.begin(), got.end());
    std::sort(expect.begin(), expect.end());
    ok &= got == expect;
    const auto counts = count_frame_cases(b.grids, cps, opts);
    ok &= counts.positive + counts.negative + counts.ignored == candidates;
    ok &= counts.positive + counts.negative == static_cast<long>(expect.size());
    frame_pairs += static_cast<long>(expect.size());
  }
  return {ok, "200 batches, " + std::to_string(frame_pairs) + " non-Ignored frame pairs, " +
                  std::to_string(ignored_partial) + " partial-overlap clip pairs Ignored"};
}

Outcome metric_oracles() {
  Rng rng(99);
  bool ok = true;
  long events = 0;
  for (int suite = 0; suite < 100; ++suite) {
    std::vector<StrongLabel> ref, est;
    random_event_suite(rng, ref, est);
    events += static_cast<long>(ref.size());
    const auto k = greedy_event_counts(ref, est);
    const auto r = event_based_f1(ref, est);
    ok &= r.tp == k.tp && r.fp == k.fp && r.fn == k.fn && r.tp <= max_event_matching(ref, est);
  }
  for (int suite = 0; suite < 100; ++suite) {
    std::vector<StrongLabel> ref, est;
    random_event_suite(rng, ref, est);
    const double len = suite % 3 == 0 ? 0.5 : 1.0;
    const auto k = raster_segment_counts(ref, est, len);
    const auto r = segment_based_f1(ref, est, len);
    ok &= r.tp == k.tp && r.fp == k.fp && r.fn == k.fn;
  }
  for (int suite = 0; suite < 100; ++suite) {
    std::vector<WeakLabelRecord> ref, est;
    random_tag_suite(rng, ref, est);
    const auto k = tag_counts(ref, est);
    const auto r = tagging_f1(ref, est);
    ok &= r.tp == k.tp && r.fp == k.fp && r.fn == k.fn;
  }
  const std::vector<StrongLabel> some = {{"a", 0, 0.5, 1.5}, {"a", 1, 2.0, 2.5}};
  const std::vector<WeakLabelRecord> tags = {{"a", {0, 1}}}, no_tags = {{"a", {}}};
  bool degenerate = true;
  for (const auto& r : {event_based_f1({}, some), event_based_f1(some, {}), event_based_f1({}, {}),
                        segment_based_f1({}, some), segment_based_f1(some, {}), segment_based_f1({}, {}),
                        tagging_f1(no_tags, tags), tagging_f1(tags, no_tags), tagging_f1(no_tags, no_tags)})
    degenerate &= r.f1 == 0.0 && r.precision == 0.0 && r.recall == 0.0;
  degenerate &= event_based_f1(some, some).f1 == 1.0 && segment_based_f1(some, some).f1 == 1.0 &&
                tagging_f1(tags, tags).f1 == 1.0;
  return {ok && degenerate, "100 suites per metric (" + std::to_string(events) +
                                " reference events); degenerate cases " + (degenerate ? "0/1 as documented" : "WRONG")};
}

Outcome baseline_equivalence() {
  std::map<std::string, std::string> values;
  apply_variant("weak", values);
  values["train.batch_size"] = "8";
  values["train.seed"] = "11";
  const ExperimentConfig cfg = build_config(values);
  Rng rng(5);
  const Dataset d = toy_dataset(rng, 12, 12);
  const ModelParams init = ModelParams::init(toy_shape(), cfg.train.seed);
  Trainer with(init, cfg.train, true), without(init, cfg.train, false);
  long pairs = 0;
  for (long s = 0; s < 10; ++s) {
    const auto batch = assemble_batch(d, cfg.train, s);
    pairs += with.step(d, batch, s).positive;
    without.step(d, batch, s);
  }
  const bool same = same_params(with.net().params(), without.net().params());
  const bool moved = !same_params(with.net().params(), init);
  return {same && moved && cfg.train.lambda_fpd == 0.0,
          std::string("10 steps, lambda_fpd = 0, ") + (same ? "bit-identical" : "DIFFERENT") +
              " parameters (" + std::to_string(pairs) + " positive pairs formed and zero-weighted)"};
}

// Toy-scale analogue of the three-system comparison.
const char* kToyConfig = R"([data]
classes = Tone,Chirp,Noise,Wobble
[synth]
clip_duration = 4
max_events = 3
min_event_duration = 0.4
max_event_duration = 1.5
[features]
mel_bands = 32
[model]
channels = 8,16,32
freq_pool = 4,8,0
proj_dim = 32
[train]
epochs = 12
seeds = 5
)";

Outcome toy_experiment() {
  TempDir dir;
  Timer timer;
  const std::string config = dir.file("toy.ini");
  spit(config, kToyConfig);
  const struct {
    const char* name;
    const char* source;
    int clips;
    int seed;
  } parts[] = {{"ss", "SS", 100, 1}, {"rw", "RW", 100, 2}, {"ev", "SS", 60, 3}};
  for (const auto& p : parts)
    if (cli({"synth", "--config", config, "--out", dir.file(p.name), "--n-clips", std::to_string(p.clips),
             "--seed", std::to_string(p.seed), "--source", p.source, "--set", std::string("synth.prefix=") + p.name}) != 0)
      return {false, "synth failed"};
  std::map<std::string, RunSummary> res;
  for (const char* v : {"weak", "fpd-euc", "fpd-ip"}) {
    if (cli({"train", "--config", config, "--variant", v, "--out", dir.file("out"), "--set",
             "paths.train_manifest=" + dir.file("ss/manifest.jsonl") + "," + dir.file("rw/manifest.jsonl"),
             "paths.eval_manifest=" + dir.file("ev/manifest.jsonl")}) != 0)
      return {false, std::string("train failed for ") + v};
    res[v] = read_run_summary(dir.file(std::string("out/") + v + ".jsonl"));
  }
  const auto& w = res["weak"];
  Outcome o;
  o.detail = "5 seeds, event F1 mean/tagging F1 mean:";
  for (const char* v : {"weak", "fpd-euc", "fpd-ip"}) {
    const auto& s = res[v];
    o.detail += std::string(" ") + v + " " + fmt("%.3f", s.event.mean) + "/" + fmt("%.3f", s.tagging.mean);
    if (std::string(v) != "weak") {
      o.pass &= s.event.mean >= w.event.mean;
      o.pass &= s.tagging.mean >= w.tagging.mean - 0.05;
    }
    o.pass &= s.records.size() == 5;
  }
  const double t = timer.seconds();
  o.pass &= t < 600.0;
  o.detail += "; " + fmt("%.0f", t) + " s";
  return o;
}

const char* kTinyConfig = R"([data]
classes = A,B,C
[synth]
clip_duration = 2
max_events = 2
min_event_duration = 0.3
max_event_duration = 1.0
[features]
mel_bands = 16
[model]
channels = 4,8
freq_pool = 4,0
proj_dim = 8
[train]
batch_size = 6
epochs = 2
seeds = 4
)";

Outcome determinism() {
  TempDir dir;
  const std::string config = dir.file("tiny.ini");
  spit(config, kTinyConfig);
  const struct {
    const char* name;
    const char* source;
    const char* seed;
  } parts[] = {{"ss", "SS", "4"}, {"rw", "RW", "5"}, {"ev", "SS", "6"}};
  for (const auto& p : parts)
    if (cli({"synth", "--config", config, "--out", dir.file(p.name), "--n-clips", "12", "--seed", p.seed,
             "--source", p.source, "--set", std::string("synth.prefix=") + p.name}) != 0)
      return {false, "synth failed"};
  std::vector<std::string> blobs;
  for (const char* jobs : {"1", "1", "2", "4"}) {
    const std::string out = dir.file(std::string("out") + std::to_string(blobs.size()));
    if (cli({"train", "--config", config, "--variant", "fpd-euc", "--jobs", jobs, "--out", out, "--set",
             "paths.train_manifest=" + dir.file("ss/manifest.jsonl") + "," + dir.file("rw/manifest.jsonl"),
             "paths.eval_manifest=" + dir.file("ev/manifest.jsonl")}) != 0)
      return {false, "train failed"};
    blobs.push_back(slurp(out + "/fpd-euc.jsonl"));
  }
  bool same = !blobs[0].empty();
  for (const auto& b : blobs) same &= b == blobs[0];
  return {same, "4 seeds, --jobs 1, 1, 2, 4: summaries " + std::string(same ? "byte-identical" : "DIFFER") + " (" +
                    std::to_string(blobs[0].size()) + " bytes)"};
}

Outcome reporting() {
  TempDir dir;
  Rng rng(8);
  std::vector<std::string> args = {"report"};
  std::map<std::string, std::vector<double>> input;
  for (int k = 0; k < 20; ++k) {
    RunSummary s;
    s.system = "system" + std::to_string(k);
    const int seeds = static_cast<int>(rng.uniform_int(1, 20));
    for (int i = 0; i < seeds; ++i) {
      SeedRecord r;
      r.system = s.system;
      r.seed = static_cast<std::uint64_t>(i);
      r.event_f1 = rng.uniform();
      r.segment_f1 = rng.uniform();
      r.tagging_f1 = rng.uniform();
      s.records.push_back(r);
      input[s.system].push_back(r.event_f1);
    }
    finalize_summary(s);
    args.push_back(dir.file(s.system + ".jsonl"));
    write_run_summary(args.back(), s);
  }
  args.insert(args.end(), {"--csv", dir.file("r.csv"), "--svg", dir.file("r.svg")});
  if (cli(args) != 0) return {false, "report failed"};
  const auto curves = read_report_csv(dir.file("r.csv"));
  bool ok = curves.size() == 20;
  for (const auto& c : curves) {
    auto expect = input.at(c.system);
    std::sort(expect.begin(), expect.end());
    ok &= c.f1 == expect;
  }
  const std::string svg = slurp(dir.file("r.svg"));
  std::size_t polylines = 0;
  for (std::size_t pos = 0; (pos = svg.find("<polyline", pos)) != std::string::npos; ++pos) ++polylines;
  ok &= polylines == 20;
  return {ok, "20 summaries: CSV equals sorted inputs " + std::string(ok ? "exactly" : "NOT exactly") + ", " +
                  std::to_string(polylines) + " polylines"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient correctness", gradient_correctness},
      {"loss oracle equivalence", loss_oracle},
      {"pair-sampling exhaustiveness", pair_exhaustiveness},
      {"metric oracles", metric_oracles},
      {"baseline equivalence", baseline_equivalence},
      {"directional toy experiment", toy_experiment},
      {"determinism", determinism},
      {"reporting", reporting},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
