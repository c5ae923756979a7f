// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#include "sedfpd/cli.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sedfpd/config.h"
#include "sedfpd/error.h"
#include "sedfpd/eval.h"
#include "sedfpd/labels.h"
#include "sedfpd/report.h"
#include "sedfpd/synthgen.h"
#include "sedfpd/train.h"

namespace sedfpd {

namespace {

namespace fs = std::filesystem;

struct CommonOpts {
  std::string config;
  std::vector<std::string> sets;
};

std::map<std::string, std::string> gather(const CommonOpts& o) {
  std::map<std::string, std::string> values;
  if (!o.config.empty()) values = read_config_file(o.config);
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + s + "'");
    const std::string key = s.substr(0, eq);
    bool known = false;
    for (const auto& k : config_keys()) known = known || k.key == key;
    if (!known) throw ValidationError("unknown config key '" + key + "'");
    values[key] = s.substr(eq + 1);
  }
  return values;
}

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config, "config file (INI-style sections of key = value)");
  cmd->add_option("--set", o.sets, "override one config key, e.g. --set train.epochs=5")->take_all();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int cmd_synth(const CommonOpts& common, const std::string& out_dir, const std::map<std::string, std::string>& flags,
              std::ostream& out) {
  auto values = gather(common);
  for (const auto& [k, v] : flags) values[k] = v;
  const ExperimentConfig cfg = build_config(values);
  cfg.validate();
  DatasetRequest req;
  req.spec = cfg.synth.spec;
  req.templates = cfg.templates();
  req.class_names = cfg.class_names;
  req.sample_rate = cfg.sample_rate;
  req.n_clips = cfg.synth.n_clips;
  req.source = cfg.synth.source;
  req.prefix = cfg.synth.prefix;
  req.seed = cfg.synth.seed;
  req.jobs = cfg.synth.jobs;
  const DatasetManifest m = generate_dataset(req, out_dir);
  out << "wrote " << m.entries.size() << " clips to " << out_dir << "\n";
  return 0;
}

}  // namespace

void apply_variant(const std::string& variant, std::map<std::string, std::string>& values) {
  if (variant == "weak") {
    values["train.lambda_fpd"] = "0";
  } else if (variant == "fpd-euc") {
    values["fpd.metric"] = "euc";
  } else if (variant == "fpd-ip") {
    values["fpd.metric"] = "ip";
  } else {
    throw ValidationError("--variant must be weak, fpd-euc or fpd-ip");
  }
}

namespace {

int cmd_train(const CommonOpts& common, const std::string& variant, const std::map<std::string, std::string>& flags,
              std::ostream& out) {
  auto values = gather(common);
  for (const auto& [k, v] : flags) values[k] = v;
  const std::string system = variant.empty() ? "custom" : variant;
  if (!variant.empty()) apply_variant(variant, values);
  const ExperimentConfig cfg = build_config(values);
  cfg.validate();
  if (cfg.paths.train_manifest.empty() || cfg.paths.eval_manifest.empty())
    throw ValidationError("paths.train_manifest and paths.eval_manifest must be set");

  auto load_all = [&](const std::string& list, const std::string& strong, const std::string& weak) {
    std::vector<Dataset> parts;
    std::stringstream ss(list);
    for (std::string p; std::getline(ss, p, ',');)
      if (!p.empty())
        parts.push_back(load_dataset(p, cfg.class_names, cfg.features, cfg.sample_rate, strong, weak, cfg.jobs));
    return merge_datasets(std::move(parts));
  };
  const Dataset train = load_all(cfg.paths.train_manifest, cfg.paths.train_strong, cfg.paths.train_weak);
  const Dataset eval_set = load_all(cfg.paths.eval_manifest, cfg.paths.eval_strong, cfg.paths.eval_weak);
  const RunSummary s =
      run_experiment(cfg.train, cfg.model_shape(), train, eval_set, cfg.eval, cfg.n_seeds, cfg.jobs, system);

  std::error_code ec;
  fs::create_directories(cfg.paths.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + cfg.paths.out_dir + ": " + ec.message());
  const fs::path dir(cfg.paths.out_dir);
  write_run_summary((dir / (system + ".jsonl")).string(), s);
  const std::string table = format_summary_table({s});
  {
    std::ofstream t(dir / (system + "_table.txt"), std::ios::binary);
    if (!t) throw IoError("cannot write table in " + cfg.paths.out_dir);
    t << table;
  }
  if (s.best_params) save_checkpoint((dir / (system + "_best.ckpt")).string(), *s.best_params);
  out << table;
  return 0;
}

struct EvalOpts {
  std::string ref, est, metric = "event", classes, averaging;
  double segment_length = -1.0;
  bool weak = false;
  bool json = false;
};

int cmd_eval(const CommonOpts& common, const EvalOpts& o, std::ostream& out) {
  const ExperimentConfig cfg = build_config(gather(common));
  std::vector<std::string> names;
  if (!o.classes.empty()) {
    std::stringstream ss(o.classes);
    for (std::string n; std::getline(ss, n, ',');)
      if (!n.empty()) names.push_back(n);
  } else if (!common.config.empty()) {
    names = cfg.class_names;
  } else {
    std::set<std::string> u;
    for (const auto* p : {&o.ref, &o.est})
      for (auto& n : scan_class_names(*p, !o.weak)) u.insert(n);
    names.assign(u.begin(), u.end());
  }
  const ClassMap cmap(names);
  ScoringOptions opts{cfg.eval.averaging, cmap.size()};
  if (o.averaging == "macro")
    opts.averaging = Averaging::Macro;
  else if (o.averaging == "micro")
    opts.averaging = Averaging::Micro;
  else if (!o.averaging.empty())
    throw ValidationError("--averaging must be micro or macro");
  const double seg_len = o.segment_length > 0.0 ? o.segment_length : cfg.eval.segment_length;

  F1Report r;
  if (o.metric == "tagging") {
    std::vector<WeakLabelRecord> ref, est;
    if (o.weak) {
      ref = read_weak_labels(o.ref, cmap);
      est = read_weak_labels(o.est, cmap);
    } else {
      // Strong files cannot list clips without events; score the union.
      ref = weak_from_strong(read_strong_labels(o.ref, cmap));
      est = weak_from_strong(read_strong_labels(o.est, cmap));
      std::set<std::string> ids_r, ids_e;
      for (auto& x : ref) ids_r.insert(x.clip_id);
      for (auto& x : est) ids_e.insert(x.clip_id);
      for (auto& id : ids_e)
        if (!ids_r.count(id)) ref.push_back({id, {}});
      for (auto& id : ids_r)
        if (!ids_e.count(id)) est.push_back({id, {}});
    }
    r = tagging_f1(ref, est, opts);
  } else if (o.metric == "event" || o.metric == "segment") {
    if (o.weak) throw ValidationError("--weak only applies to --metric tagging");
    const auto ref = read_strong_labels(o.ref, cmap);
    const auto est = read_strong_labels(o.est, cmap);
    r = o.metric == "event" ? event_based_f1(ref, est, cfg.eval.collars, opts)
                            : segment_based_f1(ref, est, seg_len, opts);
  } else {
    throw ValidationError("--metric must be event, segment or tagging");
  }

  if (o.json) {
    nlohmann::ordered_json j;
    j["metric"] = granularity_name(r.granularity);
    if (o.metric == "segment") j["segment_length"] = seg_len;
    if (o.metric == "event") {
      j["onset_collar"] = cfg.eval.collars.onset;
      j["offset_collar"] = cfg.eval.collars.offset_floor;
      j["offset_ratio"] = cfg.eval.collars.offset_ratio;
    }
    j["averaging"] = opts.averaging == Averaging::Macro ? "macro" : "micro";
    j["tp"] = r.tp;
    j["fp"] = r.fp;
    j["fn"] = r.fn;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f1"] = r.f1;
    out << j.dump() << "\n";
  } else {
    out << granularity_name(r.granularity) << "-based F1";
    if (o.metric == "segment") out << " (segment_length " << fmt("%g", seg_len) << " s)";
    out << ": " << fmt("%.6f", r.f1) << "  precision " << fmt("%.6f", r.precision) << "  recall "
        << fmt("%.6f", r.recall) << "  tp " << r.tp << " fp " << r.fp << " fn " << r.fn << "\n";
  }
  return 0;
}

int cmd_report(const std::vector<std::string>& files, const std::string& csv, const std::string& svg,
               std::ostream& out) {
  if (files.empty()) throw ValidationError("report needs at least one summary file");
  std::vector<RunSummary> summaries;
  for (const auto& f : files) summaries.push_back(read_run_summary(f));
  const auto curves = sorted_curves(summaries);
  write_report_csv(csv, curves);
  std::ofstream s(svg, std::ios::binary);
  if (!s) throw IoError("cannot write " + svg);
  s << render_report_svg(curves);
  if (!s) throw IoError("write failed for " + svg);
  out << format_summary_table(summaries);
  out << "wrote " << csv << " and " << svg << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weakly supervised sound event detection with a frame pairwise distance loss"};
  app.require_subcommand(1);
  app.footer(config_help());

  CommonOpts synth_common, train_common, eval_common;
  std::string synth_out, variant;
  std::uint64_t synth_seed = 0, train_seed = 0;
  std::size_t n_clips = 0;
  std::string synth_source, train_out;
  int synth_jobs = 0, train_jobs = 0, seeds = 0;

  auto* synth = app.add_subcommand("synth", "generate a synthetic strongly labeled dataset");
  add_common(synth, synth_common);
  synth->add_option("--out", synth_out, "output directory")->required();
  auto* synth_seed_opt = synth->add_option("--seed", synth_seed, "generation seed (synth.seed)");
  auto* n_clips_opt = synth->add_option("--n-clips", n_clips, "number of clips (synth.n_clips)");
  synth->add_option("--source", synth_source, "SS or RW (synth.source)");
  synth->add_option("--jobs", synth_jobs, "parallel workers (synth.jobs)");

  auto* train = app.add_subcommand("train", "train and evaluate one system over several seeds");
  add_common(train, train_common);
  train->add_option("--variant", variant, "weak | fpd-euc | fpd-ip");
  train->add_option("--seeds", seeds, "independent runs (train.seeds)");
  train->add_option("--jobs", train_jobs, "runs trained concurrently (train.jobs)");
  auto* train_seed_opt = train->add_option("--seed", train_seed, "first seed (train.seed)");
  train->add_option("--out", train_out, "output directory (paths.out_dir)");

  EvalOpts eo;
  auto* eval = app.add_subcommand("eval", "score an estimate TSV against a reference TSV");
  add_common(eval, eval_common);
  eval->add_option("--ref", eo.ref, "reference label file")->required();
  eval->add_option("--est", eo.est, "estimated label file")->required();
  eval->add_option("--metric", eo.metric, "event | segment | tagging");
  eval->add_option("--segment-length", eo.segment_length, "segment length in seconds (eval.segment_length)");
  eval->add_option("--classes", eo.classes, "comma-separated class names (default: from config or files)");
  eval->add_option("--averaging", eo.averaging, "micro | macro (eval.averaging)");
  eval->add_flag("--weak", eo.weak, "label files are weak TSVs (tagging only)");
  eval->add_flag("--json", eo.json, "print one JSON record instead of text");

  std::vector<std::string> summary_files;
  std::string csv = "report.csv", svg = "report.svg";
  auto* report = app.add_subcommand("report", "sorted per-seed event-based F1 as CSV and SVG");
  report->add_option("summaries", summary_files, "RunSummary JSON-lines files")->required();
  report->add_option("--csv", csv, "CSV output path");
  report->add_option("--svg", svg, "SVG output path");

  for (auto* sub : {synth, train, eval}) sub->footer(config_help());

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) {
      std::map<std::string, std::string> flags;
      if (*synth_seed_opt) flags["synth.seed"] = std::to_string(synth_seed);
      if (*n_clips_opt) flags["synth.n_clips"] = std::to_string(n_clips);
      if (!synth_source.empty()) flags["synth.source"] = synth_source;
      if (synth_jobs > 0) flags["synth.jobs"] = std::to_string(synth_jobs);
      return cmd_synth(synth_common, synth_out, flags, out);
    }
    if (train->parsed()) {
      std::map<std::string, std::string> flags;
      if (seeds > 0) flags["train.seeds"] = std::to_string(seeds);
      if (train_jobs > 0) flags["train.jobs"] = std::to_string(train_jobs);
      if (*train_seed_opt) flags["train.seed"] = std::to_string(train_seed);
      if (!train_out.empty()) flags["paths.out_dir"] = train_out;
      return cmd_train(train_common, variant, flags, out);
    }
    if (eval->parsed()) return cmd_eval(eval_common, eo, out);
    if (report->parsed()) return cmd_report(summary_files, csv, svg, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace sedfpd
