// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#include "sedfpd/config.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <set>
#include <sstream>

#include "sedfpd/error.h"

namespace sedfpd {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void bad(const std::string& key, const std::string& v, const char* want) {
  throw ValidationError(key + ": '" + v + "' is not " + want);
}

long to_long(const std::string& key, const std::string& v) {
  long out = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) bad(key, v, "an integer");
  return out;
}

int to_int(const std::string& key, const std::string& v) { return static_cast<int>(to_long(key, v)); }

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) bad(key, v, "a non-negative integer");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) bad(key, v, "a number");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad(key, v, "a boolean");
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& s : split_list(v)) out.push_back(to_int(key, s));
  return out;
}

std::vector<double> to_double_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split_list(v)) out.push_back(to_double(key, s));
  return out;
}

template <typename Fn>
auto wrap(const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    if (what.rfind(key, 0) == 0) throw;
    throw ValidationError(key + ": " + what);
  }
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& v)>;

struct Entry {
  ConfigKey doc;
  Setter set;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = [] {
    std::vector<Entry> e;
    auto add = [&](std::string key, std::string def, std::string help, Setter s) {
      e.push_back({{std::move(key), std::move(def), std::move(help)}, std::move(s)});
    };
    using C = ExperimentConfig;
    using S = const std::string&;

    add("data.classes", "Tone,Chirp,Noise,Wobble", "ordered class names (comma-separated)",
        [](C& c, S, S v) { c.class_names = split_list(v); });
    add("data.sample_rate", "16000", "audio sample rate in Hz", [](C& c, S k, S v) { c.sample_rate = to_int(k, v); });

    add("synth.n_clips", "10", "clips to generate", [](C& c, S k, S v) {
      c.synth.n_clips = static_cast<std::size_t>(to_u64(k, v));
    });
    add("synth.source", "SS", "source marker written to the manifest (SS or RW)",
        [](C& c, S k, S v) { c.synth.source = wrap(k, [&] { return parse_source(v); }); });
    add("synth.prefix", "clip", "audio file name prefix", [](C& c, S, S v) { c.synth.prefix = v; });
    add("synth.seed", "0", "generation seed", [](C& c, S k, S v) { c.synth.seed = to_u64(k, v); });
    add("synth.clip_duration", "10", "clip length in seconds",
        [](C& c, S k, S v) { c.synth.spec.clip_duration = to_double(k, v); });
    add("synth.min_events", "1", "fewest events per clip", [](C& c, S k, S v) { c.synth.spec.min_events = to_int(k, v); });
    add("synth.max_events", "5", "most events per clip", [](C& c, S k, S v) { c.synth.spec.max_events = to_int(k, v); });
    add("synth.background_db", "-40", "background noise RMS in dBFS",
        [](C& c, S k, S v) { c.synth.spec.background_level_db = to_double(k, v); });
    add("synth.class_distribution", "", "per-class event probabilities (empty: uniform)",
        [](C& c, S k, S v) { c.synth.spec.class_distribution = to_double_list(k, v); });
    add("synth.min_event_duration", "0.5", "shortest event in seconds",
        [](C& c, S k, S v) { c.synth.min_event_duration = to_double(k, v); });
    add("synth.max_event_duration", "2.0", "longest event in seconds",
        [](C& c, S k, S v) { c.synth.max_event_duration = to_double(k, v); });
    add("synth.min_snr_db", "0", "lowest event SNR in dB", [](C& c, S k, S v) { c.synth.min_snr_db = to_double(k, v); });
    add("synth.max_snr_db", "10", "highest event SNR in dB", [](C& c, S k, S v) { c.synth.max_snr_db = to_double(k, v); });
    add("synth.jobs", "1", "parallel clip workers", [](C& c, S k, S v) { c.synth.jobs = to_int(k, v); });

    add("features.window", "2048", "STFT window in samples", [](C& c, S k, S v) { c.features.window = to_int(k, v); });
    add("features.hop", "255", "STFT hop in samples", [](C& c, S k, S v) { c.features.hop = to_int(k, v); });
    add("features.mel_bands", "0", "mel bands (0: raw STFT bins)",
        [](C& c, S k, S v) { c.features.mel_bands = to_int(k, v); });

    add("model.channels", "16,32,64", "channels per conv block", [](C& c, S k, S v) { c.model.channels = to_int_list(k, v); });
    add("model.freq_pool", "4,4,0", "frequency pooling per block (0: collapse)",
        [](C& c, S k, S v) { c.model.freq_pool = to_int_list(k, v); });
    add("model.kernel", "3", "square kernel size (odd)", [](C& c, S k, S v) { c.model.kernel = to_int(k, v); });
    add("model.proj_dim", "64", "projection head width", [](C& c, S k, S v) { c.model.proj_dim = to_int(k, v); });

    add("train.batch_size", "24", "clips per batch", [](C& c, S k, S v) { c.train.batch_size = to_int(k, v); });
    add("train.ss_parts", "1", "SS share of the SS:RW mix", [](C& c, S k, S v) { c.train.ss_parts = to_int(k, v); });
    add("train.rw_parts", "1", "RW share of the SS:RW mix", [](C& c, S k, S v) { c.train.rw_parts = to_int(k, v); });
    add("train.learning_rate", "0.001", "Adam step size", [](C& c, S k, S v) { c.train.learning_rate = to_double(k, v); });
    add("train.adam_beta1", "0.9", "Adam first-moment decay", [](C& c, S k, S v) { c.train.adam_beta1 = to_double(k, v); });
    add("train.adam_beta2", "0.999", "Adam second-moment decay",
        [](C& c, S k, S v) { c.train.adam_beta2 = to_double(k, v); });
    add("train.adam_eps", "1e-08", "Adam epsilon", [](C& c, S k, S v) { c.train.adam_eps = to_double(k, v); });
    add("train.lambda_fpd", "1.0", "weight of the FPD loss", [](C& c, S k, S v) { c.train.lambda_fpd = to_double(k, v); });
    add("train.epochs", "30", "training epochs", [](C& c, S k, S v) { c.train.epochs = to_int(k, v); });
    add("train.seed", "0", "first seed of the run", [](C& c, S k, S v) { c.train.seed = to_u64(k, v); });
    add("train.tau_pos", "0.75", "WPS activity threshold", [](C& c, S k, S v) { c.train.tau_pos = to_double(k, v); });
    add("train.tau_neg", "0.25", "WPS inactivity threshold", [](C& c, S k, S v) { c.train.tau_neg = to_double(k, v); });
    add("train.pair_cap", "2000", "frame pairs kept per case and batch (-1: all)",
        [](C& c, S k, S v) { c.train.pair_cap = to_long(k, v); });
    add("train.fpd_warmup_epochs", "0", "epochs before the FPD loss is switched on",
        [](C& c, S k, S v) { c.train.fpd_warmup_epochs = to_int(k, v); });
    add("train.background_as_class", "false", "let silent frames form pairs",
        [](C& c, S k, S v) { c.train.background_as_class = to_bool(k, v); });
    add("train.seeds", "20", "independent runs", [](C& c, S k, S v) { c.n_seeds = to_int(k, v); });
    add("train.jobs", "1", "runs trained concurrently", [](C& c, S k, S v) { c.jobs = to_int(k, v); });

    add("fpd.metric", "euc", "pair metric (euc or ip)",
        [](C& c, S k, S v) { c.train.loss.metric = wrap(k, [&] { return parse_metric(v); }); });
    add("fpd.alpha", "0.1", "hinge margin", [](C& c, S k, S v) { c.train.loss.alpha = to_double(k, v); });
    add("fpd.mode", "distance_interpreted", "as_written or distance_interpreted",
        [](C& c, S k, S v) { c.train.loss.mode = wrap(k, [&] { return parse_loss_mode(v); }); });
    add("fpd.norm_scope", "negative_only", "pairs given the IP norm term (all_pairs or negative_only)",
        [](C& c, S k, S v) { c.train.loss.norm_scope = wrap(k, [&] { return parse_norm_scope(v); }); });
    add("fpd.reduction", "mean", "sum or mean over kept pairs",
        [](C& c, S k, S v) { c.train.fpd_reduction = wrap(k, [&] { return parse_fpd_reduction(v); }); });

    add("eval.threshold", "0.5", "frame decision threshold", [](C& c, S k, S v) { c.eval.threshold = to_double(k, v); });
    add("eval.median_window", "7", "median filter length in frames (odd)",
        [](C& c, S k, S v) { c.eval.median_window = to_int(k, v); });
    add("eval.onset_collar", "0.2", "onset collar in seconds", [](C& c, S k, S v) { c.eval.collars.onset = to_double(k, v); });
    add("eval.offset_collar", "0.2", "offset collar floor in seconds",
        [](C& c, S k, S v) { c.eval.collars.offset_floor = to_double(k, v); });
    add("eval.offset_ratio", "0.2", "offset collar as a fraction of the reference length",
        [](C& c, S k, S v) { c.eval.collars.offset_ratio = to_double(k, v); });
    add("eval.segment_length", "1.0", "segment length in seconds",
        [](C& c, S k, S v) { c.eval.segment_length = to_double(k, v); });
    add("eval.tag_threshold", "0.5", "clip probability threshold for tags",
        [](C& c, S k, S v) { c.eval.tag_threshold = to_double(k, v); });
    add("eval.averaging", "micro", "micro or macro", [](C& c, S k, S v) {
      if (v == "micro")
        c.eval.averaging = Averaging::Micro;
      else if (v == "macro")
        c.eval.averaging = Averaging::Macro;
      else
        bad(k, v, "micro or macro");
    });

    add("paths.train_manifest", "", "training manifests (JSON lines, comma-separated)", [](C& c, S, S v) { c.paths.train_manifest = v; });
    add("paths.eval_manifest", "", "evaluation manifests (JSON lines, comma-separated)", [](C& c, S, S v) { c.paths.eval_manifest = v; });
    add("paths.out_dir", "runs", "output directory for train", [](C& c, S, S v) { c.paths.out_dir = v; });
    add("paths.train_strong", "", "strong TSV for training (empty: next to manifest)",
        [](C& c, S, S v) { c.paths.train_strong = v; });
    add("paths.train_weak", "", "weak TSV for training (empty: next to manifest)",
        [](C& c, S, S v) { c.paths.train_weak = v; });
    add("paths.eval_strong", "", "strong TSV for evaluation (empty: next to manifest)",
        [](C& c, S, S v) { c.paths.eval_strong = v; });
    add("paths.eval_weak", "", "weak TSV for evaluation (empty: next to manifest)",
        [](C& c, S, S v) { c.paths.eval_weak = v; });
    return e;
  }();
  return entries;
}

const Entry* find_entry(const std::string& key) {
  for (const auto& e : registry())
    if (e.doc.key == key) return &e;
  return nullptr;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const auto& e : registry()) k.push_back(e.doc);
    return k;
  }();
  return keys;
}

std::map<std::string, std::string> parse_config_text(std::istream& in, const std::string& source_name) {
  std::map<std::string, std::string> out;
  std::string line, section;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(source_name, line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source_name, line_no, "expected key = value");
    const std::string name = trim(line.substr(0, eq));
    const std::string key = section.empty() ? name : section + "." + name;
    if (!find_entry(key)) throw ParseError(source_name, line_no, "unknown config key '" + key + "'");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  return parse_config_text(in, path);
}

ExperimentConfig build_config(const std::map<std::string, std::string>& values) {
  for (const auto& [k, v] : values)
    if (!find_entry(k)) throw ValidationError("unknown config key '" + k + "'");
  ExperimentConfig c;
  for (const auto& e : registry()) {
    auto it = values.find(e.doc.key);
    e.set(c, e.doc.key, it == values.end() ? e.doc.default_value : it->second);
  }
  if (c.synth.spec.class_distribution.empty() && !c.class_names.empty())
    c.synth.spec.class_distribution.assign(c.class_names.size(), 1.0 / static_cast<double>(c.class_names.size()));
  return c;
}

std::vector<EventTemplateSpec> ExperimentConfig::templates() const {
  auto t = default_templates(static_cast<int>(class_names.size()), synth.min_event_duration, synth.max_event_duration);
  for (auto& x : t) {
    x.min_snr_db = synth.min_snr_db;
    x.max_snr_db = synth.max_snr_db;
  }
  return t;
}

ModelShape ExperimentConfig::model_shape() const {
  ModelShape s = model;
  s.in_bins = features.mel_bands > 0 ? features.mel_bands : features.window / 2 + 1;
  s.classes = static_cast<int>(class_names.size());
  return s;
}

void ExperimentConfig::validate() const {
  if (class_names.empty()) throw ValidationError("data.classes must name at least one class");
  if (static_cast<int>(class_names.size()) > kMaxClasses) throw ValidationError("data.classes: at most 64 classes");
  { ClassMap check(class_names); }
  if (sample_rate <= 0) throw ValidationError("data.sample_rate must be > 0");
  if (features.window <= 0 || features.hop <= 0) throw ValidationError("features.window and features.hop must be > 0");
  if (features.mel_bands < 0) throw ValidationError("features.mel_bands must be >= 0");
  if (n_seeds < 1) throw ValidationError("train.seeds must be >= 1");
  if (jobs < 1 || synth.jobs < 1) throw ValidationError("jobs must be >= 1");
  if (eval.median_window < 1 || eval.median_window % 2 == 0)
    throw ValidationError("eval.median_window must be odd and >= 1");
  if (!(eval.segment_length > 0.0)) throw ValidationError("eval.segment_length must be > 0");
  if (model.kernel < 1 || model.kernel % 2 == 0) throw ValidationError("model.kernel must be odd and >= 1");
  if (model.proj_dim < 1) throw ValidationError("model.proj_dim must be >= 1");
  if (model.channels.empty() || model.channels.size() != model.freq_pool.size())
    throw ValidationError("model.channels and model.freq_pool must have the same nonzero length");
  model_shape().bins_per_block();
  train.validate();
  SoundscapeSpec spec = synth.spec;
  validate_soundscape(spec, templates());
}

std::string config_help() {
  std::ostringstream os;
  os << "Config keys (file sections [a] hold keys a.*; defaults in brackets):\n";
  std::size_t width = 0;
  for (const auto& k : config_keys()) width = std::max(width, k.key.size());
  for (const auto& k : config_keys()) {
    os << "  " << k.key << std::string(width - k.key.size() + 2, ' ') << k.help << " [" << k.default_value
       << "]\n";
  }
  return os.str();
}

}  // namespace sedfpd
