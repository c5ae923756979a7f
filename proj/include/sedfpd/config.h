// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#ifndef SEDFPD_CONFIG_H_
#define SEDFPD_CONFIG_H_

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "sedfpd/features.h"
#include "sedfpd/model.h"
#include "sedfpd/synthgen.h"
#include "sedfpd/train.h"

namespace sedfpd {

struct SynthSettings {
  SoundscapeSpec spec;
  std::size_t n_clips = 10;
  Source source = Source::SS;
  std::string prefix = "clip";
  std::uint64_t seed = 0;
  double min_event_duration = 0.5;
  double max_event_duration = 2.0;
  double min_snr_db = 0.0;
  double max_snr_db = 10.0;
  int jobs = 1;
};

struct PathSettings {
  std::string train_manifest;
  std::string eval_manifest;
  std::string out_dir = "runs";
  /// Empty: strong.tsv / weak.tsv next to the manifest.
  std::string train_strong;
  std::string train_weak;
  std::string eval_strong;
  std::string eval_weak;
};

/// Everything a subcommand needs, built from dotted `section.key` values.
struct ExperimentConfig {
  std::vector<std::string> class_names;
  int sample_rate = 16000;
  SynthSettings synth;
  FeatureConfig features;
  ModelShape model;  // in_bins and classes are filled from features/classes
  TrainConfig train;
  int n_seeds = 20;
  int jobs = 1;
  EvalConfig eval;
  PathSettings paths;

  /// Templates for the configured classes (default kinds and frequencies).
  std::vector<EventTemplateSpec> templates() const;
  /// Model shape with in_bins derived from the feature settings.
  ModelShape model_shape() const;
  /// Cross-field checks; throws ValidationError.
  void validate() const;
};

struct ConfigKey {
  std::string key;
  std::string default_value;
  std::string help;
};

/// Every accepted key with its default, in documentation order.
const std::vector<ConfigKey>& config_keys();

/// `[section]` headers and `key = value` lines; '#' and ';' start comments.
/// Keys inside a section become `section.key`. Unknown keys and malformed
/// lines raise ParseError with the line number.
std::map<std::string, std::string> parse_config_text(std::istream& in, const std::string& source_name);
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Applies defaults, then `values`; throws ValidationError on bad values.
ExperimentConfig build_config(const std::map<std::string, std::string>& values);

/// Help text listing every key and its default.
std::string config_help();

}  // namespace sedfpd

#endif  // SEDFPD_CONFIG_H_
