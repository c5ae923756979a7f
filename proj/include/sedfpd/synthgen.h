// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#ifndef SEDFPD_SYNTHGEN_H_
#define SEDFPD_SYNTHGEN_H_

#include <cstdint>
#include <string>
#include <vector>

#include "sedfpd/dataio.h"

namespace sedfpd {

enum class TemplateKind { Tone, Chirp, NoiseBurst, AmTone };

std::string template_kind_name(TemplateKind k);
TemplateKind parse_template_kind(const std::string& s);

/// A parametric foreground event. Tonal kinds (tone, chirp, am_tone) need
/// rate > 2 * base_freq; for noise_burst base_freq is the band centre.
struct EventTemplateSpec {
  int cls = 0;
  TemplateKind kind = TemplateKind::Tone;
  double base_freq = 440.0;
  double min_duration = 0.5;
  double max_duration = 2.0;
  double min_snr_db = 0.0;
  double max_snr_db = 10.0;
};

struct SoundscapeSpec {
  double clip_duration = 10.0;
  int min_events = 1;
  int max_events = 5;
  /// Background noise RMS in dB relative to full scale.
  double background_level_db = -40.0;
  /// Probability of each class for a placed event; must sum to 1.
  std::vector<double> class_distribution;
};

/// Throws ValidationError when templates and spec are inconsistent.
void validate_soundscape(const SoundscapeSpec& spec, const std::vector<EventTemplateSpec>& templates);

/// Renders round(duration * rate) samples, peak-normalised to 1, with a
/// 10 ms raised-cosine fade at both ends.
std::vector<double> synth_event(const EventTemplateSpec& tmpl, double duration, int rate,
                                std::uint64_t seed);

struct PlacedEvent {
  std::size_t template_index = 0;
  int cls = 0;
  long start_sample = 0;
  long length = 0;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
};

/// Event placement only (no audio), sorted by start sample. Onsets and
/// lengths sit on a 1 ms grid when the rate allows it so that labels
/// serialise exactly.
std::vector<PlacedEvent> plan_soundscape(const SoundscapeSpec& spec,
                                         const std::vector<EventTemplateSpec>& templates, int rate,
                                         std::uint64_t seed);

struct Soundscape {
  Clip clip;
  std::vector<StrongLabel> labels;
};

Soundscape generate_soundscape(const SoundscapeSpec& spec,
                               const std::vector<EventTemplateSpec>& templates, int rate,
                               std::uint64_t seed, const std::string& clip_id = "clip.wav");

struct DatasetRequest {
  SoundscapeSpec spec;
  std::vector<EventTemplateSpec> templates;
  std::vector<std::string> class_names;
  int sample_rate = 16000;
  std::size_t n_clips = 0;
  Source source = Source::SS;
  std::string prefix = "clip";
  std::uint64_t seed = 0;
  int jobs = 1;
};

/// Writes audio/<prefix>_NNNNN.wav, strong.tsv, weak.tsv and manifest.jsonl
/// into out_dir (created if its parent exists). RW datasets are marked
/// strong=false in the manifest; strong.tsv still records ground truth.
DatasetManifest generate_dataset(const DatasetRequest& req, const std::string& out_dir);

/// Four-class parametric template set used by the toy experiments.
std::vector<EventTemplateSpec> default_templates(int classes, double min_duration = 0.5,
                                                 double max_duration = 2.0);

}  // namespace sedfpd

#endif  // SEDFPD_SYNTHGEN_H_
