// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#include "sedfpd/synthgen.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "sedfpd/error.h"
#include "sedfpd/labels.h"
#include "sedfpd/parallel.h"
#include "sedfpd/rng.h"

namespace sedfpd {

namespace {

constexpr double kFadeSeconds = 0.010;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_tonal(TemplateKind k) { return k != TemplateKind::NoiseBurst; }

double rms(const double* x, long n) {
  if (n <= 0) return 0.0;
  double s = 0.0;
  for (long i = 0; i < n; ++i) s += x[i] * x[i];
  return std::sqrt(s / static_cast<double>(n));
}

// Placement grid in samples: 1 ms when the rate is a multiple of 1000.
long time_quantum(int rate) { return rate % 1000 == 0 ? rate / 1000 : 1; }

// RBJ constant-peak band-pass biquad.
void bandpass(std::vector<double>& x, double centre, double q, int rate) {
  const double w0 = kTwoPi * centre / rate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  const double b0 = alpha / a0, b2 = -alpha / a0;
  const double a1 = -2.0 * std::cos(w0) / a0, a2 = (1.0 - alpha) / a0;
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
  for (double& v : x) {
    const double y = b0 * v + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = v;
    y2 = y1;
    y1 = y;
    v = y;
  }
}

}  // namespace

std::string template_kind_name(TemplateKind k) {
  switch (k) {
    case TemplateKind::Tone: return "tone";
    case TemplateKind::Chirp: return "chirp";
    case TemplateKind::NoiseBurst: return "noise_burst";
    case TemplateKind::AmTone: return "am_tone";
  }
  return "tone";
}

TemplateKind parse_template_kind(const std::string& s) {
  if (s == "tone") return TemplateKind::Tone;
  if (s == "chirp") return TemplateKind::Chirp;
  if (s == "noise_burst") return TemplateKind::NoiseBurst;
  if (s == "am_tone") return TemplateKind::AmTone;
  throw ValidationError("unknown template kind '" + s + "'");
}

void validate_soundscape(const SoundscapeSpec& spec, const std::vector<EventTemplateSpec>& templates) {
  if (!(spec.clip_duration > 0.0)) throw ValidationError("clip_duration must be > 0");
  if (spec.min_events < 0 || spec.max_events < spec.min_events)
    throw ValidationError("events_per_clip range requires 0 <= min <= max");
  double total = 0.0;
  for (double p : spec.class_distribution) {
    if (p < 0.0) throw ValidationError("class probabilities must be >= 0");
    total += p;
  }
  if (spec.max_events > 0 && std::abs(total - 1.0) > 1e-9)
    throw ValidationError("class probabilities must sum to 1");
  for (const auto& t : templates) {
    if (!(t.min_duration > 0.0) || t.max_duration < t.min_duration ||
        t.max_duration > spec.clip_duration)
      throw ValidationError("template duration range must lie within (0, clip_duration]");
    if (t.max_snr_db < t.min_snr_db) throw ValidationError("template snr range requires min <= max");
    if (t.cls < 0 || t.cls >= static_cast<int>(spec.class_distribution.size()))
      throw ValidationError("template class index out of range");
  }
  for (std::size_t c = 0; c < spec.class_distribution.size(); ++c) {
    if (spec.class_distribution[c] <= 0.0) continue;
    const bool covered = std::any_of(templates.begin(), templates.end(),
                                     [&](const auto& t) { return t.cls == static_cast<int>(c); });
    if (!covered && spec.max_events > 0)
      throw ValidationError("class " + std::to_string(c) + " has nonzero probability but no template");
  }
}

std::vector<double> synth_event(const EventTemplateSpec& tmpl, double duration, int rate,
                                std::uint64_t seed) {
  if (!(duration >= tmpl.min_duration && duration <= tmpl.max_duration) || !(duration > 0.0))
    throw ValidationError("event duration " + std::to_string(duration) + " s outside template range");
  if (rate <= 0) throw ValidationError("sample rate must be > 0");
  if (is_tonal(tmpl.kind) && !(rate > 2.0 * tmpl.base_freq))
    throw ValidationError("Nyquist violation: base_freq " + std::to_string(tmpl.base_freq) +
                          " Hz at " + std::to_string(rate) + " Hz");
  const long n = std::lround(duration * rate);
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  const double f0 = tmpl.base_freq;
  switch (tmpl.kind) {
    case TemplateKind::Tone:
      for (long i = 0; i < n; ++i) x[i] = std::sin(kTwoPi * f0 * i / rate);
      break;
    case TemplateKind::Chirp: {
      // Linear downward sweep f0 -> f0/2; phase is the integral of frequency.
      const double rate_hz_per_s = -0.5 * f0 / duration;
      for (long i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / rate;
        x[i] = std::sin(kTwoPi * (f0 * t + 0.5 * rate_hz_per_s * t * t));
      }
      break;
    }
    case TemplateKind::AmTone:
      for (long i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / rate;
        x[i] = (0.55 + 0.45 * std::sin(kTwoPi * 6.0 * t)) * std::sin(kTwoPi * f0 * t);
      }
      break;
    case TemplateKind::NoiseBurst: {
      Rng rng(seed);
      for (auto& v : x) v = rng.normal();
      bandpass(x, std::min(f0, 0.45 * rate), 4.0, rate);
      break;
    }
  }
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  if (peak > 0.0)
    for (double& v : x) v /= peak;
  const long fade = std::min<long>(std::lround(kFadeSeconds * rate), n / 2);
  for (long i = 0; i < fade; ++i) {
    const double g = 0.5 - 0.5 * std::cos(std::numbers::pi * (i + 0.5) / fade);
    x[i] *= g;
    x[n - 1 - i] *= g;
  }
  return x;
}

std::vector<PlacedEvent> plan_soundscape(const SoundscapeSpec& spec,
                                         const std::vector<EventTemplateSpec>& templates, int rate,
                                         std::uint64_t seed) {
  validate_soundscape(spec, templates);
  Rng rng(derive_seed(seed, {0x504c414eULL}));
  const long n_samples = std::lround(spec.clip_duration * rate);
  const long q = time_quantum(rate);
  const long n_events = rng.uniform_int(spec.min_events, spec.max_events);
  std::vector<PlacedEvent> events;
  for (long e = 0; e < n_events; ++e) {
    PlacedEvent ev;
    ev.cls = static_cast<int>(rng.categorical(spec.class_distribution));
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < templates.size(); ++i)
      if (templates[i].cls == ev.cls) candidates.push_back(i);
    ev.template_index = candidates[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<long>(candidates.size()) - 1))];
    const auto& t = templates[ev.template_index];
    // Length on the quantum grid, kept inside the template's duration range.
    const long lo = static_cast<long>(std::ceil(t.min_duration * rate / q - 1e-9)) * q;
    const long hi = std::min(static_cast<long>(std::floor(t.max_duration * rate / q + 1e-9)) * q,
                             n_samples / q * q);
    const double dur = rng.uniform(t.min_duration, t.max_duration);
    long len = std::lround(dur * rate / q) * q;
    len = lo <= hi ? std::clamp(len, lo, hi) : std::lround(dur * rate);
    ev.length = len;
    const long slots = (n_samples - len) / q;
    ev.start_sample = rng.uniform_int(0, std::max(0L, slots)) * q;
    ev.snr_db = rng.uniform(t.min_snr_db, t.max_snr_db);
    ev.seed = rng.next_u64();
    events.push_back(ev);
  }
  std::stable_sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
    return a.start_sample < b.start_sample;
  });
  return events;
}

Soundscape generate_soundscape(const SoundscapeSpec& spec,
                               const std::vector<EventTemplateSpec>& templates, int rate,
                               std::uint64_t seed, const std::string& clip_id) {
  const auto plan = plan_soundscape(spec, templates, rate, seed);
  const long n = std::lround(spec.clip_duration * rate);
  Soundscape out;
  out.clip.id = clip_id;
  out.clip.sample_rate = rate;
  out.clip.source = Source::SS;
  auto& x = out.clip.samples;
  x.assign(static_cast<std::size_t>(n), 0.0);

  Rng bg(derive_seed(seed, {0x42474e44ULL}));
  const double bg_rms = std::pow(10.0, spec.background_level_db / 20.0);
  for (auto& v : x) v = bg_rms * bg.normal();
  const std::vector<double> background = x;

  for (const auto& ev : plan) {
    const auto& t = templates[ev.template_index];
    const double dur = static_cast<double>(ev.length) / rate;
    EventTemplateSpec span_tmpl = t;
    span_tmpl.min_duration = std::min(t.min_duration, dur);
    span_tmpl.max_duration = std::max(t.max_duration, dur);
    const auto wave = synth_event(span_tmpl, dur, rate, ev.seed);
    const double window_rms = rms(background.data() + ev.start_sample, ev.length);
    const double ev_rms = rms(wave.data(), static_cast<long>(wave.size()));
    const double ref = window_rms > 0.0 ? window_rms : bg_rms;
    const double gain = ev_rms > 0.0 ? ref * std::pow(10.0, ev.snr_db / 20.0) / ev_rms : 0.0;
    for (std::size_t i = 0; i < wave.size(); ++i) x[ev.start_sample + i] += gain * wave[i];
    out.labels.push_back({clip_id, ev.cls, static_cast<double>(ev.start_sample) / rate,
                          static_cast<double>(ev.start_sample + ev.length) / rate});
  }
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  if (peak > 1.0)
    for (double& v : x) v /= peak;
  return out;
}

DatasetManifest generate_dataset(const DatasetRequest& req, const std::string& out_dir) {
  const ClassMap classes(req.class_names);
  if (static_cast<int>(req.spec.class_distribution.size()) != classes.size())
    throw ValidationError("class_distribution size does not match class list");
  validate_soundscape(req.spec, req.templates);

  namespace fs = std::filesystem;
  const fs::path root(out_dir);
  std::error_code ec;
  if (!fs::exists(root)) {
    fs::create_directory(root, ec);
    if (ec) throw IoError("cannot create output directory " + root.string() + ": " + ec.message());
  }
  const fs::path audio = root / "audio";
  fs::create_directories(audio, ec);
  if (ec) throw IoError("cannot create " + audio.string() + ": " + ec.message());

  std::vector<std::string> ids(req.n_clips);
  std::vector<std::vector<StrongLabel>> labels(req.n_clips);
  parallel_for(req.n_clips, req.jobs, [&](std::size_t i) {
    char name[64];
    std::snprintf(name, sizeof(name), "%s_%05zu.wav", req.prefix.c_str(), i);
    ids[i] = name;
    auto sc = generate_soundscape(req.spec, req.templates, req.sample_rate,
                                  derive_seed(req.seed, {i}), ids[i]);
    write_wav_pcm16((audio / ids[i]).string(), sc.clip.samples, req.sample_rate);
    labels[i] = std::move(sc.labels);
  });

  DatasetManifest m;
  m.class_names = req.class_names;
  m.base_dir = root;
  std::vector<StrongLabel> strong;
  std::vector<WeakLabelRecord> weak;
  for (std::size_t i = 0; i < req.n_clips; ++i) {
    m.entries.push_back({"audio/" + ids[i], req.source, true, req.source == Source::SS});
    strong.insert(strong.end(), labels[i].begin(), labels[i].end());
    // One row per clip, so event-free clips keep an (empty) weak label.
    auto w = weak_from_strong(labels[i]);
    weak.push_back(w.empty() ? WeakLabelRecord{ids[i], {}} : w.front());
  }
  write_strong_labels((root / "strong.tsv").string(), strong, classes);
  write_weak_labels((root / "weak.tsv").string(), weak, classes);
  write_manifest((root / "manifest.jsonl").string(), m);
  return m;
}

std::vector<EventTemplateSpec> default_templates(int classes, double min_duration,
                                                 double max_duration) {
  static constexpr TemplateKind kinds[] = {TemplateKind::Tone, TemplateKind::Chirp,
                                           TemplateKind::NoiseBurst, TemplateKind::AmTone};
  static constexpr double freqs[] = {500.0, 1800.0, 3500.0, 1000.0};
  std::vector<EventTemplateSpec> out;
  for (int c = 0; c < classes; ++c) {
    EventTemplateSpec t;
    t.cls = c;
    t.kind = kinds[c % 4];
    t.base_freq = freqs[c % 4] * (1.0 + 0.37 * (c / 4));
    t.min_duration = min_duration;
    t.max_duration = max_duration;
    t.min_snr_db = 0.0;
    t.max_snr_db = 10.0;
    out.push_back(t);
  }
  return out;
}

}  // namespace sedfpd
