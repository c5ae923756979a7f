// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#include "sedfpd/features.h"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "sedfpd/error.h"

namespace sedfpd {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface
// is. Plans are created once per window length and shared.
class R2cPlanCache {
 public:
  static R2cPlanCache& instance() {
    static R2cPlanCache cache;
    return cache;
  }

  fftw_plan get(int n) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    double* in = fftw_alloc_real(static_cast<std::size_t>(n));
    fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
    fftw_plan p = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(n, p);
    return p;
  }

  ~R2cPlanCache() {
    for (auto& [n, p] : plans_) fftw_destroy_plan(p);
  }

 private:
  std::mutex mu_;
  std::map<int, fftw_plan> plans_;
};

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace

long frame_count(long n_samples, int window, int hop) {
  if (window <= 0 || hop <= 0) throw ValidationError("frame_count: window and hop must be > 0");
  if (n_samples < window) return 0;
  return (n_samples - window) / hop + 1;
}

long feature_frame_for_time(double t_seconds, int hop, int rate) {
  return static_cast<long>(std::floor(t_seconds * rate / hop));
}

std::vector<double> hann_window(int length) {
  std::vector<double> w(static_cast<std::size_t>(length));
  for (int n = 0; n < length; ++n)
    w[static_cast<std::size_t>(n)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / length);
  return w;
}

RowMatrix stft_raw_magnitude(std::span<const double> samples, int window, int hop) {
  const long frames = frame_count(static_cast<long>(samples.size()), window, hop);
  const int bins = window / 2 + 1;
  RowMatrix mag(frames, bins);
  if (frames == 0) return mag;

  const std::vector<double> win = hann_window(window);
  fftw_plan plan = R2cPlanCache::instance().get(window);
  std::vector<double> buf(static_cast<std::size_t>(window));
  std::vector<fftw_complex> spec(static_cast<std::size_t>(bins));
  for (long t = 0; t < frames; ++t) {
    const double* x = samples.data() + t * hop;
    for (int n = 0; n < window; ++n) buf[n] = x[n] * win[n];
    fftw_execute_dft_r2c(plan, buf.data(), spec.data());
    for (int k = 0; k < bins; ++k) mag(t, k) = std::hypot(spec[k][0], spec[k][1]);
  }
  return mag;
}

FeatureGrid stft_magnitude(const Clip& clip, int window, int hop) {
  FeatureGrid g;
  g.values = stft_raw_magnitude(clip.samples, window, hop).array().log1p().matrix();
  g.frame_hop = hop;
  g.frame_window = window;
  g.sample_rate = clip.sample_rate;
  return g;
}

RowMatrix mel_filterbank(int bands, int window, int sample_rate) {
  if (bands <= 0) throw ValidationError("mel_filterbank: bands must be > 0");
  const int bins = window / 2 + 1;
  const double mel_lo = hz_to_mel(0.0);
  const double mel_hi = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edges(static_cast<std::size_t>(bands + 2));
  for (int i = 0; i < bands + 2; ++i)
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (bands + 1));
  RowMatrix fb = RowMatrix::Zero(bands, bins);
  for (int b = 0; b < bands; ++b) {
    const double lo = edges[b], mid = edges[b + 1], hi = edges[b + 2];
    for (int k = 0; k < bins; ++k) {
      const double hz = static_cast<double>(k) * sample_rate / window;
      if (hz > lo && hz < hi)
        fb(b, k) = hz <= mid ? (hz - lo) / (mid - lo) : (hi - hz) / (hi - mid);
    }
  }
  return fb;
}

FeatureGrid extract_features(const Clip& clip, const FeatureConfig& cfg) {
  RowMatrix mag = stft_raw_magnitude(clip.samples, cfg.window, cfg.hop);
  if (cfg.mel_bands > 0) {
    const RowMatrix fb = mel_filterbank(cfg.mel_bands, cfg.window, clip.sample_rate);
    mag = mag * fb.transpose();
  }
  FeatureGrid g;
  g.values = mag.array().log1p().matrix();
  g.frame_hop = cfg.hop;
  g.frame_window = cfg.window;
  g.sample_rate = clip.sample_rate;
  return g;
}

}  // namespace sedfpd
