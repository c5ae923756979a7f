// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#ifndef SEDFPD_FEATURES_H_
#define SEDFPD_FEATURES_H_

#include <span>

#include <Eigen/Dense>

#include "sedfpd/dataio.h"

namespace sedfpd {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct FeatureConfig {
  int window = 2048;
  int hop = 255;
  /// 0 disables the mel stage (plain log-magnitude STFT bins).
  int mel_bands = 0;
};

/// T frames x F bins.
struct FeatureGrid {
  RowMatrix values;
  int frame_hop = 0;
  int frame_window = 0;
  int sample_rate = 0;

  int frames() const { return static_cast<int>(values.rows()); }
  int bins() const { return static_cast<int>(values.cols()); }
};

/// floor((n - window) / hop) + 1 when n >= window, else 0.
long frame_count(long n_samples, int window, int hop);

/// Index of the frame whose start time t falls into: floor(t * rate / hop).
long feature_frame_for_time(double t_seconds, int hop, int rate);

inline double frame_start_time(long frame, int hop, int rate) {
  return static_cast<double>(frame) * hop / rate;
}

/// Periodic Hann window of the given length.
std::vector<double> hann_window(int length);

/// Raw |STFT| (no log), Hann window, frames fully inside the signal.
/// Result is T x (window/2 + 1).
RowMatrix stft_raw_magnitude(std::span<const double> samples, int window, int hop);

/// log(1 + |STFT|) grid of a clip.
FeatureGrid stft_magnitude(const Clip& clip, int window = 2048, int hop = 255);

/// Triangular mel filterbank (HTK mel scale), bands x (window/2 + 1).
RowMatrix mel_filterbank(int bands, int window, int sample_rate);

/// Applies the configured pipeline: |STFT|, optional mel projection, log(1 + x).
FeatureGrid extract_features(const Clip& clip, const FeatureConfig& cfg);

}  // namespace sedfpd

#endif  // SEDFPD_FEATURES_H_
