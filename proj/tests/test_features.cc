// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "sedfpd/error.h"
#include "sedfpd/features.h"
#include "test_util.h"

using namespace sedfpd;

namespace {

Clip make_clip(std::vector<double> x, int rate = 16000) {
  Clip c;
  c.id = "t.wav";
  c.samples = std::move(x);
  c.sample_rate = rate;
  return c;
}

std::vector<double> sine(double f, int n, int rate, double amp = 0.5) {
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = amp * std::sin(2.0 * std::numbers::pi * f * i / rate);
  return x;
}

// Textbook O(N^2) DFT magnitude of one Hann-windowed frame.
std::vector<double> dft_magnitude(const std::vector<double>& x, long start, int n) {
  std::vector<double> out(n / 2 + 1);
  for (int k = 0; k <= n / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
      acc += w * x[start + i] * std::polar(1.0, -2.0 * std::numbers::pi * k * i / n);
    }
    out[k] = std::abs(acc);
  }
  return out;
}

}  // namespace

TEST_CASE("frame_count examples") {
  CHECK(frame_count(160000, 2048, 255) == (160000 - 2048) / 255 + 1);
  CHECK(frame_count(160000, 2048, 255) == 620);
  CHECK(frame_count(2048, 2048, 255) == 1);
  CHECK(frame_count(2047, 2048, 255) == 0);
  CHECK(frame_count(0, 2048, 255) == 0);
}

TEST_CASE("STFT frame count matches the formula for random triples") {
  Rng rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const int window = static_cast<int>(rng.uniform_int(2, 64)) * 2;
    const int hop = static_cast<int>(rng.uniform_int(1, 100));
    const long n = rng.uniform_int(0, 600);
    long expect = 0;
    for (long start = 0; start + window <= n; start += hop) ++expect;
    REQUIRE(frame_count(n, window, hop) == expect);
    std::vector<double> x(static_cast<std::size_t>(n), 0.1);
    const RowMatrix m = stft_raw_magnitude(x, window, hop);
    REQUIRE(m.rows() == expect);
    if (expect > 0) REQUIRE(m.cols() == window / 2 + 1);
  }
}

TEST_CASE("frame index for time") {
  CHECK(feature_frame_for_time(0.0, 255, 16000) == 0);
  CHECK(feature_frame_for_time(1.0, 255, 16000) == 16000 / 255);
  CHECK(feature_frame_for_time(1.0, 255, 16000) == 62);
  Rng rng(3);
  double prev_t = 0.0;
  long prev = 0;
  for (int i = 0; i < 2000; ++i) {
    const double t = prev_t + rng.uniform(0.0, 0.01);
    const long k = feature_frame_for_time(t, 255, 16000);
    CHECK(k >= prev);
    CHECK(frame_start_time(k, 255, 16000) <= t + 1e-12);
    prev = k;
    prev_t = t;
  }
}

TEST_CASE("all-zero clip gives an all-zero grid") {
  const auto g = stft_magnitude(make_clip(std::vector<double>(8000, 0.0)));
  CHECK(g.frames() == frame_count(8000, 2048, 255));
  CHECK(g.bins() == 1025);
  CHECK(g.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.frame_hop == 255);
  CHECK(g.frame_window == 2048);
  CHECK(g.sample_rate == 16000);
}

TEST_CASE("1 kHz tone peaks at bin 128 in every frame") {
  const int expected = static_cast<int>(std::lround(1000.0 * 2048 / 16000));
  REQUIRE(expected == 128);
  const auto g = stft_magnitude(make_clip(sine(1000.0, 16000, 16000)));
  REQUIRE(g.frames() > 0);
  for (int t = 0; t < g.frames(); ++t) {
    Eigen::Index arg;
    g.values.row(t).maxCoeff(&arg);
    REQUIRE(arg == expected);
  }
}

TEST_CASE("raw magnitudes match a direct DFT") {
  Rng rng(9);
  std::vector<double> x(600);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  const RowMatrix m = stft_raw_magnitude(x, 64, 37);
  for (int t = 0; t < m.rows(); ++t) {
    const auto ref = dft_magnitude(x, t * 37L, 64);
    for (int k = 0; k <= 32; ++k) REQUIRE(std::abs(m(t, k) - ref[k]) < 1e-9 * (1.0 + ref[k]));
  }
}

TEST_CASE("Parseval on one frame") {
  Rng rng(21);
  std::vector<double> x(2048);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  const RowMatrix m = stft_raw_magnitude(x, 2048, 255);
  REQUIRE(m.rows() == 1);
  const auto w = hann_window(2048);
  double time_energy = 0.0;
  for (int i = 0; i < 2048; ++i) time_energy += (w[i] * x[i]) * (w[i] * x[i]);
  // One-sided spectrum: interior bins count twice, DC and Nyquist once.
  double freq_energy = m(0, 0) * m(0, 0) + m(0, 1024) * m(0, 1024);
  for (int k = 1; k < 1024; ++k) freq_energy += 2.0 * m(0, k) * m(0, k);
  freq_energy /= 2048.0;
  CHECK(std::abs(freq_energy - time_energy) <= 1e-6 * time_energy);
}

TEST_CASE("raw magnitude is scale covariant and log compression is log1p") {
  Rng rng(4);
  std::vector<double> x(5000), y(5000);
  for (int i = 0; i < 5000; ++i) {
    x[i] = rng.uniform(-0.4, 0.4);
    y[i] = 2.0 * x[i];
  }
  const RowMatrix a = stft_raw_magnitude(x, 2048, 255);
  const RowMatrix b = stft_raw_magnitude(y, 2048, 255);
  CHECK((b - 2.0 * a).cwiseAbs().maxCoeff() <= 1e-9 * a.maxCoeff());
  const auto g = stft_magnitude(make_clip(x));
  CHECK((g.values - a.array().log1p().matrix()).cwiseAbs().maxCoeff() < 1e-12);
  const auto g2 = stft_magnitude(make_clip(x));
  CHECK(g.values == g2.values);
}

TEST_CASE("periodic Hann window") {
  const auto w = hann_window(8);
  CHECK(w[0] == 0.0);
  CHECK(std::abs(w[4] - 1.0) < 1e-15);
  CHECK(std::abs(w[2] - 0.5) < 1e-15);
  CHECK(std::abs(w[1] - w[7]) < 1e-15);
}

TEST_CASE("mel stage") {
  const RowMatrix fb = mel_filterbank(32, 2048, 16000);
  CHECK(fb.rows() == 32);
  CHECK(fb.cols() == 1025);
  CHECK(fb.minCoeff() >= 0.0);
  for (int b = 0; b < 32; ++b) CHECK(fb.row(b).sum() > 0.0);
  // Band peaks move up in frequency.
  Eigen::Index prev = -1;
  for (int b = 0; b < 32; ++b) {
    Eigen::Index arg;
    fb.row(b).maxCoeff(&arg);
    CHECK(arg > prev);
    prev = arg;
  }
  CHECK_THROWS_AS(mel_filterbank(0, 2048, 16000), ValidationError);

  FeatureConfig cfg;
  cfg.mel_bands = 32;
  const auto x = sine(1000.0, 16000, 16000);
  const auto g = extract_features(make_clip(x), cfg);
  CHECK(g.bins() == 32);
  CHECK(g.frames() == frame_count(16000, 2048, 255));
  CHECK(g.values.allFinite());
  const RowMatrix raw = stft_raw_magnitude(x, 2048, 255);
  const RowMatrix expect = (raw * fb.transpose()).array().log1p().matrix();
  CHECK((g.values - expect).cwiseAbs().maxCoeff() < 1e-10);
  cfg.mel_bands = 0;
  CHECK(extract_features(make_clip(x), cfg).bins() == 1025);
}
