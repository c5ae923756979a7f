// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#include "sedfpd/labels.h"

#include <cmath>
#include <unordered_map>

#include "sedfpd/error.h"

namespace sedfpd {

TagMask to_mask(const std::set<int>& classes) {
  TagMask m = 0;
  for (int c : classes) {
    if (c < 0 || c >= kMaxClasses) throw ValidationError("class index out of range: " + std::to_string(c));
    m |= TagMask{1} << c;
  }
  return m;
}

std::set<int> from_mask(TagMask mask) {
  std::set<int> out;
  for (int c = 0; c < kMaxClasses; ++c)
    if (mask & (TagMask{1} << c)) out.insert(c);
  return out;
}

TagMask FrameTagGrid::tags(int t) const {
  TagMask m = 0;
  const std::uint8_t* row = active.data() + static_cast<std::size_t>(t) * classes;
  for (int c = 0; c < classes; ++c)
    if (row[c]) m |= TagMask{1} << c;
  return m;
}

std::vector<WeakLabelRecord> weak_from_strong(const std::vector<StrongLabel>& strong) {
  std::vector<WeakLabelRecord> out;
  std::unordered_map<std::string, std::size_t> slot;
  for (const auto& l : strong) {
    auto [it, fresh] = slot.emplace(l.clip_id, out.size());
    if (fresh) out.push_back({l.clip_id, {}});
    out[it->second].classes.insert(l.cls);
  }
  return out;
}

FrameTagGrid strong_to_frame_grid(const std::vector<StrongLabel>& strong, int frames, int classes,
                                  int hop, int rate) {
  if (frames < 0) throw ValidationError("strong_to_frame_grid: negative frame count");
  FrameTagGrid g(frames, classes, true);
  auto starts_before = [&](long t, double time) { return frame_start_time(t, hop, rate) < time; };
  for (const auto& ev : strong) {
    if (ev.cls < 0 || ev.cls >= classes)
      throw ValidationError("strong_to_frame_grid: class index out of range");
    // First frame with start >= onset, then first frame with start >= offset.
    // The float guess is corrected against the exact start-time predicate.
    long first = std::max(0L, static_cast<long>(std::ceil(ev.onset * rate / hop)));
    while (first > 0 && !starts_before(first - 1, ev.onset)) --first;
    while (starts_before(first, ev.onset)) ++first;
    long end = std::max(0L, static_cast<long>(std::ceil(ev.offset * rate / hop)));
    while (end > 0 && !starts_before(end - 1, ev.offset)) --end;
    while (starts_before(end, ev.offset)) ++end;
    end = std::min<long>(end, frames);
    for (long t = first; t < end; ++t) g.set_active(static_cast<int>(t), ev.cls, true);
  }
  return g;
}

FrameTagGrid wps_from_probs(const RowMatrix& frame_probs, double tau_pos, double tau_neg) {
  if (!(0.0 <= tau_neg && tau_neg < tau_pos && tau_pos <= 1.0))
    throw ValidationError("wps thresholds require 0 <= tau_neg < tau_pos <= 1");
  const int frames = static_cast<int>(frame_probs.rows());
  const int classes = static_cast<int>(frame_probs.cols());
  FrameTagGrid g(frames, classes, false);
  for (int t = 0; t < frames; ++t) {
    bool certain = true;
    for (int c = 0; c < classes; ++c) {
      const double p = frame_probs(t, c);
      g.set_active(t, c, p >= tau_pos);
      if (p < tau_pos && p > tau_neg) certain = false;
    }
    g.certain[static_cast<std::size_t>(t)] = certain ? 1 : 0;
  }
  return g;
}

FrameTagGrid restrict_wps_to_weak(const FrameTagGrid& grid, const WeakLabelRecord& weak) {
  FrameTagGrid out = grid;
  for (int c = 0; c < grid.classes; ++c) {
    if (weak.classes.count(c)) continue;
    for (int t = 0; t < grid.frames; ++t) out.set_active(t, c, false);
  }
  return out;
}

}  // namespace sedfpd
