// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#ifndef SEDFPD_LABELS_H_
#define SEDFPD_LABELS_H_

#include <cstdint>
#include <set>
#include <vector>

#include "sedfpd/dataio.h"
#include "sedfpd/features.h"

namespace sedfpd {

/// Class set as a bit mask; bit c set iff class c present. Limits C to 64.
using TagMask = std::uint64_t;
constexpr int kMaxClasses = 64;

TagMask to_mask(const std::set<int>& classes);
std::set<int> from_mask(TagMask mask);

/// Per-frame multi-hot activity plus a per-frame certainty flag. A frame
/// with certain == false is excluded from pairing.
struct FrameTagGrid {
  int frames = 0;
  int classes = 0;
  std::vector<std::uint8_t> active;   // frames * classes, row-major
  std::vector<std::uint8_t> certain;  // frames

  FrameTagGrid() = default;
  FrameTagGrid(int t, int c, bool all_certain)
      : frames(t),
        classes(c),
        active(static_cast<std::size_t>(t) * c, 0),
        certain(static_cast<std::size_t>(t), all_certain ? 1 : 0) {}

  bool is_active(int t, int c) const { return active[static_cast<std::size_t>(t) * classes + c] != 0; }
  void set_active(int t, int c, bool v) { active[static_cast<std::size_t>(t) * classes + c] = v ? 1 : 0; }
  bool is_certain(int t) const { return certain[static_cast<std::size_t>(t)] != 0; }
  TagMask tags(int t) const;

  bool operator==(const FrameTagGrid&) const = default;
};

/// Union of classes of the clip's events. One record per distinct clip id,
/// in order of first appearance.
std::vector<WeakLabelRecord> weak_from_strong(const std::vector<StrongLabel>& strong);

/// Frame t is active for class c iff its start time t*hop/rate lies in
/// [onset, offset) of some class-c event. Every frame is certain.
/// Labels of other clips must be filtered out by the caller.
FrameTagGrid strong_to_frame_grid(const std::vector<StrongLabel>& strong, int frames, int classes,
                                  int hop, int rate);

/// Pseudo-strong labels from frame probabilities (T x C): active iff
/// p >= tau_pos; a frame is certain iff no class falls strictly inside
/// (tau_neg, tau_pos).
FrameTagGrid wps_from_probs(const RowMatrix& frame_probs, double tau_pos, double tau_neg);

/// Clears activity of classes outside the clip's weak label set.
FrameTagGrid restrict_wps_to_weak(const FrameTagGrid& grid, const WeakLabelRecord& weak);

}  // namespace sedfpd

#endif  // SEDFPD_LABELS_H_
