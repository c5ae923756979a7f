// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#ifndef SEDFPD_PAIRING_H_
#define SEDFPD_PAIRING_H_

#include <cstdint>
#include <span>
#include <vector>

#include "sedfpd/labels.h"

namespace sedfpd {

enum class ClipCase { Matching, Disjoint, Ignored };
enum class PairCase { Positive, Negative, Ignored };

struct ClipPair {
  int i = 0;
  int j = 0;
  ClipCase clip_case = ClipCase::Ignored;

  bool operator==(const ClipPair&) const = default;
};

struct FramePair {
  int i = 0;
  int j = 0;
  int t = 0;
  PairCase pair_case = PairCase::Ignored;

  bool operator==(const FramePair&) const = default;
  auto operator<=>(const FramePair&) const = default;
};

struct PairingOptions {
  /// Treat frames with no active class as a "background" class so that
  /// silent frames can form pairs. Off by default.
  bool background_as_class = false;
};

/// Matching: equal nonempty tag sets. Disjoint: both nonempty with empty
/// intersection. Everything else (partial overlap, any empty set) is Ignored.
ClipCase classify_clip_pair(TagMask tags_i, TagMask tags_j);

/// All i < j pairs in lexicographic order.
std::vector<ClipPair> enumerate_clip_pairs(std::span<const TagMask> batch_tags);

/// Frame-level case for two same-timestamp frames of a clip pair.
PairCase classify_frame_pair(ClipCase clip_case, TagMask ftags_i, TagMask ftags_j, bool certain_i,
                             bool certain_j, const PairingOptions& opts = {});

/// Non-Ignored frame pairs of every non-Ignored clip pair, ordered by
/// (clip pair, t).
std::vector<FramePair> build_frame_pairs(std::span<const FrameTagGrid> grids,
                                         std::span<const ClipPair> clip_pairs,
                                         const PairingOptions& opts = {});

struct PairCounts {
  long positive = 0;
  long negative = 0;
  long ignored = 0;
};

/// Counts every candidate (i, j, t) with t < min(T_i, T_j) over all clip
/// pairs, including those of Ignored clip pairs.
PairCounts count_frame_cases(std::span<const FrameTagGrid> grids, std::span<const ClipPair> clip_pairs,
                             const PairingOptions& opts = {});

/// Keeps at most `cap` pairs per case, subsampled without replacement by
/// `seed`; relative order is preserved. cap < 0 disables the limit.
std::vector<FramePair> cap_pairs_per_case(const std::vector<FramePair>& pairs, long cap,
                                          std::uint64_t seed);

}  // namespace sedfpd

#endif  // SEDFPD_PAIRING_H_
