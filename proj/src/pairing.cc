// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#include "sedfpd/pairing.h"

#include <algorithm>

#include "sedfpd/error.h"
#include "sedfpd/rng.h"

namespace sedfpd {

namespace {

// With background_as_class, a silent frame carries a background marker
// instead of being empty.
struct FrameTags {
  TagMask mask;
  bool background;

  bool empty() const { return mask == 0 && !background; }
  bool operator==(const FrameTags&) const = default;
  bool disjoint(const FrameTags& o) const { return (mask & o.mask) == 0 && !(background && o.background); }
};

FrameTags frame_tags(TagMask m, const PairingOptions& opts) {
  return {m, opts.background_as_class && m == 0};
}

}  // namespace

ClipCase classify_clip_pair(TagMask tags_i, TagMask tags_j) {
  if (tags_i == 0 || tags_j == 0) return ClipCase::Ignored;
  if (tags_i == tags_j) return ClipCase::Matching;
  if ((tags_i & tags_j) == 0) return ClipCase::Disjoint;
  return ClipCase::Ignored;
}

std::vector<ClipPair> enumerate_clip_pairs(std::span<const TagMask> batch_tags) {
  const int n = static_cast<int>(batch_tags.size());
  std::vector<ClipPair> out;
  if (n < 2) return out;
  out.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.push_back({i, j, classify_clip_pair(batch_tags[i], batch_tags[j])});
  return out;
}

PairCase classify_frame_pair(ClipCase clip_case, TagMask ftags_i, TagMask ftags_j, bool certain_i,
                             bool certain_j, const PairingOptions& opts) {
  if (!certain_i || !certain_j || clip_case == ClipCase::Ignored) return PairCase::Ignored;
  const FrameTags a = frame_tags(ftags_i, opts), b = frame_tags(ftags_j, opts);
  if (a.empty() || b.empty()) return PairCase::Ignored;
  if (clip_case == ClipCase::Matching) return a == b ? PairCase::Positive : PairCase::Ignored;
  // Disjoint clips: frame tags are subsets of disjoint clip tags, so they
  // differ; the explicit check only matters for background frames.
  return a.disjoint(b) ? PairCase::Negative : PairCase::Ignored;
}

std::vector<FramePair> build_frame_pairs(std::span<const FrameTagGrid> grids,
                                         std::span<const ClipPair> clip_pairs,
                                         const PairingOptions& opts) {
  std::vector<FramePair> out;
  for (const auto& cp : clip_pairs) {
    if (cp.clip_case == ClipCase::Ignored) continue;
    if (cp.i < 0 || cp.j < 0 || cp.i >= static_cast<int>(grids.size()) ||
        cp.j >= static_cast<int>(grids.size()))
      throw ValidationError("build_frame_pairs: clip index outside batch");
    const auto& gi = grids[cp.i];
    const auto& gj = grids[cp.j];
    const int frames = std::min(gi.frames, gj.frames);
    for (int t = 0; t < frames; ++t) {
      const PairCase pc = classify_frame_pair(cp.clip_case, gi.tags(t), gj.tags(t), gi.is_certain(t),
                                              gj.is_certain(t), opts);
      if (pc != PairCase::Ignored) out.push_back({cp.i, cp.j, t, pc});
    }
  }
  return out;
}

PairCounts count_frame_cases(std::span<const FrameTagGrid> grids, std::span<const ClipPair> clip_pairs,
                             const PairingOptions& opts) {
  PairCounts c;
  for (const auto& cp : clip_pairs) {
    const auto& gi = grids[cp.i];
    const auto& gj = grids[cp.j];
    const int frames = std::min(gi.frames, gj.frames);
    for (int t = 0; t < frames; ++t) {
      switch (classify_frame_pair(cp.clip_case, gi.tags(t), gj.tags(t), gi.is_certain(t),
                                  gj.is_certain(t), opts)) {
        case PairCase::Positive: ++c.positive; break;
        case PairCase::Negative: ++c.negative; break;
        case PairCase::Ignored: ++c.ignored; break;
      }
    }
  }
  return c;
}

std::vector<FramePair> cap_pairs_per_case(const std::vector<FramePair>& pairs, long cap,
                                          std::uint64_t seed) {
  if (cap < 0) return pairs;
  std::vector<std::size_t> pos, neg;
  for (std::size_t k = 0; k < pairs.size(); ++k)
    (pairs[k].pair_case == PairCase::Positive ? pos : neg).push_back(k);
  Rng rng(seed);
  auto pick = [&](std::vector<std::size_t>& idx) {
    if (static_cast<long>(idx.size()) <= cap) return;
    // Partial Fisher-Yates: the first `cap` slots become a uniform sample.
    for (long k = 0; k < cap; ++k) {
      const long r = rng.uniform_int(k, static_cast<long>(idx.size()) - 1);
      std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(r)]);
    }
    idx.resize(static_cast<std::size_t>(cap));
  };
  pick(pos);
  pick(neg);
  std::vector<std::size_t> keep;
  keep.reserve(pos.size() + neg.size());
  keep.insert(keep.end(), pos.begin(), pos.end());
  keep.insert(keep.end(), neg.begin(), neg.end());
  std::sort(keep.begin(), keep.end());
  std::vector<FramePair> out;
  out.reserve(keep.size());
  for (std::size_t k : keep) out.push_back(pairs[k]);
  return out;
}

}  // namespace sedfpd
