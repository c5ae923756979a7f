// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#include "sedfpd/eval.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "sedfpd/error.h"

namespace sedfpd {

namespace {

struct ClassCounts {
  long tp = 0, fp = 0, fn = 0;
};

using PerClass = std::map<int, ClassCounts>;

F1Report finish(const PerClass& per_class, const ScoringOptions& opts, Granularity g) {
  long tp = 0, fp = 0, fn = 0;
  for (const auto& [c, k] : per_class) {
    tp += k.tp;
    fp += k.fp;
    fn += k.fn;
  }
  F1Report r = make_report(tp, fp, fn, g);
  if (opts.averaging == Averaging::Macro) {
    std::set<int> classes;
    if (opts.n_classes > 0) {
      for (int c = 0; c < opts.n_classes; ++c) classes.insert(c);
    } else {
      for (const auto& [c, k] : per_class) classes.insert(c);
    }
    double p = 0.0, rc = 0.0, f = 0.0;
    for (int c : classes) {
      auto it = per_class.find(c);
      const ClassCounts k = it == per_class.end() ? ClassCounts{} : it->second;
      const F1Report cr = make_report(k.tp, k.fp, k.fn, g);
      p += cr.precision;
      rc += cr.recall;
      f += cr.f1;
    }
    const double n = classes.empty() ? 1.0 : static_cast<double>(classes.size());
    r.precision = p / n;
    r.recall = rc / n;
    r.f1 = f / n;
  }
  return r;
}

std::map<std::string, std::vector<const StrongLabel*>> group_by_clip(const std::vector<StrongLabel>& ls) {
  std::map<std::string, std::vector<const StrongLabel*>> out;
  for (const auto& l : ls) out[l.clip_id].push_back(&l);
  return out;
}

bool overlaps_segment(const StrongLabel& e, long k, double len) {
  return e.onset < static_cast<double>(k + 1) * len && e.offset > static_cast<double>(k) * len;
}

}  // namespace

std::string granularity_name(Granularity g) {
  switch (g) {
    case Granularity::Event: return "event";
    case Granularity::Segment: return "segment";
    case Granularity::Tag: return "tagging";
  }
  return "event";
}

F1Report make_report(long tp, long fp, long fn, Granularity g) {
  F1Report r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.granularity = g;
  r.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  r.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  const double pr = r.precision + r.recall;
  r.f1 = pr > 0.0 ? 2.0 * r.precision * r.recall / pr : 0.0;
  return r;
}

std::vector<StrongLabel> decode_events(const std::string& clip_id, const RowMatrix& frame_probs,
                                       double threshold, int median_window, int hop, int rate) {
  if (median_window < 1 || median_window % 2 == 0)
    throw ValidationError("decode_events: median window must be odd and >= 1");
  const int frames = static_cast<int>(frame_probs.rows());
  const int half = median_window / 2;
  std::vector<StrongLabel> out;
  std::vector<int> bin(static_cast<std::size_t>(frames)), smooth(static_cast<std::size_t>(frames));
  for (int c = 0; c < frame_probs.cols(); ++c) {
    for (int t = 0; t < frames; ++t) bin[t] = frame_probs(t, c) >= threshold ? 1 : 0;
    // Median of a binary window = majority vote; out-of-range frames count as 0.
    for (int t = 0; t < frames; ++t) {
      int ones = 0;
      for (int u = std::max(0, t - half); u <= std::min(frames - 1, t + half); ++u) ones += bin[u];
      smooth[t] = ones > half ? 1 : 0;
    }
    for (int t = 0; t < frames;) {
      if (!smooth[t]) {
        ++t;
        continue;
      }
      int end = t;
      while (end + 1 < frames && smooth[end + 1]) ++end;
      out.push_back({clip_id, c, static_cast<double>(t) * hop / rate,
                     static_cast<double>(end + 1) * hop / rate});
      t = end + 1;
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.onset != b.onset ? a.onset < b.onset : a.cls < b.cls;
  });
  return out;
}

F1Report event_based_f1(const std::vector<StrongLabel>& ref, const std::vector<StrongLabel>& est,
                        const EventCollars& collars, const ScoringOptions& opts) {
  PerClass counts;
  const auto ref_by_clip = group_by_clip(ref);
  const auto est_by_clip = group_by_clip(est);
  for (const auto& [clip, refs] : ref_by_clip)
    for (const auto* r : refs) ++counts[r->cls].fn;
  for (const auto& [clip, ests] : est_by_clip)
    for (const auto* e : ests) ++counts[e->cls].fp;

  for (const auto& [clip, ests_unsorted] : est_by_clip) {
    auto rit = ref_by_clip.find(clip);
    if (rit == ref_by_clip.end()) continue;
    std::vector<const StrongLabel*> refs = rit->second;
    std::stable_sort(refs.begin(), refs.end(), [](const auto* a, const auto* b) {
      return a->onset != b->onset ? a->onset < b->onset : a->offset < b->offset;
    });
    std::vector<const StrongLabel*> ests = ests_unsorted;
    std::stable_sort(ests.begin(), ests.end(), [](const auto* a, const auto* b) {
      if (a->onset != b->onset) return a->onset < b->onset;
      if (a->cls != b->cls) return a->cls < b->cls;
      return a->offset < b->offset;
    });
    std::vector<char> used(refs.size(), 0);
    for (const auto* e : ests) {
      for (std::size_t k = 0; k < refs.size(); ++k) {
        const auto* r = refs[k];
        if (used[k] || r->cls != e->cls) continue;
        if (std::abs(e->onset - r->onset) > collars.onset) continue;
        const double off_collar =
            std::max(collars.offset_floor, collars.offset_ratio * (r->offset - r->onset));
        if (std::abs(e->offset - r->offset) > off_collar) continue;
        used[k] = 1;
        auto& c = counts[e->cls];
        ++c.tp;
        --c.fp;
        --c.fn;
        break;
      }
    }
  }
  return finish(counts, opts, Granularity::Event);
}

F1Report segment_based_f1(const std::vector<StrongLabel>& ref, const std::vector<StrongLabel>& est,
                          double segment_length, const ScoringOptions& opts,
                          const std::map<std::string, double>& clip_durations) {
  if (!(segment_length > 0.0)) throw ValidationError("segment_length must be > 0");
  const auto ref_by_clip = group_by_clip(ref);
  const auto est_by_clip = group_by_clip(est);
  std::set<std::string> clips;
  for (const auto& [c, v] : ref_by_clip) clips.insert(c);
  for (const auto& [c, v] : est_by_clip) clips.insert(c);
  static const std::vector<const StrongLabel*> kNone;

  PerClass counts;
  for (const auto& clip : clips) {
    auto rit = ref_by_clip.find(clip);
    auto eit = est_by_clip.find(clip);
    const auto& refs = rit == ref_by_clip.end() ? kNone : rit->second;
    const auto& ests = eit == est_by_clip.end() ? kNone : eit->second;
    double horizon = 0.0;
    for (const auto* e : refs) horizon = std::max(horizon, e->offset);
    for (const auto* e : ests) horizon = std::max(horizon, e->offset);
    if (auto d = clip_durations.find(clip); d != clip_durations.end())
      horizon = std::max(horizon, d->second);
    const long n_seg = static_cast<long>(std::ceil(horizon / segment_length));

    // (segment, class) activity bit sets: bit 0 = ref, bit 1 = est.
    std::map<std::pair<long, int>, int> cells;
    auto mark = [&](const std::vector<const StrongLabel*>& events, int bit) {
      for (const auto* e : events) {
        long first = std::max(0L, static_cast<long>(std::floor(e->onset / segment_length)) - 1);
        while (first < n_seg && !overlaps_segment(*e, first, segment_length)) ++first;
        for (long k = first; k < n_seg && overlaps_segment(*e, k, segment_length); ++k)
          cells[{k, e->cls}] |= bit;
      }
    };
    mark(refs, 1);
    mark(ests, 2);
    for (const auto& [key, bits] : cells) {
      auto& c = counts[key.second];
      if (bits == 3)
        ++c.tp;
      else if (bits == 2)
        ++c.fp;
      else
        ++c.fn;
    }
  }
  return finish(counts, opts, Granularity::Segment);
}

F1Report tagging_f1(const std::vector<WeakLabelRecord>& ref, const std::vector<WeakLabelRecord>& est,
                    const ScoringOptions& opts) {
  std::map<std::string, std::set<int>> r, e;
  for (const auto& rec : ref) r[rec.clip_id].insert(rec.classes.begin(), rec.classes.end());
  for (const auto& rec : est) e[rec.clip_id].insert(rec.classes.begin(), rec.classes.end());
  if (r.size() != e.size() ||
      !std::equal(r.begin(), r.end(), e.begin(), [](const auto& a, const auto& b) { return a.first == b.first; }))
    throw ValidationError("tagging_f1: reference and estimate cover different clip ids");
  PerClass counts;
  for (const auto& [clip, rs] : r) {
    const auto& es = e.at(clip);
    for (int c : rs) {
      if (es.count(c))
        ++counts[c].tp;
      else
        ++counts[c].fn;
    }
    for (int c : es)
      if (!rs.count(c)) ++counts[c].fp;
  }
  return finish(counts, opts, Granularity::Tag);
}

}  // namespace sedfpd
