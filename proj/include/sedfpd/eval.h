// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#ifndef SEDFPD_EVAL_H_
#define SEDFPD_EVAL_H_

#include <map>
#include <string>
#include <vector>

#include "sedfpd/dataio.h"
#include "sedfpd/features.h"

namespace sedfpd {

enum class Granularity { Event, Segment, Tag };
enum class Averaging { Micro, Macro };

std::string granularity_name(Granularity g);

struct F1Report {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  Granularity granularity = Granularity::Event;
};

/// Precision, recall and F1 from counts; every 0/0 is defined as 0.
F1Report make_report(long tp, long fp, long fn, Granularity g);

struct EventCollars {
  double onset = 0.2;
  double offset_floor = 0.2;
  double offset_ratio = 0.2;
};

struct ScoringOptions {
  Averaging averaging = Averaging::Micro;
  /// Classes for macro averaging; 0 means the classes that occur in ref or est.
  int n_classes = 0;
};

/// Binarise each class at `threshold`, smooth with a zero-padded median
/// filter, emit one event per maximal run: [start*hop/rate, (end+1)*hop/rate).
/// Output is sorted by (onset, class).
std::vector<StrongLabel> decode_events(const std::string& clip_id, const RowMatrix& frame_probs,
                                       double threshold, int median_window, int hop, int rate);

/// Per clip, estimated events in (onset, class, offset, input order) take
/// the earliest-onset unmatched reference of the same class within the
/// collars: |onset diff| <= onset, |offset diff| <= max(offset_floor,
/// offset_ratio * ref duration).
F1Report event_based_f1(const std::vector<StrongLabel>& ref, const std::vector<StrongLabel>& est,
                        const EventCollars& collars = {}, const ScoringOptions& opts = {});

/// Per clip the timeline [0, n * L) is cut into segments of length L, n
/// covering the latest offset (or the clip duration when given). A (segment,
/// class) cell is active if some event of that class overlaps it.
F1Report segment_based_f1(const std::vector<StrongLabel>& ref, const std::vector<StrongLabel>& est,
                          double segment_length = 1.0, const ScoringOptions& opts = {},
                          const std::map<std::string, double>& clip_durations = {});

/// Micro-averaged over (clip, class); clip id sets must agree.
F1Report tagging_f1(const std::vector<WeakLabelRecord>& ref, const std::vector<WeakLabelRecord>& est,
                    const ScoringOptions& opts = {});

}  // namespace sedfpd

#endif  // SEDFPD_EVAL_H_
