// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#ifndef SEDFPD_REPORT_H_
#define SEDFPD_REPORT_H_

#include <string>
#include <vector>

#include "sedfpd/train.h"

namespace sedfpd {

/// Per-seed event-based F1 of one system, sorted ascending.
struct SortedCurve {
  std::string system;
  std::vector<double> f1;

  bool operator==(const SortedCurve&) const = default;
};

std::vector<SortedCurve> sorted_curves(const std::vector<RunSummary>& summaries);

/// Columns system,rank,f1 with 1-based ranks; values printed with 17
/// significant digits so that re-reading yields the same doubles.
void write_report_csv(const std::string& path, const std::vector<SortedCurve>& curves);
std::vector<SortedCurve> read_report_csv(const std::string& path);

/// Sorted-F1 line chart, one polyline per system.
std::string render_report_svg(const std::vector<SortedCurve>& curves);

}  // namespace sedfpd

#endif  // SEDFPD_REPORT_H_
