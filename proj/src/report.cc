// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#include "sedfpd/report.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "sedfpd/error.h"

namespace sedfpd {

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<SortedCurve> sorted_curves(const std::vector<RunSummary>& summaries) {
  std::vector<SortedCurve> out;
  for (const auto& s : summaries) {
    if (s.records.empty()) throw ValidationError("summary for '" + s.system + "' has no records");
    SortedCurve c{s.system, {}};
    for (const auto& r : s.records) c.f1.push_back(r.event_f1);
    std::sort(c.f1.begin(), c.f1.end());
    out.push_back(std::move(c));
  }
  return out;
}

void write_report_csv(const std::string& path, const std::vector<SortedCurve>& curves) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "system,rank,f1\n";
  for (const auto& c : curves)
    for (std::size_t k = 0; k < c.f1.size(); ++k) out << c.system << ',' << k + 1 << ',' << g17(c.f1[k]) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

std::vector<SortedCurve> read_report_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<SortedCurve> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line == "system,rank,f1") continue;
    if (line.empty()) continue;
    const auto a = line.find(',');
    const auto b = a == std::string::npos ? a : line.find(',', a + 1);
    if (b == std::string::npos) throw ParseError(path, line_no, "expected system,rank,f1");
    const std::string system = line.substr(0, a);
    std::size_t used = 0;
    long rank = 0;
    double f1 = 0.0;
    try {
      rank = std::stol(line.substr(a + 1, b - a - 1), &used);
      f1 = std::stod(line.substr(b + 1));
    } catch (const std::exception&) {
      throw ParseError(path, line_no, "non-numeric rank or f1");
    }
    if (out.empty() || out.back().system != system) out.push_back({system, {}});
    if (rank != static_cast<long>(out.back().f1.size()) + 1)
      throw ParseError(path, line_no, "ranks must run 1..n per system");
    out.back().f1.push_back(f1);
  }
  return out;
}

std::string render_report_svg(const std::vector<SortedCurve>& curves) {
  static const char* kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  const double w = 640, h = 400, left = 60, right = 160, top = 30, bottom = 50;
  const double pw = w - left - right, ph = h - top - bottom;
  std::size_t max_n = 1;
  double lo = 1.0, hi = 0.0;
  for (const auto& c : curves) {
    max_n = std::max(max_n, c.f1.size());
    for (double v : c.f1) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (lo > hi) lo = 0.0, hi = 1.0;
  if (hi - lo < 1e-3) lo -= 0.01, hi += 0.01;
  auto px = [&](std::size_t rank) {
    return max_n <= 1 ? left + pw / 2 : left + pw * static_cast<double>(rank - 1) / static_cast<double>(max_n - 1);
  };
  auto py = [&](double v) { return top + ph * (1.0 - (v - lo) / (hi - lo)); };

  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" viewBox=\"0 0 %g %g\">\n", w, h,
                w, h);
  os << buf;
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<g stroke=\"black\" fill=\"none\"><line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\"/>"
                "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\"/></g>\n",
                left, top + ph, left + pw, top + ph, left, top, left, top + ph);
  os << buf;
  std::snprintf(buf, sizeof buf,
                "<g font-family=\"sans-serif\" font-size=\"11\"><text x=\"%g\" y=\"%g\" text-anchor=\"middle\">"
                "run rank (sorted by event-based F1)</text>",
                left + pw / 2, h - 12);
  os << buf;
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"end\">%.3f</text>", left - 6, py(v) + 4, v);
    os << buf;
  }
  os << "</g>\n";
  for (std::size_t s = 0; s < curves.size(); ++s) {
    const auto& c = curves[s];
    const char* colour = kColours[s % (sizeof kColours / sizeof *kColours)];
    os << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << colour << "\" data-system=\""
       << xml_escape(c.system) << "\" data-f1=\"";
    for (std::size_t k = 0; k < c.f1.size(); ++k) os << (k ? " " : "") << g17(c.f1[k]);
    os << "\" points=\"";
    for (std::size_t k = 0; k < c.f1.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", k ? " " : "", px(k + 1), py(c.f1[k]));
      os << buf;
    }
    os << "\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" font-size=\"12\" fill=\"%s\">", left + pw + 12,
                  top + 16.0 * static_cast<double>(s + 1), colour);
    os << buf << xml_escape(c.system) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace sedfpd
