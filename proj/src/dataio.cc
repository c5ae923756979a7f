// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#include "sedfpd/dataio.h"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "sedfpd/error.h"

namespace sedfpd {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::optional<double> parse_time(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* begin = s.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end != begin + s.size() || errno == ERANGE || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string format_time(double t) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", t);
  return buf;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  return out;
}

}  // namespace

std::string source_name(Source s) { return s == Source::SS ? "SS" : "RW"; }

Source parse_source(const std::string& s) {
  if (s == "SS") return Source::SS;
  if (s == "RW") return Source::RW;
  throw ValidationError("unknown source '" + s + "' (expected RW or SS)");
}

ClassMap::ClassMap(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) throw ValidationError("empty class name at position " + std::to_string(i));
    if (!index_.emplace(names_[i], static_cast<int>(i)).second)
      throw ValidationError("duplicate class name '" + names_[i] + "'");
  }
}

std::optional<int> ClassMap::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string clip_id_from_path(const std::string& path) {
  return std::filesystem::path(path).filename().string();
}

std::vector<StrongLabel> parse_strong_labels(std::istream& in, const std::string& source_name,
                                             const ClassMap& classes) {
  std::vector<StrongLabel> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto cols = split(line, '\t');
    if (lineno == 1 && cols[0] == "filename") continue;
    if (cols.size() != 4)
      throw ParseError(source_name, lineno,
                       "expected 4 tab-separated columns, got " + std::to_string(cols.size()));
    const auto onset = parse_time(cols[1]);
    const auto offset = parse_time(cols[2]);
    if (!onset) throw ParseError(source_name, lineno, "non-numeric onset '" + cols[1] + "'");
    if (!offset) throw ParseError(source_name, lineno, "non-numeric offset '" + cols[2] + "'");
    const auto cls = classes.index_of(cols[3]);
    if (!cls) throw ParseError(source_name, lineno, "unknown class '" + cols[3] + "'");
    if (cols[0].empty()) throw ParseError(source_name, lineno, "empty filename");
    if (*onset < 0.0 || *onset >= *offset)
      throw ValidationError(source_name + ":" + std::to_string(lineno) +
                            ": event requires 0 <= onset < offset, got " + cols[1] + " .. " +
                            cols[2]);
    out.push_back({cols[0], *cls, *onset, *offset});
  }
  return out;
}

std::vector<StrongLabel> read_strong_labels(const std::string& path, const ClassMap& classes) {
  auto in = open_in(path);
  return parse_strong_labels(in, path, classes);
}

void write_strong_labels(std::ostream& out, const std::vector<StrongLabel>& labels,
                         const ClassMap& classes) {
  out << "filename\tonset\toffset\tevent_label\n";
  for (const auto& l : labels)
    out << l.clip_id << '\t' << format_time(l.onset) << '\t' << format_time(l.offset) << '\t'
        << classes.name(l.cls) << '\n';
}

void write_strong_labels(const std::string& path, const std::vector<StrongLabel>& labels,
                         const ClassMap& classes) {
  auto out = open_out(path);
  write_strong_labels(out, labels, classes);
  if (!out) throw IoError("write failed: " + path);
}

std::vector<WeakLabelRecord> parse_weak_labels(std::istream& in, const std::string& source_name,
                                               const ClassMap& classes) {
  std::vector<WeakLabelRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto cols = split(line, '\t');
    if (lineno == 1 && cols[0] == "filename") continue;
    if (cols.size() != 2)
      throw ParseError(source_name, lineno,
                       "expected 2 tab-separated columns, got " + std::to_string(cols.size()));
    if (cols[0].empty()) throw ParseError(source_name, lineno, "empty filename");
    WeakLabelRecord rec{cols[0], {}};
    if (!cols[1].empty()) {
      for (const auto& name : split(cols[1], ',')) {
        const auto cls = classes.index_of(name);
        if (!cls) throw ParseError(source_name, lineno, "unknown class '" + name + "'");
        rec.classes.insert(*cls);
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<WeakLabelRecord> read_weak_labels(const std::string& path, const ClassMap& classes) {
  auto in = open_in(path);
  return parse_weak_labels(in, path, classes);
}

void write_weak_labels(std::ostream& out, const std::vector<WeakLabelRecord>& labels,
                       const ClassMap& classes) {
  out << "filename\tevent_labels\n";
  for (const auto& rec : labels) {
    out << rec.clip_id << '\t';
    bool first = true;
    for (int c : rec.classes) {
      if (!first) out << ',';
      out << classes.name(c);
      first = false;
    }
    out << '\n';
  }
}

void write_weak_labels(const std::string& path, const std::vector<WeakLabelRecord>& labels,
                       const ClassMap& classes) {
  auto out = open_out(path);
  write_weak_labels(out, labels, classes);
  if (!out) throw IoError("write failed: " + path);
}

std::vector<std::string> scan_class_names(const std::string& path, bool strong_format) {
  auto in = open_in(path);
  std::set<std::string> names;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto cols = split(line, '\t');
    if (lineno == 1 && cols[0] == "filename") continue;
    if (strong_format) {
      if (cols.size() != 4)
        throw ParseError(path, lineno,
                         "expected 4 tab-separated columns, got " + std::to_string(cols.size()));
      names.insert(cols[3]);
    } else {
      if (cols.size() != 2)
        throw ParseError(path, lineno,
                         "expected 2 tab-separated columns, got " + std::to_string(cols.size()));
      if (!cols[1].empty())
        for (const auto& n : split(cols[1], ',')) names.insert(n);
    }
  }
  return {names.begin(), names.end()};
}

DatasetManifest read_manifest(const std::string& path, std::vector<std::string> class_names) {
  DatasetManifest m;
  m.class_names = ClassMap(std::move(class_names)).names();
  m.base_dir = std::filesystem::path(path).parent_path();
  auto in = open_in(path);
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path, lineno, std::string("invalid JSON: ") + e.what());
    }
    ManifestEntry e;
    try {
      e.path = j.at("path").get<std::string>();
      e.source = parse_source(j.at("source").get<std::string>());
      e.weak = j.at("weak").get<bool>();
      e.strong = j.at("strong").get<bool>();
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(path, lineno, std::string("bad manifest entry: ") + ex.what());
    } catch (const ValidationError& ex) {
      throw ParseError(path, lineno, ex.what());
    }
    if (!ids.insert(clip_id_from_path(e.path)).second)
      throw ValidationError(path + ":" + std::to_string(lineno) + ": duplicate clip id '" +
                            clip_id_from_path(e.path) + "'");
    m.entries.push_back(std::move(e));
    if (!std::filesystem::exists(m.resolve(m.entries.back())))
      throw IoError(path + ":" + std::to_string(lineno) + ": referenced audio does not exist: " +
                    m.resolve(m.entries.back()).string());
  }
  return m;
}

void write_manifest(const std::string& path, const DatasetManifest& manifest) {
  auto out = open_out(path);
  for (const auto& e : manifest.entries) {
    nlohmann::ordered_json j;
    j["path"] = e.path;
    j["source"] = source_name(e.source);
    j["weak"] = e.weak;
    j["strong"] = e.strong;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace sedfpd
