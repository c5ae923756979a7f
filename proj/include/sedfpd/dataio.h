// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#ifndef SEDFPD_DATAIO_H_
#define SEDFPD_DATAIO_H_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace sedfpd {

/// RW: real-world weakly-labeled. SS: synthetic strongly-labeled.
enum class Source { RW, SS };

std::string source_name(Source s);
Source parse_source(const std::string& s);

struct Clip {
  std::string id;
  std::vector<double> samples;
  int sample_rate = 0;
  Source source = Source::RW;

  double duration() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

struct StrongLabel {
  std::string clip_id;
  int cls = 0;
  double onset = 0.0;
  double offset = 0.0;

  bool operator==(const StrongLabel&) const = default;
};

struct WeakLabelRecord {
  std::string clip_id;
  std::set<int> classes;

  bool operator==(const WeakLabelRecord&) const = default;
};

/// Ordered class names; index = position. Matching is case-sensitive.
class ClassMap {
 public:
  ClassMap() = default;
  explicit ClassMap(std::vector<std::string> names);

  std::optional<int> index_of(const std::string& name) const;
  const std::string& name(int index) const { return names_.at(static_cast<std::size_t>(index)); }
  int size() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
};

struct ManifestEntry {
  std::string path;  // relative to the manifest directory, or absolute
  Source source = Source::SS;
  bool weak = false;
  bool strong = false;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::vector<std::string> class_names;
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const ManifestEntry& e) const {
    const std::filesystem::path p(e.path);
    return p.is_absolute() ? p : base_dir / p;
  }
};

/// Clip ids are the file name component of the audio path (DCASE convention).
std::string clip_id_from_path(const std::string& path);

// Strong labels: filename<TAB>onset<TAB>offset<TAB>event_label, optional header.
std::vector<StrongLabel> parse_strong_labels(std::istream& in, const std::string& source_name,
                                             const ClassMap& classes);
std::vector<StrongLabel> read_strong_labels(const std::string& path, const ClassMap& classes);
void write_strong_labels(std::ostream& out, const std::vector<StrongLabel>& labels,
                         const ClassMap& classes);
void write_strong_labels(const std::string& path, const std::vector<StrongLabel>& labels,
                         const ClassMap& classes);

// Weak labels: filename<TAB>label1,label2,..., optional header.
std::vector<WeakLabelRecord> parse_weak_labels(std::istream& in, const std::string& source_name,
                                               const ClassMap& classes);
std::vector<WeakLabelRecord> read_weak_labels(const std::string& path, const ClassMap& classes);
void write_weak_labels(std::ostream& out, const std::vector<WeakLabelRecord>& labels,
                       const ClassMap& classes);
void write_weak_labels(const std::string& path, const std::vector<WeakLabelRecord>& labels,
                       const ClassMap& classes);

/// Reads the event_label column of a strong TSV or the label lists of a
/// weak TSV and returns the distinct names in sorted order. Used when no
/// class list is supplied.
std::vector<std::string> scan_class_names(const std::string& path, bool strong_format);

// Manifest: JSON-lines with keys path, source ("RW"|"SS"), weak, strong.
DatasetManifest read_manifest(const std::string& path, std::vector<std::string> class_names);
void write_manifest(const std::string& path, const DatasetManifest& manifest);

// WAV audio, PCM16 or float32, mono or first channel.
Clip load_clip(const std::string& path, int expected_rate);
void write_wav_pcm16(const std::string& path, const std::vector<double>& samples, int sample_rate);
void write_wav_float32(const std::string& path, const std::vector<double>& samples,
                       int sample_rate, int channels = 1);

}  // namespace sedfpd

#endif  // SEDFPD_DATAIO_H_
