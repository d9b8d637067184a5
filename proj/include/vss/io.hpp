#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace vss {

/// Shortest round-trip decimal formatting; CSV output relies on it so that
/// written values reparse bit-exactly.
std::string format_double(double v);

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

/// Write-then-rename; parent directories are created on demand.
void write_file_atomic(const std::string& path, const std::string& content);

std::uint64_t fnv1a_hash(const std::string& data);

/// Flat key = value configuration with [section] prefixes and # comments.
struct RunConfig {
  std::map<std::string, std::string> values;

  static RunConfig parse_text(const std::string& text);
  static RunConfig load(const std::string& path);

  std::string get(const std::string& key, const std::string& fallback = "") const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string canonical_text() const;  ///< sorted, for hashing and manifests
};

/// Minimal polyline plot writer.
struct SvgPlot {
  struct Line {
    std::vector<double> xs;
    std::vector<double> ys;
    std::string name;
  };
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Line> lines;

  std::string render() const;
};

}  // namespace vss
