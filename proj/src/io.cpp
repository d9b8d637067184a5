#include "vss/io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vss {

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) out << ',';
    out << header[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << format_double(row[i]);
    }
    out << '\n';
  }
  return out.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
  }
  fs::rename(tmp, target);
}

std::uint64_t fnv1a_hash(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

RunConfig RunConfig::parse_text(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  std::string section;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string();
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected 'key = value', got: " + line);
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("config: empty key or value in: " + line);
    if (!section.empty()) key = section + "." + key;
    config.values[key] = value;
  }
  return config;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str());
}

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  return std::stod(it->second);
}

int RunConfig::get_int(const std::string& key, int fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  return std::stoi(it->second);
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  return it->second == "1" || it->second == "true" || it->second == "yes" || it->second == "on";
}

std::string RunConfig::canonical_text() const {
  std::ostringstream out;
  for (const auto& [k, v] : values) out << k << " = " << v << '\n';
  return out.str();
}

std::string SvgPlot::render() const {
  const double width = 760.0, height = 520.0;
  const double ml = 70.0, mr = 20.0, mt = 36.0, mb = 52.0;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& series : lines) {
    for (size_t i = 0; i < series.xs.size(); ++i) {
      xmin = std::min(xmin, series.xs[i]);
      xmax = std::max(xmax, series.xs[i]);
      ymin = std::min(ymin, series.ys[i]);
      ymax = std::max(ymax, series.ys[i]);
    }
  }
  if (xmin > xmax) {
    xmin = 0;
    xmax = 1;
    ymin = 0;
    ymax = 1;
  }
  if (xmax - xmin < 1e-300) xmax = xmin + 1.0;
  if (ymax - ymin < 1e-300) ymax = ymin + 1.0;
  const double sx = (width - ml - mr) / (xmax - xmin);
  const double sy = (height - mt - mb) / (ymax - ymin);
  auto X = [&](double x) { return ml + (x - xmin) * sx; };
  auto Y = [&](double y) { return height - mb - (y - ymin) * sy; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
      << title << "</text>\n";
  // axes
  out << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr << "\" y2=\""
      << height - mb << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << height - mb
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 5.0;
    const double yv = ymin + (ymax - ymin) * i / 5.0;
    out << "<text x=\"" << X(xv) << "\" y=\"" << height - mb + 18
        << "\" text-anchor=\"middle\" font-size=\"11\">" << format_double(xv).substr(0, 8)
        << "</text>\n";
    out << "<text x=\"" << ml - 6 << "\" y=\"" << Y(yv) + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << format_double(yv).substr(0, 8)
        << "</text>\n";
  }
  out << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label << "</text>\n";
  out << "<text x=\"18\" y=\"" << height / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 " << height / 2
      << ")\">" << y_label << "</text>\n";
  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  int color_idx = 0;
  for (const auto& series : lines) {
    out << "<polyline fill=\"none\" stroke=\"" << palette[color_idx % 6] << "\" stroke-width=\"1.3\" points=\"";
    for (size_t i = 0; i < series.xs.size(); ++i) {
      out << X(series.xs[i]) << ',' << Y(series.ys[i]) << ' ';
    }
    out << "\"/>\n";
    ++color_idx;
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace vss
