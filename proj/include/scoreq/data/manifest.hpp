#ifndef SCOREQ_DATA_MANIFEST_HPP_
#define SCOREQ_DATA_MANIFEST_HPP_

#include <charconv>
#include <cmath>
#include <span>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "scoreq/data/sample.hpp"

namespace scoreq {

inline constexpr std::string_view kManifestHeader = "id,split,degradation,mos,features_path";

/// Collected parse/validation failures, each prefixed with file and line.
class ManifestError : public std::runtime_error {
 public:
  explicit ManifestError(std::vector<std::string> errors)
      : std::runtime_error(join(errors)), errors_(std::move(errors)) {}
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  static std::string join(const std::vector<std::string>& errs) {
    std::string out;
    for (const auto& e : errs) {
      if (!out.empty()) out += '\n';
      out += e;
    }
    return out;
  }
  std::vector<std::string> errors_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

inline void write_features_csv(const FeatureSequence& x, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  for (std::size_t t = 0; t < x.rows(); ++t) {
    for (std::size_t d = 0; d < x.cols(); ++d) {
      if (d) os << ',';
      os << format_double(x(t, d));
    }
    os << '\n';
  }
  if (!os) throw IoError("write failed for " + path.string());
}

/// Reads T rows x D columns; errors are appended to errors with provenance.
inline FeatureSequence read_features_csv(const std::filesystem::path& path, std::vector<std::string>& errors) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    errors.push_back(path.string() + ": cannot open features file");
    return {};
  }
  std::vector<double> data;
  std::size_t cols = 0, rows = 0, lineno = 0;
  std::string line;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (rows == 0) cols = fields.size();
    if (fields.size() != cols) {
      errors.push_back(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(cols) +
                       " columns, got " + std::to_string(fields.size()));
      return {};
    }
    for (auto f : fields) {
      double v;
      if (!parse_double(f, v)) {
        errors.push_back(path.string() + ":" + std::to_string(lineno) + ": malformed float '" + std::string(f) + "'");
        return {};
      }
      data.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) {
    errors.push_back(path.string() + ": features file has no frames");
    return {};
  }
  return FeatureSequence(rows, cols, std::move(data));
}

/// Writes manifest.csv under dir plus one features/<id>.csv per sample.
inline std::filesystem::path write_manifest(const std::filesystem::path& dir, std::span<const LabeledSample> samples,
                                            const std::string& name = "manifest.csv") {
  std::filesystem::create_directories(dir / "features");
  const auto manifest = dir / name;
  std::ofstream os(manifest, std::ios::binary);
  if (!os) throw IoError("cannot write " + manifest.string());
  os << kManifestHeader << '\n';
  for (const auto& s : samples) {
    const std::string rel = "features/" + s.id + ".csv";
    write_features_csv(s.features, dir / rel);
    os << s.id << ',' << to_string(s.split) << ',' << s.degradation << ',' << format_double(s.mos) << ',' << rel
       << '\n';
  }
  if (!os) throw IoError("write failed for " + manifest.string());
  return manifest;
}

/// Loads a manifest; features paths are resolved relative to the manifest's
/// directory. Every problem is reported, not just the first.
inline std::vector<LabeledSample> load_manifest(const std::filesystem::path& path, LabelRange range = {}) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open manifest " + path.string());
  const auto base = path.parent_path();
  std::vector<std::string> errors;
  std::vector<LabeledSample> out;
  std::string line;
  std::size_t lineno = 0;
  auto where = [&] { return path.string() + ":" + std::to_string(lineno) + ": "; };

  if (!std::getline(is, line)) throw ManifestError({path.string() + ":1: missing header"});
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kManifestHeader) {
    throw ManifestError({where() + "expected header '" + std::string(kManifestHeader) + "'"});
  }
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 5) {
      errors.push_back(where() + "expected 5 columns, got " + std::to_string(f.size()));
      continue;
    }
    LabeledSample s;
    s.id = std::string(f[0]);
    if (s.id.empty()) errors.push_back(where() + "empty id");
    auto split = split_from_string(f[1]);
    if (!split) errors.push_back(where() + "unknown split '" + std::string(f[1]) + "'");
    s.split = split.value_or(Split::train);
    s.degradation = std::string(f[2]);
    if (!parse_double(f[3], s.mos)) {
      errors.push_back(where() + "malformed mos '" + std::string(f[3]) + "'");
      continue;
    }
    if (!range.contains(s.mos)) {
      errors.push_back(where() + "mos " + std::string(f[3]) + " outside [" + format_double(range.min) + ", " +
                       format_double(range.max) + "]");
      continue;
    }
    const std::size_t before = errors.size();
    s.features = read_features_csv(base / std::string(f[4]), errors);
    if (errors.size() != before) {
      errors.back() = where() + errors.back();
      continue;
    }
    out.push_back(std::move(s));
  }
  if (!errors.empty()) throw ManifestError(std::move(errors));
  return out;
}

}  // namespace scoreq

#endif  // SCOREQ_DATA_MANIFEST_HPP_
