#pragma once

// Plain-text plumbing: key = value run configurations, CSV with shortest
// round-trip numbers, JSON sidecars and file digests.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace kpo {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);
std::string format_int(long long x);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_;
};

/// key = value lines; '#' starts a comment; blank lines ignored.
class Config {
 public:
  static Config parse(const std::string& text, const std::set<std::string>& allowed,
                      const std::string& source = "<string>");
  static Config load(const std::filesystem::path& path, const std::set<std::string>& allowed);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  /// Comma-separated values or start:stop:step (inclusive, step > 0).
  std::vector<double> get_grid(const std::string& key, const std::vector<double>& fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  /// Canonical key = value text (sorted keys), re-parseable by parse().
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
  std::string source_;
};

std::vector<double> parse_grid(const std::string& text, const std::string& what);

/// 64-bit FNV-1a over the file bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace kpo
