#pragma once

// Line-oriented "key = value" text used for model specs and pipeline configs.
// '#' starts a comment line; arrays are written as "[a, b, c]" on one line.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace causelab {

class KvDocument {
 public:
  static KvDocument parse(const std::string& text, const std::string& origin = "<string>");
  static KvDocument load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& raw(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::string origin_;
};

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);
double parse_double(const std::string& text, const std::string& context);
std::int64_t parse_int(const std::string& text, const std::string& context);
std::string format_doubles(const std::vector<double>& v);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace causelab
