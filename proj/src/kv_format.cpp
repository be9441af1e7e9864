#include "causelab/kv_format.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "causelab/error.hpp"

namespace causelab {

std::string_view category_name(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::usage: return "usage";
    case ErrorCategory::io: return "io";
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::invalid_argument: return "invalid_argument";
    case ErrorCategory::undefined_quantity: return "undefined_quantity";
    case ErrorCategory::insufficient_data: return "insufficient_data";
    case ErrorCategory::missing_prerequisite: return "missing_prerequisite";
    case ErrorCategory::stale: return "stale";
    case ErrorCategory::diverged: return "diverged";
  }
  return "unknown";
}

int exit_code(ErrorCategory c) noexcept { return 2 + static_cast<int>(c); }

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KvDocument KvDocument::parse(const std::string& text, const std::string& origin) {
  KvDocument doc;
  doc.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCategory::parse,
                  origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string key = trim(t.substr(0, eq));
    if (key.empty()) {
      throw Error(ErrorCategory::parse, origin + ":" + std::to_string(lineno) + ": empty key");
    }
    if (doc.values_.count(key)) {
      throw Error(ErrorCategory::parse,
                  origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    doc.values_[key] = trim(t.substr(eq + 1));
  }
  return doc;
}

KvDocument KvDocument::load(const std::filesystem::path& path) {
  return parse(read_file(path), path.string());
}

const std::string& KvDocument::raw(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    throw Error(ErrorCategory::parse, origin_ + ": missing key '" + key + "'");
  }
  return it->second;
}

double KvDocument::get_double(const std::string& key) const {
  return parse_double(raw(key), origin_ + ": " + key);
}

std::int64_t KvDocument::get_int(const std::string& key) const {
  return parse_int(raw(key), origin_ + ": " + key);
}

std::vector<double> KvDocument::get_doubles(const std::string& key) const {
  std::string v = raw(key);
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') {
    throw Error(ErrorCategory::parse, origin_ + ": " + key + ": expected [a, b, ...]");
  }
  v = v.substr(1, v.size() - 2);
  std::vector<double> out;
  if (trim(v).empty()) return out;
  std::istringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    out.push_back(parse_double(trim(item), origin_ + ": " + key));
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error(ErrorCategory::invalid_argument, "unformattable double");
  return std::string(buf, ptr);
}

std::string format_doubles(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_double(v[i]);
  }
  return s + "]";
}

double parse_double(const std::string& text, const std::string& context) {
  double v = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || first == last) {
    throw Error(ErrorCategory::parse, context + ": not a number: '" + text + "'");
  }
  return v;
}

std::int64_t parse_int(const std::string& text, const std::string& context) {
  std::int64_t v = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || first == last) {
    throw Error(ErrorCategory::parse, context + ": not an integer: '" + text + "'");
  }
  return v;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCategory::io, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCategory::io, "write failed: " + path.string());
}

}  // namespace causelab
