#include "causelab/scm.hpp"

#include <cmath>

#include "causelab/error.hpp"
#include "causelab/kv_format.hpp"

namespace causelab {

namespace {

constexpr const char* kSpecHeader = "# causelab model spec v1\n";

void check_probability(double p, const std::string& name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCategory::invalid_argument,
                "model spec: " + name + " = " + format_double(p) + " is not in [0,1]");
  }
}

void check_finite(double v, const std::string& name) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCategory::invalid_argument, "model spec: " + name + " is not finite");
  }
}

std::array<double, kNumFeatures> get_array20(const KvDocument& doc, const std::string& key) {
  const auto v = doc.get_doubles(key);
  if (v.size() != static_cast<std::size_t>(kNumFeatures)) {
    throw Error(ErrorCategory::parse, "model spec: " + key + " needs exactly 20 entries, got " +
                                          std::to_string(v.size()));
  }
  std::array<double, kNumFeatures> out{};
  for (int i = 0; i < kNumFeatures; ++i) out[i] = v[i];
  return out;
}

std::vector<double> as_vector(const std::array<double, kNumFeatures>& a) {
  return {a.begin(), a.end()};
}

}  // namespace

const char* to_string(ResponseType t) {
  switch (t) {
    case ResponseType::complier: return "complier";
    case ResponseType::always_taker: return "always_taker";
    case ResponseType::never_taker: return "never_taker";
    case ResponseType::defier: return "defier";
  }
  return "?";
}

void ModelSpec::validate() const {
  check_finite(c, "c");
  check_probability(p_ux, "p_ux");
  check_probability(p_uy, "p_uy");
  for (int i = 0; i < kNumFeatures; ++i) {
    check_finite(wx[i], "wx[" + std::to_string(i) + "]");
    check_finite(wy[i], "wy[" + std::to_string(i) + "]");
    check_probability(p_uz[i], "p_uz[" + std::to_string(i) + "]");
  }
}

ModelSpec ModelSpec::parse(const std::string& text, const std::string& origin) {
  const KvDocument doc = KvDocument::parse(text, origin);
  ModelSpec s;
  s.c = doc.get_double("c");
  s.p_ux = doc.get_double("p_ux");
  s.p_uy = doc.get_double("p_uy");
  s.p_uz = get_array20(doc, "p_uz");
  s.wx = get_array20(doc, "wx");
  s.wy = get_array20(doc, "wy");
  s.validate();
  return s;
}

ModelSpec ModelSpec::load(const std::filesystem::path& path) {
  return parse(read_file(path), path.string());
}

std::filesystem::path ModelSpec::bundled_path() { return CAUSELAB_DEFAULT_SPEC; }

ModelSpec ModelSpec::bundled() { return load(bundled_path()); }

std::string ModelSpec::serialize() const {
  std::string s = kSpecHeader;
  s += "c = " + format_double(c) + "\n";
  s += "p_ux = " + format_double(p_ux) + "\n";
  s += "p_uy = " + format_double(p_uy) + "\n";
  s += "p_uz = " + format_doubles(as_vector(p_uz)) + "\n";
  s += "wx = " + format_doubles(as_vector(wx)) + "\n";
  s += "wy = " + format_doubles(as_vector(wy)) + "\n";
  return s;
}

void ModelSpec::save(const std::filesystem::path& path) const { write_file(path, serialize()); }

LinearScores linear_scores(const ModelSpec& spec, FeatureVector z) {
  LinearScores s;
  for (int i = 0; i < kNumFeatures; ++i) {
    if (z[i]) {
      s.m_x += spec.wx[i];
      s.m_y += spec.wy[i];
    }
  }
  return s;
}

}  // namespace causelab
