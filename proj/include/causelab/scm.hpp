#pragma once

// Structural causal model over 20 independent binary features Z_1..Z_20:
//   Z_i = U_Zi,  X = f_x(M_X, U_X),  Y = f_y(X, M_Y, U_Y)
// with M_X, M_Y linear in Z and all exogenous U_* Bernoulli.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

namespace causelab {

inline constexpr int kNumFeatures = 20;
inline constexpr int kNumObserved = 15;
inline constexpr int kNumHidden = kNumFeatures - kNumObserved;
inline constexpr std::uint32_t kNumSubpopulations = 1u << kNumObserved;
inline constexpr std::uint32_t kNumCompletions = 1u << kNumHidden;
inline constexpr std::uint32_t kNumFeatureVectors = 1u << kNumFeatures;

struct ModelSpec {
  double c = 0.0;
  std::array<double, kNumFeatures> wx{};
  std::array<double, kNumFeatures> wy{};
  double p_ux = 0.0;
  double p_uy = 0.0;
  std::array<double, kNumFeatures> p_uz{};

  /// Throws Error(invalid_argument) when a probability leaves [0,1] or a value is non-finite.
  void validate() const;

  static ModelSpec parse(const std::string& text, const std::string& origin = "<string>");
  static ModelSpec load(const std::filesystem::path& path);
  /// The model shipped in data/default_model.spec.
  static ModelSpec bundled();
  static std::filesystem::path bundled_path();

  std::string serialize() const;
  void save(const std::filesystem::path& path) const;

  bool operator==(const ModelSpec&) const = default;
};

/// Full assignment of Z_1..Z_20. The canonical index puts Z_1 in the most
/// significant bit, so index = subpopulation_index * 32 + completion_index.
class FeatureVector {
 public:
  constexpr FeatureVector() = default;
  static constexpr FeatureVector from_index(std::uint32_t index) {
    return FeatureVector(index & (kNumFeatureVectors - 1));
  }

  constexpr std::uint32_t index() const { return bits_; }
  /// Value of Z_{i+1}.
  constexpr bool operator[](int i) const { return (bits_ >> (kNumFeatures - 1 - i)) & 1u; }
  constexpr void set(int i, bool v) {
    const std::uint32_t m = 1u << (kNumFeatures - 1 - i);
    bits_ = v ? (bits_ | m) : (bits_ & ~m);
  }

  constexpr bool operator==(const FeatureVector&) const = default;

 private:
  constexpr explicit FeatureVector(std::uint32_t bits) : bits_(bits) {}
  std::uint32_t bits_ = 0;
};

/// Observed prefix Z_1..Z_15, canonical index in [0, 32767] with Z_1 most significant.
class Subpopulation {
 public:
  constexpr Subpopulation() = default;
  static constexpr Subpopulation from_index(std::uint32_t index) {
    return Subpopulation(index & (kNumSubpopulations - 1));
  }
  static constexpr Subpopulation of(FeatureVector z) {
    return Subpopulation(z.index() >> kNumHidden);
  }

  constexpr std::uint32_t index() const { return bits_; }
  /// Value of Z_{i+1}, i in [0, 15).
  constexpr bool operator[](int i) const { return (bits_ >> (kNumObserved - 1 - i)) & 1u; }
  constexpr void set(int i, bool v) {
    const std::uint32_t m = 1u << (kNumObserved - 1 - i);
    bits_ = v ? (bits_ | m) : (bits_ & ~m);
  }

  /// Completion s_k: Z_16..Z_20 set to the 5-bit binary expansion of k (Z_20 least significant).
  constexpr FeatureVector complete(std::uint32_t k) const {
    return FeatureVector::from_index((bits_ << kNumHidden) | (k & (kNumCompletions - 1)));
  }

  constexpr bool operator==(const Subpopulation&) const = default;

 private:
  constexpr explicit Subpopulation(std::uint32_t bits) : bits_(bits) {}
  std::uint32_t bits_ = 0;
};

struct LinearScores {
  double m_x = 0.0;
  double m_y = 0.0;
};

enum class ResponseType { complier, always_taker, never_taker, defier };

const char* to_string(ResponseType t);

/// Dot products with wx and wy, accumulated in feature index order.
LinearScores linear_scores(const ModelSpec& spec, FeatureVector z);

/// 1 iff m_x + u_x > 0.5.
constexpr bool f_x(double m_x, bool u_x) { return m_x + (u_x ? 1.0 : 0.0) > 0.5; }

/// With v = c*x + m_y + u_y: 1 iff 0 < v < 1 or 1 < v < 2.
constexpr bool f_y(double c, bool x, double m_y, bool u_y) {
  const double v = c * (x ? 1.0 : 0.0) + m_y + (u_y ? 1.0 : 0.0);
  return (v > 0.0 && v < 1.0) || (v > 1.0 && v < 2.0);
}

inline bool f_y(const ModelSpec& spec, bool x, double m_y, bool u_y) {
  return f_y(spec.c, x, m_y, u_y);
}

constexpr ResponseType response_type(bool y_at_x0, bool y_at_x1) {
  if (y_at_x1) return y_at_x0 ? ResponseType::always_taker : ResponseType::complier;
  return y_at_x0 ? ResponseType::defier : ResponseType::never_taker;
}

inline ResponseType classify_unit(const ModelSpec& spec, double m_y, bool u_y) {
  return response_type(f_y(spec, false, m_y, u_y), f_y(spec, true, m_y, u_y));
}

}  // namespace causelab
