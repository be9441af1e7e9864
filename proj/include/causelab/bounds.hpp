#pragma once

// Sharp bounds on PNS, PN and PS computed from experimental
// probabilities P(y|do(x)) and the observational joint P(X, Y).

#include <array>

namespace causelab {

/// Experimental and observational distribution of a (sub)population.
/// Joint cells are indexed by 2*x + y.
struct CausalDistributions {
  double p_y_do_x1 = 0.0;
  double p_y_do_x0 = 0.0;
  std::array<double, 4> joint{};

  double cell(bool x, bool y) const { return joint[(x ? 2 : 0) + (y ? 1 : 0)]; }
  double& cell(bool x, bool y) { return joint[(x ? 2 : 0) + (y ? 1 : 0)]; }
  /// Observational P(Y=1).
  double p_y() const { return cell(true, true) + cell(false, true); }

  /// Throws Error(invalid_argument) unless every entry is in [0,1] and the
  /// cells sum to 1 within `tolerance`.
  void validate(double tolerance = 1e-12) const;
};

/// `raw_*` hold the max-of-lowers and min-of-uppers as computed. When they
/// cross, `crossed` is set and lower/upper both hold their midpoint.
struct BoundsPair {
  double lower = 0.0;
  double upper = 1.0;
  bool crossed = false;
  double raw_lower = 0.0;
  double raw_upper = 1.0;

  bool contains(double v, double tolerance = 0.0) const {
    return lower - tolerance <= v && v <= upper + tolerance;
  }
};

BoundsPair pns_bounds(const CausalDistributions& d);

/// Requires P(x,y) > 0; throws Error(undefined_quantity) otherwise.
BoundsPair pn_bounds(const CausalDistributions& d);

/// Requires P(x',y') > 0; throws Error(undefined_quantity) otherwise.
BoundsPair ps_bounds(const CausalDistributions& d);

}  // namespace causelab
