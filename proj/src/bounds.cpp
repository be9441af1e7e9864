#include "causelab/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "causelab/error.hpp"
#include "causelab/kv_format.hpp"

namespace causelab {

namespace {

BoundsPair make_pair(double raw_lower, double raw_upper) {
  BoundsPair b;
  b.raw_lower = raw_lower;
  b.raw_upper = raw_upper;
  if (raw_lower > raw_upper) {
    b.crossed = true;
    b.lower = b.upper = 0.5 * (raw_lower + raw_upper);
  } else {
    b.lower = raw_lower;
    b.upper = raw_upper;
  }
  return b;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

void CausalDistributions::validate(double tolerance) const {
  auto in01 = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in01(p_y_do_x1) || !in01(p_y_do_x0)) {
    throw Error(ErrorCategory::invalid_argument, "experimental probability outside [0,1]");
  }
  double sum = 0.0;
  for (double p : joint) {
    if (!in01(p)) throw Error(ErrorCategory::invalid_argument, "joint cell outside [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > tolerance) {
    throw Error(ErrorCategory::invalid_argument,
                "joint cells sum to " + format_double(sum) + ", expected 1");
  }
}

BoundsPair pns_bounds(const CausalDistributions& d) {
  const double y_x = d.p_y_do_x1;
  const double y_xp = d.p_y_do_x0;
  const double yp_xp = 1.0 - y_xp;
  const double y = d.p_y();

  const double lower = std::max({0.0, y_x - y_xp, y - y_xp, y_x - y});
  const double upper =
      std::min({y_x, yp_xp, d.cell(true, true) + d.cell(false, false),
                y_x - y_xp + d.cell(true, false) + d.cell(false, true)});
  return make_pair(lower, upper);
}

BoundsPair pn_bounds(const CausalDistributions& d) {
  const double xy = d.cell(true, true);
  if (!(xy > 0.0)) {
    throw Error(ErrorCategory::undefined_quantity, "PN undefined: P(x,y) = 0");
  }
  const double lower = std::max(0.0, (d.p_y() - d.p_y_do_x0) / xy);
  const double upper = std::min(1.0, ((1.0 - d.p_y_do_x0) - d.cell(false, false)) / xy);
  return make_pair(clamp01(lower), clamp01(upper));
}

BoundsPair ps_bounds(const CausalDistributions& d) {
  const double xpyp = d.cell(false, false);
  if (!(xpyp > 0.0)) {
    throw Error(ErrorCategory::undefined_quantity, "PS undefined: P(x',y') = 0");
  }
  const double yp = 1.0 - d.p_y();
  const double yp_x = 1.0 - d.p_y_do_x1;
  const double lower = std::max(0.0, (yp - yp_x) / xpyp);
  const double upper = std::min(1.0, (d.p_y_do_x1 - d.cell(true, true)) / xpyp);
  return make_pair(clamp01(lower), clamp01(upper));
}

}  // namespace causelab
