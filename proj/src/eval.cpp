#include "causelab/eval.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "causelab/error.hpp"
#include "causelab/kv_format.hpp"
#include "causelab/rng.hpp"

namespace causelab {

namespace {

// Neumaier summation; fixed order keeps results reproducible.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::vector<PredictionRow> join_rows(std::span<const std::array<double, 2>> predictions,
                                     std::span<const SubpopTruth> truths) {
  if (predictions.size() != kNumSubpopulations || truths.size() != kNumSubpopulations) {
    throw Error(ErrorCategory::invalid_argument,
                "evaluation needs one prediction and one truth per subpopulation");
  }
  std::vector<PredictionRow> rows(kNumSubpopulations);
  for (std::uint32_t i = 0; i < kNumSubpopulations; ++i) {
    if (truths[i].subpop.index() != i) {
      throw Error(ErrorCategory::invalid_argument, "informer rows are not in index order");
    }
    rows[i] = {i,
               predictions[i][0],
               predictions[i][1],
               truths[i].bounds.lower,
               truths[i].bounds.upper,
               truths[i].pns};
  }
  return rows;
}

std::vector<PredictionRow> select_rows(std::span<const PredictionRow> rows,
                                       std::span<const std::uint32_t> indices) {
  std::vector<PredictionRow> out;
  out.reserve(indices.size());
  for (auto i : indices) {
    if (i >= rows.size() || rows[i].index != i) {
      throw Error(ErrorCategory::invalid_argument,
                  "subpopulation " + std::to_string(i) + " missing from evaluation rows");
    }
    out.push_back(rows[i]);
  }
  return out;
}

ErrorPair average_errors(std::span<const PredictionRow> rows) {
  if (rows.empty()) throw Error(ErrorCategory::invalid_argument, "no rows to average");
  CompensatedSum lo, hi;
  for (const auto& r : rows) {
    lo.add(std::abs(r.pred_lower - r.true_lower));
    hi.add(std::abs(r.pred_upper - r.true_upper));
  }
  const double n = static_cast<double>(rows.size());
  return {lo.value() / n, hi.value() / n};
}

ErrorPair population_errors(std::span<const PredictionRow> rows) {
  if (rows.size() != kNumSubpopulations) {
    throw Error(ErrorCategory::invalid_argument,
                "expected " + std::to_string(kNumSubpopulations) + " rows, got " +
                    std::to_string(rows.size()));
  }
  std::vector<bool> seen(kNumSubpopulations, false);
  for (const auto& r : rows) {
    if (r.index >= kNumSubpopulations || seen[r.index]) {
      throw Error(ErrorCategory::invalid_argument,
                  "subpopulation " + std::to_string(r.index) + " repeated or out of range");
    }
    seen[r.index] = true;
  }
  return average_errors(rows);
}

ViolationStats violation_stats(std::span<const PredictionRow> rows) {
  ViolationStats s;
  s.rows = rows.size();
  std::size_t contained = 0;
  for (const auto& r : rows) {
    if (r.pred_lower > r.pred_upper) ++s.ordering_violations;
    if (!(r.pred_lower >= 0.0 && r.pred_lower <= 1.0 && r.pred_upper >= 0.0 && r.pred_upper <= 1.0)) {
      ++s.out_of_range;
    }
    // PNS and its bounds come from different sums, so allow a few ulps.
    constexpr double tol = 1e-12;
    if (r.pred_lower - tol <= r.true_pns && r.true_pns <= r.pred_upper + tol) ++contained;
  }
  s.containment_fraction = rows.empty() ? 0.0 : static_cast<double>(contained) / rows.size();
  return s;
}

std::vector<PredictionRow> plot_sample(std::span<const PredictionRow> rows, std::size_t k,
                                       std::uint64_t seed) {
  if (k > rows.size()) {
    throw Error(ErrorCategory::invalid_argument,
                "plot sample of " + std::to_string(k) + " exceeds " + std::to_string(rows.size()) +
                    " rows");
  }
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  CounterRng rng(derive_key(seed, tag_of("plot")));
  // Partial Fisher-Yates: the first k slots are a uniform sample without replacement.
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(order[i], order[i + rng.below(rows.size() - i)]);
  }
  std::vector<PredictionRow> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(rows[order[i]]);
  return out;
}

void write_plot_files(const std::filesystem::path& dir, std::span<const PredictionRow> sample) {
  std::ostringstream lo, hi;
  lo << "rank\tindex\tpred_lower\ttrue_lower\n";
  hi << "rank\tindex\tpred_upper\ttrue_upper\n";
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const auto& r = sample[i];
    lo << i << '\t' << r.index << '\t' << format_double(r.pred_lower) << '\t'
       << format_double(r.true_lower) << '\n';
    hi << i << '\t' << r.index << '\t' << format_double(r.pred_upper) << '\t'
       << format_double(r.true_upper) << '\n';
  }
  write_file(dir / "plot_lower.tsv", lo.str());
  write_file(dir / "plot_upper.tsv", hi.str());
}

std::string metrics_tsv(const EvaluationSummary& s) {
  std::ostringstream out;
  out << "metric\tscope\tvalue\n";
  auto row = [&](const char* metric, const char* scope, const std::string& v) {
    out << metric << '\t' << scope << '\t' << v << '\n';
  };
  row("mean_abs_err_lower", "all", format_double(s.all.lower));
  row("mean_abs_err_upper", "all", format_double(s.all.upper));
  row("mean_abs_err_lower", "test", format_double(s.test.lower));
  row("mean_abs_err_upper", "test", format_double(s.test.upper));
  row("mean_abs_err_lower", "train", format_double(s.train.lower));
  row("mean_abs_err_upper", "train", format_double(s.train.upper));
  row("n_rows", "all", std::to_string(s.violations_all.rows));
  row("n_rows", "test", std::to_string(s.n_test));
  row("n_rows", "train", std::to_string(s.n_train));
  row("ordering_violations", "all", std::to_string(s.violations_all.ordering_violations));
  row("ordering_violations", "test", std::to_string(s.violations_test.ordering_violations));
  row("out_of_range", "all", std::to_string(s.violations_all.out_of_range));
  row("containment_fraction", "all", format_double(s.violations_all.containment_fraction));
  row("containment_fraction", "test", format_double(s.violations_test.containment_fraction));
  return out.str();
}

std::string report_text(const EvaluationSummary& s) {
  std::ostringstream out;
  out << "PNS bound learning report\n"
      << "=========================\n\n"
      << "All " << s.violations_all.rows << " subpopulations (includes labeled ones):\n"
      << "  average error of learned lower bound: " << fixed(s.all.lower) << "\n"
      << "  average error of learned upper bound: " << fixed(s.all.upper) << "\n\n"
      << "Held-out test labels (" << s.n_test << " subpopulations, error vs informer bounds):\n"
      << "  average error of learned lower bound: " << fixed(s.test.lower) << "\n"
      << "  average error of learned upper bound: " << fixed(s.test.upper) << "\n\n"
      << "Training labels (" << s.n_train << " subpopulations, error vs informer bounds):\n"
      << "  average error of learned lower bound: " << fixed(s.train.lower) << "\n"
      << "  average error of learned upper bound: " << fixed(s.train.upper) << "\n\n"
      << "Diagnostics (all subpopulations):\n"
      << "  predicted lower > predicted upper: " << s.violations_all.ordering_violations << "\n"
      << "  predictions outside [0,1]:         " << s.violations_all.out_of_range << "\n"
      << "  true PNS inside predicted bounds:  " << fixed(s.violations_all.containment_fraction)
      << "\n";
  return out.str();
}

}  // namespace causelab
