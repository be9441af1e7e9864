#include <doctest.h>

#include <algorithm>
#include <set>

#include "causelab/error.hpp"
#include "causelab/eval.hpp"
#include "causelab/rng.hpp"

using namespace causelab;

namespace {

std::vector<PredictionRow> truth_rows() {
  const auto truths = all_subpop_truths(ModelSpec::bundled());
  std::vector<std::array<double, 2>> preds(kNumSubpopulations);
  for (std::uint32_t i = 0; i < kNumSubpopulations; ++i) {
    preds[i] = {truths[i].bounds.lower, truths[i].bounds.upper};
  }
  return join_rows(preds, truths);
}

}  // namespace

TEST_CASE("perfect predictions have zero error and full containment") {
  const auto rows = truth_rows();
  const ErrorPair e = population_errors(rows);
  CHECK(e.lower == 0.0);
  CHECK(e.upper == 0.0);
  const ViolationStats v = violation_stats(rows);
  CHECK(v.ordering_violations == 0);
  CHECK(v.out_of_range == 0);
  CHECK(v.containment_fraction == 1.0);
}

TEST_CASE("a constant shift shows up as the error") {
  std::vector<PredictionRow> rows;
  CounterRng rng(1);
  for (std::uint32_t i = 0; i < kNumSubpopulations; ++i) {
    const double lo = 0.5 * rng.uniform();
    const double hi = lo + 0.3 * rng.uniform();
    rows.push_back({i, lo + 0.1, hi + 0.1, lo, hi, lo});
  }
  const ErrorPair e = population_errors(rows);
  CHECK(e.lower == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(e.upper == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("average errors are permutation invariant") {
  std::vector<PredictionRow> rows;
  CounterRng rng(2);
  for (std::uint32_t i = 0; i < 5000; ++i) {
    rows.push_back({i, rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform(), 0.5});
  }
  const ErrorPair a = average_errors(rows);
  for (std::size_t i = rows.size() - 1; i > 0; --i) std::swap(rows[i], rows[rng.below(i + 1)]);
  const ErrorPair b = average_errors(rows);
  CHECK(std::abs(a.lower - b.lower) <= 1e-12);
  CHECK(std::abs(a.upper - b.upper) <= 1e-12);
}

TEST_CASE("population errors need every subpopulation exactly once") {
  auto rows = truth_rows();
  CHECK_THROWS_AS(population_errors(std::span(rows).first(100)), Error);
  rows[5].index = 6;
  CHECK_THROWS_AS(population_errors(rows), Error);
  CHECK_THROWS_AS(average_errors({}), Error);
}

TEST_CASE("ordering violations are counted") {
  std::vector<PredictionRow> rows = {{0, 1.0, 0.0, 0.1, 0.2, 0.15}, {1, 0.1, 0.3, 0.1, 0.3, 0.2}};
  const ViolationStats v = violation_stats(rows);
  CHECK(v.ordering_violations == 1);
  CHECK(v.containment_fraction == 0.5);
}

TEST_CASE("plot sample is seeded and without replacement") {
  const auto rows = truth_rows();
  const auto a = plot_sample(rows, 200, 9);
  CHECK(a.size() == 200);
  std::set<std::uint32_t> ids;
  for (const auto& r : a) ids.insert(r.index);
  CHECK(ids.size() == 200);
  const auto b = plot_sample(rows, 200, 9);
  CHECK(std::equal(a.begin(), a.end(), b.begin(),
                   [](const auto& x, const auto& y) { return x.index == y.index; }));

  const auto all = plot_sample(std::span(rows).first(50), 50, 3);
  std::set<std::uint32_t> every;
  for (const auto& r : all) every.insert(r.index);
  CHECK(every.size() == 50);
  CHECK_THROWS_AS(plot_sample(std::span(rows).first(50), 51, 3), Error);
}

TEST_CASE("select_rows follows the requested indices") {
  const auto rows = truth_rows();
  const std::vector<std::uint32_t> idx = {7, 3, 32767};
  const auto sel = select_rows(rows, idx);
  REQUIRE(sel.size() == 3);
  CHECK(sel[0].index == 7);
  CHECK(sel[2].index == 32767);
  const std::vector<std::uint32_t> bad = {40000};
  CHECK_THROWS_AS(select_rows(rows, bad), Error);
}

TEST_CASE("metrics keep all and test scopes apart") {
  EvaluationSummary s;
  s.all = {0.08, 0.14};
  s.test = {0.05, 0.09};
  s.n_test = 106;
  const std::string m = metrics_tsv(s);
  CHECK(m.find("mean_abs_err_lower\tall\t0.08\n") != std::string::npos);
  CHECK(m.find("mean_abs_err_lower\ttest\t0.05\n") != std::string::npos);
  CHECK(m.find("mean_abs_err_upper\tall\t0.14\n") != std::string::npos);
  const std::string r = report_text(s);
  CHECK(r.find("0.080000") != std::string::npos);
  CHECK(r.find("0.140000") != std::string::npos);
}
