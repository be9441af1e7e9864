#include <doctest.h>

#include <cmath>
#include <set>

#include "causelab/error.hpp"
#include "causelab/estimator.hpp"
#include "causelab/informer.hpp"
#include "test_util.hpp"

using namespace causelab;

namespace {

SampleRecord rec(std::uint32_t c, bool x, bool y) { return {Subpopulation::from_index(c), x, y}; }

SubpopTally tally_with(std::uint64_t n_x1, std::uint64_t n_x1_y1, std::uint64_t n_x0,
                       std::uint64_t n_x0_y1, std::array<std::uint64_t, 4> cells) {
  SubpopTally t;
  t.n_exp_x1 = n_x1;
  t.n_exp_x1_y1 = n_x1_y1;
  t.n_exp_x0 = n_x0;
  t.n_exp_x0_y1 = n_x0_y1;
  t.n_obs_cells = cells;
  t.n_obs = cells[0] + cells[1] + cells[2] + cells[3];
  return t;
}

LabeledExample label(std::uint32_t c) {
  LabeledExample l;
  l.subpop = Subpopulation::from_index(c);
  l.features = feature_values(l.subpop);
  return l;
}

}  // namespace

TEST_CASE("empty streams give all-zero tallies") {
  const TallyTable t = tally({}, {});
  REQUIRE(t.size() == kNumSubpopulations);
  for (const auto& s : t) {
    CHECK(s.n_exp() == 0);
    CHECK(s.n_obs == 0);
  }
}

TEST_CASE("identical records are counted in one cell") {
  const std::vector<SampleRecord> ten(10, rec(321, true, true));
  const TallyTable t = tally(ten, {});
  CHECK(t[321].n_exp_x1 == 10);
  CHECK(t[321].n_exp_x1_y1 == 10);
  CHECK(t[321].n_exp_x0 == 0);
  CHECK(t[320].n_exp() == 0);
}

TEST_CASE("parallel tally equals the serial reference and preserves totals") {
  const ModelSpec s = ModelSpec::bundled();
  const auto e = generate_range(s, Regime::experimental, 5, 0, 300000);
  const auto o = generate_range(s, Regime::observational, 5, 0, 200000);
  const TallyTable fast = tally(e, o);
  CHECK(fast == reference::tally(e, o));
  std::uint64_t n_exp = 0, n_obs = 0, cells = 0;
  for (const auto& t : fast) {
    CHECK(t.n_exp_x1_y1 <= t.n_exp_x1);
    CHECK(t.n_exp_x0_y1 <= t.n_exp_x0);
    n_exp += t.n_exp();
    n_obs += t.n_obs;
    for (auto c : t.n_obs_cells) cells += c;
  }
  CHECK(n_exp == e.size());
  CHECK(n_obs == o.size());
  CHECK(cells == o.size());
}

TEST_CASE("tally merge is cellwise addition") {
  const ModelSpec s = ModelSpec::bundled();
  const auto e = generate_range(s, Regime::experimental, 6, 0, 40000);
  const auto o = generate_range(s, Regime::observational, 6, 0, 40000);
  TallyTable merged = tally(std::span(e).first(15000), std::span(o).first(1));
  merge_into(merged, tally(std::span(e).subspan(15000), std::span(o).subspan(1)));
  CHECK(merged == tally(e, o));
}

TEST_CASE("threshold is strict on per-regime totals") {
  const auto at = tally_with(650, 300, 650, 100, {400, 300, 300, 301});
  CHECK(at.n_exp() == 1300);
  CHECK_FALSE(estimate(at, 1300).has_value());
  const auto above = tally_with(651, 300, 650, 100, {400, 300, 300, 301});
  CHECK(estimate(above, 1300).has_value());
  const auto obs_short = tally_with(651, 300, 650, 100, {400, 300, 300, 300});
  CHECK_FALSE(estimate(obs_short, 1300).has_value());
}

TEST_CASE("empty experimental arm is rejected") {
  CHECK_FALSE(estimate(tally_with(2000, 10, 0, 0, {500, 500, 500, 500}), 1300).has_value());
}

TEST_CASE("relative-frequency estimates") {
  const auto t = tally_with(1000, 250, 500, 100, {0, 0, 0, 2000});
  const auto d = estimate(t, 1300);
  REQUIRE(d.has_value());
  CHECK(d->p_y_do_x1 == 0.25);
  CHECK(d->p_y_do_x0 == 0.2);
  CHECK(d->joint == std::array<double, 4>{0, 0, 0, 1});
  CHECK_THROWS_AS(estimate(t, 0), Error);
}

TEST_CASE("labels reproduce informer bounds on informer inputs") {
  const ModelSpec s = ModelSpec::bundled();
  std::vector<Estimate> est;
  for (std::uint32_t c : {3u, 700u, 12000u}) {
    const SubpopTruth t = subpop_truth(s, Subpopulation::from_index(c));
    est.push_back({t.subpop, t.dists, 5000, 5000});
  }
  const LabelSet set = make_labels(est);
  REQUIRE(set.labels.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const SubpopTruth t = subpop_truth(s, est[i].subpop);
    CHECK(set.labels[i].label_lower == t.bounds.lower);
    CHECK(set.labels[i].label_upper == t.bounds.upper);
    CHECK(set.labels[i].features == feature_values(t.subpop));
  }
}

TEST_CASE("crossed estimates are excluded and reported") {
  CausalDistributions bad;
  bad.p_y_do_x1 = 0.8;
  bad.p_y_do_x0 = 0.2;
  bad.joint = {0.1, 0.4, 0.4, 0.1};
  CausalDistributions good;
  good.p_y_do_x1 = 0.7;
  good.p_y_do_x0 = 0.2;
  good.joint = {0.3, 0.2, 0.2, 0.3};
  const std::vector<Estimate> est = {{Subpopulation::from_index(9), bad, 2000, 2000},
                                     {Subpopulation::from_index(10), good, 2000, 2000}};
  const LabelSet set = make_labels(est);
  CHECK(set.accepted == 2);
  REQUIRE(set.labels.size() == 1);
  CHECK(set.labels[0].subpop.index() == 10);
  REQUIRE(set.crossed.size() == 1);
  CHECK(set.crossed[0].index() == 9);
}

TEST_CASE("split sizes and determinism") {
  std::vector<LabeledExample> labels;
  for (std::uint32_t i = 0; i < 529; ++i) labels.push_back(label(i * 61));
  const LabelSplit a = split(labels, 0.8, 4);
  CHECK(a.train.size() == 423);
  CHECK(a.test.size() == 106);
  const LabelSplit b = split(labels, 0.8, 4);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  std::set<std::uint32_t> seen;
  for (const auto& l : a.train) seen.insert(l.subpop.index());
  for (const auto& l : a.test) seen.insert(l.subpop.index());
  CHECK(seen.size() == 529);
  CHECK(split(labels, 0.8, 5).train != a.train);

  std::vector<LabeledExample> ten(labels.begin(), labels.begin() + 10);
  const LabelSplit half = split(ten, 0.5, 1);
  CHECK(half.train.size() == 5);
  CHECK(half.test.size() == 5);

  CHECK_THROWS_AS(split({}, 0.8, 1), Error);
  CHECK_THROWS_AS(split(ten, 1.0, 1), Error);
}

TEST_CASE("raising the threshold never grows the accepted set") {
  const ModelSpec s = ModelSpec::bundled();
  const auto e = generate_range(s, Regime::experimental, 8, 0, 1'000'000);
  const auto o = generate_range(s, Regime::observational, 8, 0, 1'000'000);
  const TallyTable t = tally(e, o);
  std::size_t prev = SIZE_MAX;
  for (std::uint64_t th : {1u, 10u, 100u, 300u, 1300u, 5000u}) {
    const std::size_t n = accepted_estimates(t, th).size();
    CHECK(n <= prev);
    prev = n;
  }
}

TEST_CASE("labels come within sampling noise of the true PNS at default sizes") {
  const ModelSpec s = ModelSpec::bundled();
  const auto truths = all_subpop_truths(s);
  const auto e = generate_range(s, Regime::experimental, 31, 0, 5'000'000);
  const auto o = generate_range(s, Regime::observational, 31, 0, 5'000'000);
  const LabelSet set = make_labels(accepted_estimates(tally(e, o)));
  REQUIRE(!set.labels.empty());
  std::size_t contained = 0;
  for (const auto& l : set.labels) {
    const double pns = truths[l.subpop.index()].pns;
    contained += l.label_lower - 0.05 <= pns && pns <= l.label_upper + 0.05;
  }
  CHECK(static_cast<double>(contained) / set.labels.size() >= 0.99);
}

TEST_CASE("estimation error shrinks with more samples") {
  const ModelSpec s = ModelSpec::bundled();
  const auto truths = all_subpop_truths(s);
  auto tally_for = [&](std::uint64_t n) {
    const auto e = generate_range(s, Regime::experimental, 77, 0, n);
    const auto o = generate_range(s, Regime::observational, 77, 0, n);
    return tally(e, o);
  };
  const TallyTable small = tally_for(500'000);
  const TallyTable large = tally_for(5'000'000);
  const auto base = accepted_estimates(small, 1300);
  REQUIRE(base.size() > 20);
  double err_small = 0, err_large = 0;
  for (const auto& est : base) {
    const auto i = est.subpop.index();
    const BoundsPair bs = pns_bounds(est.dists);
    const BoundsPair bl = pns_bounds(*estimate(large[i], 1300));
    err_small += std::abs(bs.lower - truths[i].bounds.lower) + std::abs(bs.upper - truths[i].bounds.upper);
    err_large += std::abs(bl.lower - truths[i].bounds.lower) + std::abs(bl.upper - truths[i].bounds.upper);
  }
  // 10x more data: error should drop by about sqrt(10); require at least 2x.
  CHECK(err_large * 2 < err_small);
}

TEST_CASE("labels and index files round trip") {
  const auto dir = scratch_dir("estimator_files");
  std::vector<LabeledExample> labels;
  for (std::uint32_t i : {0u, 17u, 32767u}) {
    LabeledExample l = label(i);
    l.label_lower = 0.1 * (i % 7) / 3.0;
    l.label_upper = 0.9 - l.label_lower / 3.0;
    l.n_exp = 1400 + i;
    l.n_obs = 1500 + i;
    labels.push_back(l);
  }
  write_labels(dir / "labels.tsv", labels);
  CHECK(read_labels(dir / "labels.tsv") == labels);
  write_index_file(dir / "train.idx", labels);
  CHECK(read_index_file(dir / "train.idx") == std::vector<std::uint32_t>{0, 17, 32767});
}
