// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Runs the full default-size pipeline.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "causelab/error.hpp"
#include "causelab/estimator.hpp"
#include "causelab/eval.hpp"
#include "causelab/informer.hpp"
#include "causelab/kv_format.hpp"
#include "causelab/pipeline.hpp"
#include "causelab/rng.hpp"

using namespace causelab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(const char* name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("[%s] %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
  std::fflush(stdout);
  failures += !o.pass;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

struct SampleSet {
  std::vector<SampleRecord> experimental, observational;
};

SampleSet default_samples(const ModelSpec& spec, std::uint64_t seed) {
  GenConfig g;
  g.seed = seed;
  return {sample_experimental(spec, g), sample_observational(spec, g)};
}

double metric(const std::string& metrics, const std::string& name, const std::string& scope) {
  const std::string key = name + "\t" + scope + "\t";
  const auto pos = metrics.find(key);
  if (pos == std::string::npos) throw Error(ErrorCategory::parse, "metric missing: " + key);
  const auto start = pos + key.size();
  return parse_double(metrics.substr(start, metrics.find('\n', start) - start), key);
}

}  // namespace

int main() {
  const ModelSpec spec = ModelSpec::bundled();
  const fs::path tmp = fs::path(CAUSELAB_TEST_TMP) / "acceptance";
  fs::remove_all(tmp);
  fs::create_directories(tmp);

  criterion("sandwich property over all 32768 subpopulations (tol 1e-12, < 60s)", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const auto rows = all_subpop_truths(spec);
    std::size_t bad = 0;
    double worst = 0;
    for (const auto& r : rows) {
      const double gap = std::max(r.bounds.lower - r.pns, r.pns - r.bounds.upper);
      worst = std::max(worst, gap);
      bad += gap > 1e-12;
    }
    const double secs = seconds_since(t0);
    return Outcome{rows.size() == kNumSubpopulations && bad == 0 && secs < 60,
                   fmt("%.0f violations, worst excess %.3g, %.2fs", static_cast<double>(bad), worst,
                       secs)};
  });

  criterion("hand-derived values at z = 0 (tol 1e-12)", [&] {
    const FeatureVector z{};
    const double pns = pns_full(spec, z);
    const double do1 = exp_dist_full(spec, z, true);
    const double do0 = exp_dist_full(spec, z, false);
    const double j11 = obs_joint_full(spec, z, true, true);
    const bool ok = std::abs(pns - 0.497668975278) <= 1e-12 &&
                    std::abs(do1 - 0.497668975278) <= 1e-12 && std::abs(do0) <= 1e-12 &&
                    std::abs(j11 - 0.601680857267 * 0.497668975278) <= 1e-12;
    return Outcome{ok, fmt("PNS %.12f, P(y|do1) %.12f, P(x,y) %.12f", pns, do1, j11)};
  });

  criterion("bounds on the worked distribution: PNS [0.5,0.6], PN [1,1], PS [2/3,1]", [&] {
    CausalDistributions d;
    d.p_y_do_x1 = 0.7;
    d.p_y_do_x0 = 0.2;
    d.cell(true, true) = 0.3;
    d.cell(false, true) = 0.2;
    d.cell(true, false) = 0.2;
    d.cell(false, false) = 0.3;
    const auto pns = pns_bounds(d), pn = pn_bounds(d), ps = ps_bounds(d);
    auto near = [](double a, double b) { return std::abs(a - b) <= 1e-12; };
    const bool ok = near(pns.lower, 0.5) && near(pns.upper, 0.6) && near(pn.lower, 1) &&
                    near(pn.upper, 1) && near(ps.lower, 2.0 / 3.0) && near(ps.upper, 1);
    return Outcome{ok, fmt("PNS [%.15g, %.15g], PS lower %.15g", pns.lower, pns.upper, ps.lower)};
  });

  const auto truths = all_subpop_truths(spec);
  const PipelineConfig defaults;

  criterion("label count in [420, 640] at default sizes across 4 seeds (< 5 min each)", [&] {
    bool ok = true;
    std::string detail;
    for (std::uint64_t seed : {stage_seed(defaults.seed, Stage::generate), std::uint64_t{1},
                               std::uint64_t{2}, std::uint64_t{3}}) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto s = default_samples(spec, seed);
      const LabelSet set = make_labels(accepted_estimates(tally(s.experimental, s.observational)));
      const double secs = seconds_since(t0);
      ok = ok && set.labels.size() >= 420 && set.labels.size() <= 640 && secs < 300;
      detail += std::to_string(set.labels.size()) + " ";
    }
    return Outcome{ok, "labels per seed: " + detail};
  });

  criterion("estimation fidelity: mean |estimated - informer| bound <= 0.05", [&] {
    const auto s = default_samples(spec, stage_seed(defaults.seed, Stage::generate));
    const LabelSet set = make_labels(accepted_estimates(tally(s.experimental, s.observational)));
    double lo = 0, hi = 0;
    for (const auto& l : set.labels) {
      lo += std::abs(l.label_lower - truths[l.subpop.index()].bounds.lower);
      hi += std::abs(l.label_upper - truths[l.subpop.index()].bounds.upper);
    }
    lo /= set.labels.size();
    hi /= set.labels.size();
    return Outcome{!set.labels.empty() && lo <= 0.05 && hi <= 0.05,
                   fmt("lower %.4f, upper %.4f over %.0f labels", lo, hi,
                       static_cast<double>(set.labels.size()))};
  });

  const fs::path run_a = tmp / "reproduce_a";
  const fs::path run_b = tmp / "reproduce_b";

  criterion("learning reproduction: all-subpopulation MAE <= 0.12 lower, <= 0.18 upper (< 10 min)",
            [&] {
              PipelineConfig cfg;
              cfg.output_dir = run_a;
              const auto t0 = std::chrono::steady_clock::now();
              reproduce(cfg);
              const double secs = seconds_since(t0);
              const std::string m = read_file(run_a / "metrics.tsv");
              const double lo = metric(m, "mean_abs_err_lower", "all");
              const double hi = metric(m, "mean_abs_err_upper", "all");
              return Outcome{lo <= 0.12 && hi <= 0.18 && secs < 600,
                             fmt("lower %.4f, upper %.4f, %.0fs", lo, hi,
                                 secs)};
            });

  criterion("gradient correctness: backprop vs central differences, 100 trials, rel err < 1e-4",
            [&] {
              CounterRng rng(derive_key(2023, tag_of("gradcheck")));
              double worst = 0;
              for (int trial = 0; trial < 100; ++trial) {
                Network net = Network::init({3, 4, 4, 4, 2}, rng.next());
                for (std::size_t p = 0; p < net.parameter_count(); ++p) {
                  net.parameter(p) += 0.2 * (rng.uniform() - 0.5);
                }
                Batch b;
                b.n = 1 + rng.below(8);
                for (std::size_t i = 0; i < b.n * 3; ++i) b.inputs.push_back(2 * rng.uniform() - 1);
                for (std::size_t i = 0; i < b.n * 2; ++i) b.targets.push_back(rng.uniform());
                const GradientResult g = gradient(net, b);
                constexpr double h = 1e-5;
                std::vector<double> analytic, numeric;
                for (std::size_t p = 0; p < net.parameter_count(); ++p) {
                  const double keep = net.parameter(p);
                  net.parameter(p) = keep + h;
                  const double up = loss(net, b);
                  net.parameter(p) = keep - h;
                  const double down = loss(net, b);
                  net.parameter(p) = keep;
                  analytic.push_back(g.grad.parameter(p));
                  numeric.push_back((up - down) / (2 * h));
                }
                // Relative error of the gradient vector.
                double diff = 0, na = 0, nn = 0;
                for (std::size_t p = 0; p < analytic.size(); ++p) {
                  diff += (analytic[p] - numeric[p]) * (analytic[p] - numeric[p]);
                  na += analytic[p] * analytic[p];
                  nn += numeric[p] * numeric[p];
                }
                const double denom = std::sqrt(na) + std::sqrt(nn);
                worst = std::max(worst, denom > 0 ? std::sqrt(diff) / denom : 0.0);
              }
              return Outcome{worst < 1e-4, fmt("worst relative error %.3g", worst)};
            });

  criterion("determinism: reproduce twice gives byte-identical metrics.tsv", [&] {
    if (!fs::exists(run_a / "metrics.tsv")) return Outcome{false, "first run missing"};
    PipelineConfig cfg;
    cfg.output_dir = run_b;
    reproduce(cfg);
    const bool same = read_file(run_a / "metrics.tsv") == read_file(run_b / "metrics.tsv");
    return Outcome{same, file_digest(run_a / "metrics.tsv") + " vs " +
                             file_digest(run_b / "metrics.tsv")};
  });

  criterion("Monte Carlo convergence: P(y|do(1),c) within 4 binomial SE for 5 subpopulations", [&] {
    const auto samples = default_samples(spec, stage_seed(defaults.seed, Stage::generate));
    const TallyTable t = tally(samples.experimental, samples.observational);
    // Candidates: the 100 most probable subpopulations; pick 5 at random.
    std::vector<std::pair<double, std::uint32_t>> by_p;
    for (std::uint32_t c = 0; c < kNumSubpopulations; ++c) {
      by_p.push_back({subpop_probability(spec, Subpopulation::from_index(c)), c});
    }
    std::sort(by_p.rbegin(), by_p.rend());
    CounterRng rng(derive_key(defaults.seed, tag_of("mc-check")));
    std::vector<std::uint32_t> pool;
    for (int k = 0; k < 100; ++k) pool.push_back(by_p[k].second);
    bool ok = true;
    std::string detail;
    for (int k = 0; k < 5; ++k) {
      const std::size_t j = k + rng.below(pool.size() - k);
      std::swap(pool[k], pool[j]);
      const std::uint32_t c = pool[k];
      const SubpopTally& s = t[c];
      const double p = truths[c].dists.p_y_do_x1;
      const double n = static_cast<double>(s.n_exp_x1);
      const double est = s.n_exp_x1_y1 / n;
      const double se = std::sqrt(p * (1 - p) / n);
      const double z = se > 0 ? std::abs(est - p) / se : (est == p ? 0.0 : INFINITY);
      ok = ok && n > 0 && z <= 4;
      char buf[96];
      std::snprintf(buf, sizeof buf, "c=%u z=%.2f; ", c, z);
      detail += buf;
    }
    return Outcome{ok, detail};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
