#include "causelab/informer.hpp"

#include <fstream>
#include <sstream>

#include "causelab/error.hpp"
#include "causelab/kv_format.hpp"

namespace causelab {

namespace {

struct FullQuantities {
  double pns = 0.0;
  CausalDistributions dists;
};

// All per-vector quantities from the two linear scores.
FullQuantities evaluate_scores(const ModelSpec& spec, LinearScores s) {
  const double w_uy[2] = {1.0 - spec.p_uy, spec.p_uy};
  const double w_ux[2] = {1.0 - spec.p_ux, spec.p_ux};
  FullQuantities q;
  for (int uy = 0; uy < 2; ++uy) {
    const bool y0 = f_y(spec, false, s.m_y, uy);
    const bool y1 = f_y(spec, true, s.m_y, uy);
    if (response_type(y0, y1) == ResponseType::complier) q.pns += w_uy[uy];
    if (y1) q.dists.p_y_do_x1 += w_uy[uy];
    if (y0) q.dists.p_y_do_x0 += w_uy[uy];
  }
  for (int ux = 0; ux < 2; ++ux) {
    const bool x = f_x(s.m_x, ux);
    for (int uy = 0; uy < 2; ++uy) {
      const bool y = f_y(spec, x, s.m_y, uy);
      q.dists.cell(x, y) += w_ux[ux] * w_uy[uy];
    }
  }
  return q;
}

SubpopTruth assemble(Subpopulation c, const std::array<double, kNumCompletions>& weights,
                     const std::array<FullQuantities, kNumCompletions>& per_completion) {
  SubpopTruth t;
  t.subpop = c;
  for (std::uint32_t k = 0; k < kNumCompletions; ++k) {
    const double w = weights[k];
    const FullQuantities& q = per_completion[k];
    t.pns += w * q.pns;
    t.dists.p_y_do_x1 += w * q.dists.p_y_do_x1;
    t.dists.p_y_do_x0 += w * q.dists.p_y_do_x0;
    for (int j = 0; j < 4; ++j) t.dists.joint[j] += w * q.dists.joint[j];
  }
  t.bounds = pns_bounds(t.dists);
  return t;
}

}  // namespace

double pns_full(const ModelSpec& spec, FeatureVector z) {
  const double m_y = linear_scores(spec, z).m_y;
  double p = 0.0;
  if (classify_unit(spec, m_y, false) == ResponseType::complier) p += 1.0 - spec.p_uy;
  if (classify_unit(spec, m_y, true) == ResponseType::complier) p += spec.p_uy;
  return p;
}

double exp_dist_full(const ModelSpec& spec, FeatureVector z, bool x) {
  const double m_y = linear_scores(spec, z).m_y;
  double p = 0.0;
  if (f_y(spec, x, m_y, false)) p += 1.0 - spec.p_uy;
  if (f_y(spec, x, m_y, true)) p += spec.p_uy;
  return p;
}

double obs_joint_full(const ModelSpec& spec, FeatureVector z, bool x, bool y) {
  const LinearScores s = linear_scores(spec, z);
  double p = 0.0;
  for (int ux = 0; ux < 2; ++ux) {
    if (f_x(s.m_x, ux) != x) continue;
    const double pux = ux ? spec.p_ux : 1.0 - spec.p_ux;
    for (int uy = 0; uy < 2; ++uy) {
      if (f_y(spec, x, s.m_y, uy) != y) continue;
      p += pux * (uy ? spec.p_uy : 1.0 - spec.p_uy);
    }
  }
  return p;
}

CausalDistributions dists_full(const ModelSpec& spec, FeatureVector z) {
  CausalDistributions d;
  d.p_y_do_x1 = exp_dist_full(spec, z, true);
  d.p_y_do_x0 = exp_dist_full(spec, z, false);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) d.cell(x, y) = obs_joint_full(spec, z, x, y);
  return d;
}

std::array<double, kNumCompletions> completion_weights(const ModelSpec& spec) {
  std::array<double, kNumCompletions> w{};
  for (std::uint32_t k = 0; k < kNumCompletions; ++k) {
    double p = 1.0;
    for (int h = 0; h < kNumHidden; ++h) {
      // Z_16 is the most significant bit of k.
      const bool bit = (k >> (kNumHidden - 1 - h)) & 1u;
      const double q = spec.p_uz[kNumObserved + h];
      p *= bit ? q : 1.0 - q;
    }
    w[k] = p;
  }
  return w;
}

double subpop_probability(const ModelSpec& spec, Subpopulation c) {
  double p = 1.0;
  for (int i = 0; i < kNumObserved; ++i) p *= c[i] ? spec.p_uz[i] : 1.0 - spec.p_uz[i];
  return p;
}

double feature_probability(const ModelSpec& spec, FeatureVector z) {
  double p = 1.0;
  for (int i = 0; i < kNumFeatures; ++i) p *= z[i] ? spec.p_uz[i] : 1.0 - spec.p_uz[i];
  return p;
}

SubpopTruth subpop_truth(const ModelSpec& spec, Subpopulation c) {
  const auto weights = completion_weights(spec);
  std::array<FullQuantities, kNumCompletions> per{};
  for (std::uint32_t k = 0; k < kNumCompletions; ++k) {
    const FeatureVector z = c.complete(k);
    per[k].pns = pns_full(spec, z);
    per[k].dists = dists_full(spec, z);
  }
  return assemble(c, weights, per);
}

std::vector<SubpopTruth> all_subpop_truths(const ModelSpec& spec) {
  const auto weights = completion_weights(spec);
  std::vector<SubpopTruth> rows(kNumSubpopulations);

#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(kNumSubpopulations); ++i) {
    const Subpopulation c = Subpopulation::from_index(static_cast<std::uint32_t>(i));
    // Scores over the observed prefix, then continued in index order per completion,
    // which reproduces linear_scores exactly.
    LinearScores prefix;
    for (int f = 0; f < kNumObserved; ++f) {
      if (c[f]) {
        prefix.m_x += spec.wx[f];
        prefix.m_y += spec.wy[f];
      }
    }
    std::array<FullQuantities, kNumCompletions> per;
    for (std::uint32_t k = 0; k < kNumCompletions; ++k) {
      LinearScores s = prefix;
      for (int h = 0; h < kNumHidden; ++h) {
        if ((k >> (kNumHidden - 1 - h)) & 1u) {
          s.m_x += spec.wx[kNumObserved + h];
          s.m_y += spec.wy[kNumObserved + h];
        }
      }
      per[k] = evaluate_scores(spec, s);
    }
    rows[i] = assemble(c, weights, per);
  }
  return rows;
}

namespace reference {

std::vector<SubpopTruth> all_subpop_truths(const ModelSpec& spec) {
  std::vector<SubpopTruth> rows;
  rows.reserve(kNumSubpopulations);
  for (std::uint32_t i = 0; i < kNumSubpopulations; ++i) {
    rows.push_back(subpop_truth(spec, Subpopulation::from_index(i)));
  }
  return rows;
}

}  // namespace reference

namespace {

constexpr const char* kInformerHeader =
    "index\tz1\tz2\tz3\tz4\tz5\tz6\tz7\tz8\tz9\tz10\tz11\tz12\tz13\tz14\tz15"
    "\tpns\tp_y_do_x1\tp_y_do_x0\tp_x0y0\tp_x0y1\tp_x1y0\tp_x1y1\tlower\tupper";

}  // namespace

void write_informer_table(const std::filesystem::path& path, const std::vector<SubpopTruth>& rows) {
  std::ostringstream out;
  out << kInformerHeader << '\n';
  for (const auto& r : rows) {
    out << r.subpop.index();
    for (int i = 0; i < kNumObserved; ++i) out << '\t' << (r.subpop[i] ? '1' : '0');
    out << '\t' << format_double(r.pns) << '\t' << format_double(r.dists.p_y_do_x1) << '\t'
        << format_double(r.dists.p_y_do_x0);
    for (double p : r.dists.joint) out << '\t' << format_double(p);
    out << '\t' << format_double(r.bounds.lower) << '\t' << format_double(r.bounds.upper) << '\n';
  }
  write_file(path, out.str());
}

std::vector<SubpopTruth> read_informer_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::io, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != kInformerHeader) {
    throw Error(ErrorCategory::parse, path.string() + ":1: unexpected informer header");
  }
  std::vector<SubpopTruth> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string ctx = path.string() + ":" + std::to_string(lineno);
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, '\t')) f.push_back(tok);
    if (f.size() != 25) throw Error(ErrorCategory::parse, ctx + ": expected 25 columns");
    SubpopTruth t;
    t.subpop = Subpopulation::from_index(static_cast<std::uint32_t>(parse_int(f[0], ctx)));
    t.pns = parse_double(f[16], ctx);
    t.dists.p_y_do_x1 = parse_double(f[17], ctx);
    t.dists.p_y_do_x0 = parse_double(f[18], ctx);
    for (int j = 0; j < 4; ++j) t.dists.joint[j] = parse_double(f[19 + j], ctx);
    t.bounds = pns_bounds(t.dists);
    t.bounds.lower = parse_double(f[23], ctx);
    t.bounds.upper = parse_double(f[24], ctx);
    rows.push_back(t);
  }
  return rows;
}

}  // namespace causelab
