#pragma once

// Exact ground truth by enumerating the exogenous variables: per full feature
// vector, then per observed subpopulation by weighting its 32 completions.

#include <array>
#include <filesystem>
#include <vector>

#include "causelab/bounds.hpp"
#include "causelab/scm.hpp"

namespace causelab {

struct SubpopTruth {
  Subpopulation subpop;
  double pns = 0.0;
  CausalDistributions dists;
  BoundsPair bounds;
};

double pns_full(const ModelSpec& spec, FeatureVector z);

/// P(Y=1 | do(X=x), z).
double exp_dist_full(const ModelSpec& spec, FeatureVector z, bool x);

/// P(X=x, Y=y | z), summing P(u_x)P(u_y) over exogenous pairs that produce (x, y).
double obs_joint_full(const ModelSpec& spec, FeatureVector z, bool x, bool y);

CausalDistributions dists_full(const ModelSpec& spec, FeatureVector z);

/// Weights P(s_k | c) of the completions s_0 = 00000 ... s_31 = 11111 of Z_16..Z_20.
std::array<double, kNumCompletions> completion_weights(const ModelSpec& spec);

/// P(c) under the product measure of Z_1..Z_15.
double subpop_probability(const ModelSpec& spec, Subpopulation c);

/// P(z) under the product measure of Z_1..Z_20.
double feature_probability(const ModelSpec& spec, FeatureVector z);

SubpopTruth subpop_truth(const ModelSpec& spec, Subpopulation c);

/// Row i is the truth for subpopulation index i. Parallel over subpopulations;
/// bit-identical to reference::all_subpop_truths.
std::vector<SubpopTruth> all_subpop_truths(const ModelSpec& spec);

namespace reference {
/// Serial loop over subpop_truth.
std::vector<SubpopTruth> all_subpop_truths(const ModelSpec& spec);
}  // namespace reference

void write_informer_table(const std::filesystem::path& path, const std::vector<SubpopTruth>& rows);
std::vector<SubpopTruth> read_informer_table(const std::filesystem::path& path);

}  // namespace causelab
