#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "causelab/informer.hpp"

namespace causelab {

struct PredictionRow {
  std::uint32_t index = 0;
  double pred_lower = 0.0;
  double pred_upper = 0.0;
  double true_lower = 0.0;
  double true_upper = 0.0;
  double true_pns = 0.0;
};

/// Pairs predictions[i] with truths[i]; both must cover every subpopulation in index order.
std::vector<PredictionRow> join_rows(std::span<const std::array<double, 2>> predictions,
                                     std::span<const SubpopTruth> truths);

/// Rows restricted to the given subpopulation indices, in the given order.
std::vector<PredictionRow> select_rows(std::span<const PredictionRow> rows,
                                       std::span<const std::uint32_t> indices);

struct ErrorPair {
  double lower = 0.0;
  double upper = 0.0;
};

/// Mean |pred - true| for each bound over any nonempty set of rows.
ErrorPair average_errors(std::span<const PredictionRow> rows);

/// Same, but requires exactly one row per subpopulation.
ErrorPair population_errors(std::span<const PredictionRow> rows);

struct ViolationStats {
  std::size_t rows = 0;
  std::size_t ordering_violations = 0;  // pred_lower > pred_upper
  std::size_t out_of_range = 0;         // prediction outside [0,1]
  double containment_fraction = 0.0;    // pred_lower <= true_pns <= pred_upper, within 1e-12
};

ViolationStats violation_stats(std::span<const PredictionRow> rows);

/// Seeded sample of k rows without replacement, in sampled order.
std::vector<PredictionRow> plot_sample(std::span<const PredictionRow> rows, std::size_t k,
                                       std::uint64_t seed);

/// plot_lower.tsv / plot_upper.tsv: rank, index, pred, true.
void write_plot_files(const std::filesystem::path& dir, std::span<const PredictionRow> sample);

struct EvaluationSummary {
  ErrorPair all;
  ErrorPair test;
  ErrorPair train;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  ViolationStats violations_all;
  ViolationStats violations_test;
};

std::string metrics_tsv(const EvaluationSummary& s);
std::string report_text(const EvaluationSummary& s);

}  // namespace causelab
