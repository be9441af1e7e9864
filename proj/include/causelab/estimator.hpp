#pragma once

// Per-subpopulation counting, relative-frequency estimation and bound labels.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "causelab/bounds.hpp"
#include "causelab/datagen.hpp"
#include "causelab/scm.hpp"

namespace causelab {

inline constexpr std::uint64_t kDefaultThreshold = 1300;

struct SubpopTally {
  Subpopulation subpop;
  std::uint64_t n_exp_x1 = 0;
  std::uint64_t n_exp_x1_y1 = 0;
  std::uint64_t n_exp_x0 = 0;
  std::uint64_t n_exp_x0_y1 = 0;
  std::uint64_t n_obs = 0;
  std::array<std::uint64_t, 4> n_obs_cells{};  // indexed by 2*x + y

  std::uint64_t n_exp() const { return n_exp_x1 + n_exp_x0; }
  SubpopTally& operator+=(const SubpopTally& o);
  bool operator==(const SubpopTally&) const = default;
};

/// One tally per subpopulation index (all 32768, including empty ones).
using TallyTable = std::vector<SubpopTally>;

TallyTable empty_tally();
void merge_into(TallyTable& into, const TallyTable& from);

/// Parallel fold: per-thread tables merged by cellwise addition.
TallyTable tally(std::span<const SampleRecord> experimental,
                 std::span<const SampleRecord> observational);

namespace reference {
TallyTable tally(std::span<const SampleRecord> experimental,
                 std::span<const SampleRecord> observational);
}  // namespace reference

/// Relative-frequency distributions, or nullopt unless both regime totals
/// exceed `threshold` strictly and both experimental arms are nonempty.
std::optional<CausalDistributions> estimate(const SubpopTally& t,
                                            std::uint64_t threshold = kDefaultThreshold);

struct LabeledExample {
  Subpopulation subpop;
  std::array<double, kNumObserved> features{};
  double label_lower = 0.0;
  double label_upper = 0.0;
  std::uint64_t n_exp = 0;
  std::uint64_t n_obs = 0;

  bool operator==(const LabeledExample&) const = default;
};

struct Estimate {
  Subpopulation subpop;
  CausalDistributions dists;
  std::uint64_t n_exp = 0;
  std::uint64_t n_obs = 0;
};

struct LabelSet {
  std::vector<LabeledExample> labels;
  /// Subpopulations whose estimated bounds crossed and were excluded.
  std::vector<Subpopulation> crossed;
  std::size_t accepted = 0;
};

std::vector<Estimate> accepted_estimates(const TallyTable& table,
                                         std::uint64_t threshold = kDefaultThreshold);

std::array<double, kNumObserved> feature_values(Subpopulation c);

LabelSet make_labels(std::span<const Estimate> estimates);

struct LabelSplit {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> test;
};

/// Seeded Fisher-Yates shuffle, then the first round(train_fraction * n) go to train.
LabelSplit split(std::span<const LabeledExample> labels, double train_fraction, std::uint64_t seed);

void write_labels(const std::filesystem::path& path, std::span<const LabeledExample> labels);
std::vector<LabeledExample> read_labels(const std::filesystem::path& path);

void write_index_file(const std::filesystem::path& path, std::span<const LabeledExample> labels);
std::vector<std::uint32_t> read_index_file(const std::filesystem::path& path);

}  // namespace causelab
