#pragma once

// Stage orchestration. Every stage reads and writes plain files in the output
// directory and records itself in manifest.json (config, config hash, input and
// output digests), which later stages use to detect missing or stale inputs.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "causelab/kv_format.hpp"
#include "causelab/nn.hpp"

namespace causelab {

struct PipelineConfig {
  std::filesystem::path spec_path = ModelSpec::bundled_path();
  std::uint64_t seed = 2023;
  std::uint64_t n_experimental = 5'000'000;
  std::uint64_t n_observational = 5'000'000;
  std::uint64_t threshold = kDefaultThreshold;
  double train_fraction = 0.8;
  std::size_t iterations = 600;
  double learning_rate = 0.01;
  std::size_t hidden_width = 128;
  Optimizer optimizer = Optimizer::adam;
  bool binary = false;
  std::size_t plot_samples = 200;
  std::filesystem::path output_dir = "out";

  /// Overrides every field whose key appears in `doc`; unknown keys are rejected.
  void apply(const KvDocument& doc);
  static PipelineConfig load(const std::filesystem::path& path);
  void validate() const;
  /// Sorted "key = value" lines; the output dir is excluded.
  std::string canonical() const;
};

enum class Stage { informer, generate, label, train, evaluate };

inline constexpr Stage kAllStages[] = {Stage::informer, Stage::generate, Stage::label,
                                       Stage::train, Stage::evaluate};

const char* to_string(Stage s);
Stage parse_stage(const std::string& name);

/// Independent seed for one stage, derived from the master seed.
std::uint64_t stage_seed(std::uint64_t master, Stage s);

/// "fnv1a64:<16 hex digits>" of the file contents.
std::string file_digest(const std::filesystem::path& path);

struct StageReport {
  Stage stage;
  std::vector<std::string> log;
};

/// Throws Error(missing_prerequisite) or Error(stale) when upstream artifacts are
/// absent or do not match the manifest and the current config.
StageReport run_stage(Stage stage, const PipelineConfig& cfg);

/// All stages in order.
std::vector<StageReport> reproduce(const PipelineConfig& cfg);

}  // namespace causelab
