#pragma once

// Seeded experimental and observational samples.
//
// Record r of a regime uses the draws at positions [32r, 32r + 23) of that
// regime's stream, in the order U_X, U_Y, U_Z1..U_Z20, then the treatment coin
// (experimental only). Generation is therefore identical for any thread count
// or shard layout.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "causelab/rng.hpp"
#include "causelab/scm.hpp"

namespace causelab {

enum class Regime { experimental, observational };

struct SampleRecord {
  Subpopulation z_obs;
  bool x = false;
  bool y = false;

  bool operator==(const SampleRecord&) const = default;
};

struct ExogenousDraw {
  bool u_x = false;
  bool u_y = false;
  FeatureVector u_z;
};

struct GenConfig {
  std::uint64_t n_experimental = 5'000'000;
  std::uint64_t n_observational = 5'000'000;
  std::uint64_t seed = 0;

  void validate() const;
};

inline constexpr std::uint64_t kDrawsPerRecord = 32;

std::uint64_t stream_key(std::uint64_t seed, Regime regime);

ExogenousDraw draw_unit(const ModelSpec& spec, CounterRng& rng);

SampleRecord sample_record(const ModelSpec& spec, Regime regime, std::uint64_t key,
                           std::uint64_t index);

/// Records [begin, end) of the regime's stream; parallel across records.
std::vector<SampleRecord> generate_range(const ModelSpec& spec, Regime regime, std::uint64_t seed,
                                         std::uint64_t begin, std::uint64_t end);

/// Shard `shard` of `num_shards` contiguous index blocks.
std::vector<SampleRecord> generate_shard(const ModelSpec& spec, Regime regime, std::uint64_t seed,
                                         std::uint64_t n, std::uint64_t shard,
                                         std::uint64_t num_shards);

std::vector<SampleRecord> sample_experimental(const ModelSpec& spec, const GenConfig& cfg);
std::vector<SampleRecord> sample_observational(const ModelSpec& spec, const GenConfig& cfg);

namespace reference {
std::vector<SampleRecord> generate(const ModelSpec& spec, Regime regime, std::uint64_t seed,
                                   std::uint64_t n);
}  // namespace reference

enum class RecordFormat { text, binary };

/// Text: "b1 b2 ... b15 x y\n". Binary: 3 little-endian bytes per record,
/// bit i (i < 15) = Z_{i+1}, bit 15 = x, bit 16 = y.
void write_records(const std::filesystem::path& path, std::span<const SampleRecord> records,
                   RecordFormat format);
std::vector<SampleRecord> read_records(const std::filesystem::path& path, RecordFormat format);
/// Format from the extension: ".bin" is binary, anything else text.
RecordFormat format_for(const std::filesystem::path& path);

std::uint32_t pack_record(const SampleRecord& r);
SampleRecord unpack_record(std::uint32_t packed);

}  // namespace causelab
