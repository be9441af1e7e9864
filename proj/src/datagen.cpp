#include "causelab/datagen.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>

#include "causelab/error.hpp"

namespace causelab {

void GenConfig::validate() const {
  if (n_experimental == 0 || n_observational == 0) {
    throw Error(ErrorCategory::invalid_argument, "sample counts must be positive");
  }
}

std::uint64_t stream_key(std::uint64_t seed, Regime regime) {
  return derive_key(seed, regime == Regime::experimental ? tag_of("experimental")
                                                         : tag_of("observational"));
}

ExogenousDraw draw_unit(const ModelSpec& spec, CounterRng& rng) {
  ExogenousDraw d;
  d.u_x = rng.bernoulli(spec.p_ux);
  d.u_y = rng.bernoulli(spec.p_uy);
  for (int i = 0; i < kNumFeatures; ++i) d.u_z.set(i, rng.bernoulli(spec.p_uz[i]));
  return d;
}

SampleRecord sample_record(const ModelSpec& spec, Regime regime, std::uint64_t key,
                           std::uint64_t index) {
  CounterRng rng(key, index * kDrawsPerRecord);
  const ExogenousDraw u = draw_unit(spec, rng);
  const LinearScores s = linear_scores(spec, u.u_z);
  SampleRecord r;
  r.z_obs = Subpopulation::of(u.u_z);
  r.x = regime == Regime::experimental ? rng.bernoulli(0.5) : f_x(s.m_x, u.u_x);
  r.y = f_y(spec, r.x, s.m_y, u.u_y);
  return r;
}

std::vector<SampleRecord> generate_range(const ModelSpec& spec, Regime regime, std::uint64_t seed,
                                         std::uint64_t begin, std::uint64_t end) {
  const std::uint64_t key = stream_key(seed, regime);
  const std::int64_t n = static_cast<std::int64_t>(end > begin ? end - begin : 0);
  std::vector<SampleRecord> out(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    out[i] = sample_record(spec, regime, key, begin + static_cast<std::uint64_t>(i));
  }
  return out;
}

std::vector<SampleRecord> generate_shard(const ModelSpec& spec, Regime regime, std::uint64_t seed,
                                         std::uint64_t n, std::uint64_t shard,
                                         std::uint64_t num_shards) {
  if (num_shards == 0 || shard >= num_shards) {
    throw Error(ErrorCategory::invalid_argument, "shard index out of range");
  }
  const std::uint64_t per = n / num_shards;
  const std::uint64_t extra = n % num_shards;
  const std::uint64_t begin = shard * per + std::min(shard, extra);
  const std::uint64_t end = begin + per + (shard < extra ? 1 : 0);
  return generate_range(spec, regime, seed, begin, end);
}

std::vector<SampleRecord> sample_experimental(const ModelSpec& spec, const GenConfig& cfg) {
  cfg.validate();
  return generate_range(spec, Regime::experimental, cfg.seed, 0, cfg.n_experimental);
}

std::vector<SampleRecord> sample_observational(const ModelSpec& spec, const GenConfig& cfg) {
  cfg.validate();
  return generate_range(spec, Regime::observational, cfg.seed, 0, cfg.n_observational);
}

namespace reference {

std::vector<SampleRecord> generate(const ModelSpec& spec, Regime regime, std::uint64_t seed,
                                   std::uint64_t n) {
  const std::uint64_t key = stream_key(seed, regime);
  std::vector<SampleRecord> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) out.push_back(sample_record(spec, regime, key, i));
  return out;
}

}  // namespace reference

std::uint32_t pack_record(const SampleRecord& r) {
  std::uint32_t v = 0;
  for (int i = 0; i < kNumObserved; ++i) v |= static_cast<std::uint32_t>(r.z_obs[i]) << i;
  v |= static_cast<std::uint32_t>(r.x) << 15;
  v |= static_cast<std::uint32_t>(r.y) << 16;
  return v;
}

SampleRecord unpack_record(std::uint32_t v) {
  SampleRecord r;
  for (int i = 0; i < kNumObserved; ++i) r.z_obs.set(i, (v >> i) & 1u);
  r.x = (v >> 15) & 1u;
  r.y = (v >> 16) & 1u;
  return r;
}

RecordFormat format_for(const std::filesystem::path& path) {
  return path.extension() == ".bin" ? RecordFormat::binary : RecordFormat::text;
}

void write_records(const std::filesystem::path& path, std::span<const SampleRecord> records,
                   RecordFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCategory::io, "cannot write " + path.string());
  constexpr std::size_t kChunk = 1 << 16;
  std::string buf;
  for (std::size_t start = 0; start < records.size(); start += kChunk) {
    const std::size_t stop = std::min(records.size(), start + kChunk);
    buf.clear();
    for (std::size_t i = start; i < stop; ++i) {
      const SampleRecord& r = records[i];
      if (format == RecordFormat::text) {
        for (int f = 0; f < kNumObserved; ++f) {
          buf += r.z_obs[f] ? '1' : '0';
          buf += ' ';
        }
        buf += r.x ? '1' : '0';
        buf += ' ';
        buf += r.y ? '1' : '0';
        buf += '\n';
      } else {
        const std::uint32_t v = pack_record(r);
        buf += static_cast<char>(v & 0xFF);
        buf += static_cast<char>((v >> 8) & 0xFF);
        buf += static_cast<char>((v >> 16) & 0xFF);
      }
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  if (!out) throw Error(ErrorCategory::io, "write failed: " + path.string());
}

namespace {

std::vector<SampleRecord> parse_text(const std::string& data, const std::string& origin) {
  std::vector<SampleRecord> out;
  out.reserve(data.size() / 34);
  std::size_t pos = 0;
  std::uint64_t lineno = 0;
  constexpr int kFields = kNumObserved + 2;
  while (pos < data.size()) {
    ++lineno;
    std::size_t eol = data.find('\n', pos);
    if (eol == std::string::npos) eol = data.size();
    std::size_t len = eol - pos;
    if (len > 0 && data[pos + len - 1] == '\r') --len;
    auto fail = [&](const char* why) {
      throw Error(ErrorCategory::parse,
                  origin + ":" + std::to_string(lineno) + ": malformed record (" + why + ")");
    };
    if (len != 2 * kFields - 1) fail("expected 17 space-separated bits");
    bool bits[kFields];
    for (int f = 0; f < kFields; ++f) {
      const char ch = data[pos + 2 * f];
      if (ch != '0' && ch != '1') fail("field is not 0 or 1");
      if (f + 1 < kFields && data[pos + 2 * f + 1] != ' ') fail("fields must be separated by one space");
      bits[f] = ch == '1';
    }
    SampleRecord r;
    for (int f = 0; f < kNumObserved; ++f) r.z_obs.set(f, bits[f]);
    r.x = bits[kNumObserved];
    r.y = bits[kNumObserved + 1];
    out.push_back(r);
    pos = eol + 1;
  }
  return out;
}

}  // namespace

std::vector<SampleRecord> read_records(const std::filesystem::path& path, RecordFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::io, "cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (format == RecordFormat::text) return parse_text(data, path.string());

  if (data.size() % 3 != 0) {
    throw Error(ErrorCategory::parse,
                path.string() + ": binary record file size is not a multiple of 3");
  }
  std::vector<SampleRecord> out(data.size() / 3);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto* b = reinterpret_cast<const unsigned char*>(data.data() + 3 * i);
    const std::uint32_t v = b[0] | (b[1] << 8) | (static_cast<std::uint32_t>(b[2]) << 16);
    if (v >> 17) {
      throw Error(ErrorCategory::parse,
                  path.string() + ": record " + std::to_string(i + 1) + ": reserved bits set");
    }
    out[i] = unpack_record(v);
  }
  return out;
}

}  // namespace causelab
