#include "causelab/estimator.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <omp.h>

#include "causelab/error.hpp"
#include "causelab/kv_format.hpp"
#include "causelab/rng.hpp"

namespace causelab {

SubpopTally& SubpopTally::operator+=(const SubpopTally& o) {
  n_exp_x1 += o.n_exp_x1;
  n_exp_x1_y1 += o.n_exp_x1_y1;
  n_exp_x0 += o.n_exp_x0;
  n_exp_x0_y1 += o.n_exp_x0_y1;
  n_obs += o.n_obs;
  for (int j = 0; j < 4; ++j) n_obs_cells[j] += o.n_obs_cells[j];
  return *this;
}

TallyTable empty_tally() {
  TallyTable t(kNumSubpopulations);
  for (std::uint32_t i = 0; i < kNumSubpopulations; ++i) t[i].subpop = Subpopulation::from_index(i);
  return t;
}

void merge_into(TallyTable& into, const TallyTable& from) {
  for (std::size_t i = 0; i < into.size(); ++i) into[i] += from[i];
}

namespace {

void count_experimental(TallyTable& t, const SampleRecord& r) {
  SubpopTally& s = t[r.z_obs.index()];
  if (r.x) {
    ++s.n_exp_x1;
    s.n_exp_x1_y1 += r.y;
  } else {
    ++s.n_exp_x0;
    s.n_exp_x0_y1 += r.y;
  }
}

void count_observational(TallyTable& t, const SampleRecord& r) {
  SubpopTally& s = t[r.z_obs.index()];
  ++s.n_obs;
  ++s.n_obs_cells[(r.x ? 2 : 0) + (r.y ? 1 : 0)];
}

}  // namespace

TallyTable tally(std::span<const SampleRecord> experimental,
                 std::span<const SampleRecord> observational) {
  const int threads = omp_get_max_threads();
  std::vector<TallyTable> partial(threads, TallyTable(kNumSubpopulations));
  const auto n_exp = static_cast<std::int64_t>(experimental.size());
  const auto n_obs = static_cast<std::int64_t>(observational.size());

#pragma omp parallel num_threads(threads)
  {
    TallyTable& local = partial[omp_get_thread_num()];
#pragma omp for schedule(static) nowait
    for (std::int64_t i = 0; i < n_exp; ++i) count_experimental(local, experimental[i]);
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n_obs; ++i) count_observational(local, observational[i]);
  }

  TallyTable out = empty_tally();
  for (const auto& p : partial) merge_into(out, p);
  return out;
}

namespace reference {

TallyTable tally(std::span<const SampleRecord> experimental,
                 std::span<const SampleRecord> observational) {
  TallyTable out = empty_tally();
  for (const auto& r : experimental) count_experimental(out, r);
  for (const auto& r : observational) count_observational(out, r);
  return out;
}

}  // namespace reference

std::optional<CausalDistributions> estimate(const SubpopTally& t, std::uint64_t threshold) {
  if (threshold < 1) throw Error(ErrorCategory::invalid_argument, "threshold must be >= 1");
  if (!(t.n_exp() > threshold && t.n_obs > threshold)) return std::nullopt;
  if (t.n_exp_x1 == 0 || t.n_exp_x0 == 0) return std::nullopt;
  CausalDistributions d;
  d.p_y_do_x1 = static_cast<double>(t.n_exp_x1_y1) / static_cast<double>(t.n_exp_x1);
  d.p_y_do_x0 = static_cast<double>(t.n_exp_x0_y1) / static_cast<double>(t.n_exp_x0);
  for (int j = 0; j < 4; ++j) {
    d.joint[j] = static_cast<double>(t.n_obs_cells[j]) / static_cast<double>(t.n_obs);
  }
  return d;
}

std::vector<Estimate> accepted_estimates(const TallyTable& table, std::uint64_t threshold) {
  std::vector<Estimate> out;
  for (const auto& t : table) {
    if (auto d = estimate(t, threshold)) out.push_back({t.subpop, *d, t.n_exp(), t.n_obs});
  }
  return out;
}

std::array<double, kNumObserved> feature_values(Subpopulation c) {
  std::array<double, kNumObserved> f{};
  for (int i = 0; i < kNumObserved; ++i) f[i] = c[i] ? 1.0 : 0.0;
  return f;
}

LabelSet make_labels(std::span<const Estimate> estimates) {
  LabelSet out;
  out.accepted = estimates.size();
  for (const auto& e : estimates) {
    const BoundsPair b = pns_bounds(e.dists);
    if (b.crossed) {
      out.crossed.push_back(e.subpop);
      continue;
    }
    LabeledExample ex;
    ex.subpop = e.subpop;
    ex.features = feature_values(e.subpop);
    ex.label_lower = b.lower;
    ex.label_upper = b.upper;
    ex.n_exp = e.n_exp;
    ex.n_obs = e.n_obs;
    out.labels.push_back(ex);
  }
  return out;
}

LabelSplit split(std::span<const LabeledExample> labels, double train_fraction, std::uint64_t seed) {
  if (labels.empty()) throw Error(ErrorCategory::insufficient_data, "no labels to split");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCategory::invalid_argument, "train_fraction must lie in (0,1)");
  }
  std::vector<LabeledExample> shuffled(labels.begin(), labels.end());
  CounterRng rng(derive_key(seed, tag_of("split")));
  for (std::size_t i = shuffled.size() - 1; i > 0; --i) {
    std::swap(shuffled[i], shuffled[rng.below(i + 1)]);
  }
  const auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(shuffled.size())));
  LabelSplit s;
  s.train.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_train), shuffled.end());
  return s;
}

namespace {

constexpr const char* kLabelsHeader =
    "index\tz1\tz2\tz3\tz4\tz5\tz6\tz7\tz8\tz9\tz10\tz11\tz12\tz13\tz14\tz15"
    "\tlabel_lower\tlabel_upper\tn_exp\tn_obs";

}  // namespace

void write_labels(const std::filesystem::path& path, std::span<const LabeledExample> labels) {
  std::ostringstream out;
  out << kLabelsHeader << '\n';
  for (const auto& l : labels) {
    out << l.subpop.index();
    for (int i = 0; i < kNumObserved; ++i) out << '\t' << (l.subpop[i] ? '1' : '0');
    out << '\t' << format_double(l.label_lower) << '\t' << format_double(l.label_upper) << '\t'
        << l.n_exp << '\t' << l.n_obs << '\n';
  }
  write_file(path, out.str());
}

std::vector<LabeledExample> read_labels(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::getline(in, line);
  if (line != kLabelsHeader) {
    throw Error(ErrorCategory::parse, path.string() + ":1: unexpected labels header");
  }
  std::vector<LabeledExample> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string ctx = path.string() + ":" + std::to_string(lineno);
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, '\t')) f.push_back(tok);
    if (f.size() != 20) throw Error(ErrorCategory::parse, ctx + ": expected 20 columns");
    LabeledExample l;
    const auto idx = parse_int(f[0], ctx);
    if (idx < 0 || idx >= kNumSubpopulations) {
      throw Error(ErrorCategory::parse, ctx + ": subpopulation index out of range");
    }
    l.subpop = Subpopulation::from_index(static_cast<std::uint32_t>(idx));
    l.features = feature_values(l.subpop);
    l.label_lower = parse_double(f[16], ctx);
    l.label_upper = parse_double(f[17], ctx);
    l.n_exp = static_cast<std::uint64_t>(parse_int(f[18], ctx));
    l.n_obs = static_cast<std::uint64_t>(parse_int(f[19], ctx));
    out.push_back(l);
  }
  return out;
}

void write_index_file(const std::filesystem::path& path, std::span<const LabeledExample> labels) {
  std::string s;
  for (const auto& l : labels) s += std::to_string(l.subpop.index()) + "\n";
  write_file(path, s);
}

std::vector<std::uint32_t> read_index_file(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::uint32_t> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    out.push_back(static_cast<std::uint32_t>(
        parse_int(line, path.string() + ":" + std::to_string(lineno))));
  }
  return out;
}

}  // namespace causelab
