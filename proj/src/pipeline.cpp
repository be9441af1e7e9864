#include "causelab/pipeline.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "causelab/datagen.hpp"
#include "causelab/error.hpp"
#include "causelab/estimator.hpp"
#include "causelab/eval.hpp"
#include "causelab/informer.hpp"
#include "causelab/rng.hpp"

namespace causelab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t as_count(const KvDocument& doc, const std::string& key) {
  const auto v = doc.get_int(key);
  if (v < 0) throw Error(ErrorCategory::invalid_argument, key + " must be non-negative");
  return static_cast<std::uint64_t>(v);
}

bool as_bool(const KvDocument& doc, const std::string& key) {
  const std::string& v = doc.raw(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error(ErrorCategory::parse, key + ": expected true or false");
}

}  // namespace

void PipelineConfig::apply(const KvDocument& doc) {
  static const std::set<std::string> known = {
      "spec_path",  "seed",       "n_experimental", "n_observational", "threshold",
      "train_fraction", "iterations", "learning_rate", "hidden_width", "optimizer",
      "binary",     "plot_samples", "output_dir"};
  for (const auto& [key, value] : doc.entries()) {
    if (!known.count(key)) throw Error(ErrorCategory::parse, "unknown config key '" + key + "'");
  }
  if (doc.has("spec_path")) spec_path = doc.raw("spec_path");
  if (doc.has("seed")) seed = as_count(doc, "seed");
  if (doc.has("n_experimental")) n_experimental = as_count(doc, "n_experimental");
  if (doc.has("n_observational")) n_observational = as_count(doc, "n_observational");
  if (doc.has("threshold")) threshold = as_count(doc, "threshold");
  if (doc.has("train_fraction")) train_fraction = doc.get_double("train_fraction");
  if (doc.has("iterations")) iterations = as_count(doc, "iterations");
  if (doc.has("learning_rate")) learning_rate = doc.get_double("learning_rate");
  if (doc.has("hidden_width")) hidden_width = as_count(doc, "hidden_width");
  if (doc.has("optimizer")) optimizer = parse_optimizer(doc.raw("optimizer"));
  if (doc.has("binary")) binary = as_bool(doc, "binary");
  if (doc.has("plot_samples")) plot_samples = as_count(doc, "plot_samples");
  if (doc.has("output_dir")) output_dir = doc.raw("output_dir");
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  PipelineConfig cfg;
  cfg.apply(KvDocument::load(path));
  return cfg;
}

void PipelineConfig::validate() const {
  auto bad = [](const std::string& why) { throw Error(ErrorCategory::invalid_argument, why); };
  if (n_experimental == 0 || n_observational == 0) bad("sample counts must be positive");
  if (threshold < 1) bad("threshold must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) bad("train_fraction must lie in (0,1)");
  if (iterations == 0) bad("iterations must be positive");
  if (!(learning_rate > 0.0)) bad("learning_rate must be positive");
  if (hidden_width == 0) bad("hidden_width must be positive");
  if (plot_samples > kNumSubpopulations) bad("plot_samples exceeds the subpopulation count");
}

std::string PipelineConfig::canonical() const {
  std::ostringstream out;
  out << "binary = " << (binary ? "true" : "false") << '\n'
      << "hidden_width = " << hidden_width << '\n'
      << "iterations = " << iterations << '\n'
      << "learning_rate = " << format_double(learning_rate) << '\n'
      << "n_experimental = " << n_experimental << '\n'
      << "n_observational = " << n_observational << '\n'
      << "optimizer = " << to_string(optimizer) << '\n'
      << "plot_samples = " << plot_samples << '\n'
      << "seed = " << seed << '\n'
      << "spec_path = " << spec_path.string() << '\n'
      << "threshold = " << threshold << '\n'
      << "train_fraction = " << format_double(train_fraction) << '\n';
  return out.str();
}

const char* to_string(Stage s) {
  switch (s) {
    case Stage::informer: return "informer";
    case Stage::generate: return "generate";
    case Stage::label: return "label";
    case Stage::train: return "train";
    case Stage::evaluate: return "evaluate";
  }
  return "?";
}

Stage parse_stage(const std::string& name) {
  for (Stage s : kAllStages) {
    if (name == to_string(s)) return s;
  }
  throw Error(ErrorCategory::usage, "unknown stage '" + name + "'");
}

std::uint64_t stage_seed(std::uint64_t master, Stage s) {
  return derive_key(master, tag_of(std::string("stage:") + to_string(s)));
}

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::io, "cannot open " + path.string());
  std::uint64_t h = 0xCBF29CE484222325ull;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001B3ull;
    }
  }
  char hex[32];
  std::snprintf(hex, sizeof hex, "%016" PRIx64, h);
  return std::string("fnv1a64:") + hex;
}

namespace {

constexpr const char* kManifest = "manifest.json";

struct StageShape {
  std::vector<Stage> parents;
  std::vector<std::string> config_keys;
};

std::string experimental_file(const PipelineConfig& c) {
  return c.binary ? "experimental.bin" : "experimental.tsv";
}
std::string observational_file(const PipelineConfig& c) {
  return c.binary ? "observational.bin" : "observational.tsv";
}

StageShape shape_of(Stage s) {
  switch (s) {
    case Stage::informer: return {{}, {"spec"}};
    case Stage::generate: return {{}, {"spec", "seed", "n_experimental", "n_observational", "binary"}};
    case Stage::label: return {{Stage::generate}, {"seed", "threshold", "train_fraction"}};
    case Stage::train:
      return {{Stage::label}, {"seed", "iterations", "learning_rate", "hidden_width", "optimizer"}};
    case Stage::evaluate: return {{Stage::informer, Stage::train}, {"seed", "plot_samples"}};
  }
  return {};
}

// The values a stage depends on. The model enters through its digest so a
// moved but identical spec file is not stale.
json stage_config(Stage s, const PipelineConfig& c) {
  json all = {{"seed", c.seed},
              {"n_experimental", c.n_experimental},
              {"n_observational", c.n_observational},
              {"binary", c.binary},
              {"threshold", c.threshold},
              {"train_fraction", format_double(c.train_fraction)},
              {"iterations", c.iterations},
              {"learning_rate", format_double(c.learning_rate)},
              {"hidden_width", c.hidden_width},
              {"optimizer", to_string(c.optimizer)},
              {"plot_samples", c.plot_samples}};
  json out = json::object();
  for (const auto& key : shape_of(s).config_keys) {
    out[key] = key == "spec" ? json(file_digest(c.spec_path)) : all.at(key);
  }
  return out;
}

std::string hash_text(const std::string& text) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001B3ull;
  }
  char hex[32];
  std::snprintf(hex, sizeof hex, "%016" PRIx64, h);
  return std::string("fnv1a64:") + hex;
}

json load_manifest(const fs::path& dir) {
  const fs::path p = dir / kManifest;
  if (!fs::exists(p)) return json{{"version", 1}, {"stages", json::object()}};
  try {
    return json::parse(read_file(p));
  } catch (const json::exception& e) {
    throw Error(ErrorCategory::parse, p.string() + ": " + e.what());
  }
}

void save_manifest(const fs::path& dir, const json& m) {
  write_file(dir / kManifest, m.dump(2) + "\n");
}

// Every ancestor must have run with the current config, its outputs must be
// unchanged, and its recorded inputs must be its parents' recorded outputs.
void check_ancestry(Stage stage, const PipelineConfig& cfg, const json& manifest) {
  std::vector<Stage> pending = shape_of(stage).parents;
  std::set<Stage> visited;
  const json& stages = manifest.at("stages");
  while (!pending.empty()) {
    const Stage a = pending.back();
    pending.pop_back();
    if (!visited.insert(a).second) continue;
    const std::string name = to_string(a);
    if (!stages.contains(name)) {
      throw Error(ErrorCategory::missing_prerequisite, std::string("stage '") + to_string(stage) +
                                                           "' needs outputs of '" + name +
                                                           "'; run '" + name + "' first");
    }
    const json& rec = stages.at(name);
    for (const auto& [file, digest] : rec.at("outputs").items()) {
      const fs::path p = cfg.output_dir / file;
      if (!fs::exists(p)) {
        throw Error(ErrorCategory::missing_prerequisite,
                    p.string() + " is missing; run '" + name + "' first");
      }
      if (file_digest(p) != digest.get<std::string>()) {
        throw Error(ErrorCategory::stale,
                    p.string() + " changed since '" + name + "' ran; rerun '" + name + "'");
      }
    }
    if (rec.at("config") != stage_config(a, cfg)) {
      throw Error(ErrorCategory::stale, "config differs from the one '" + name +
                                            "' ran with; rerun '" + name + "'");
    }
    for (Stage p : shape_of(a).parents) {
      const std::string pname = to_string(p);
      if (!stages.contains(pname)) continue;  // reported when p is visited
      std::size_t consumed = 0;
      bool fresh = true;
      for (const auto& [file, digest] : stages.at(pname).at("outputs").items()) {
        if (!rec.at("inputs").contains(file)) continue;
        ++consumed;
        fresh = fresh && rec.at("inputs").at(file) == digest;
      }
      if (consumed == 0 || !fresh) {
        throw Error(ErrorCategory::stale, "'" + name + "' ran on older outputs of '" + pname +
                                              "'; rerun '" + name + "'");
      }
      pending.push_back(p);
    }
  }
}

struct Artifacts {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

Artifacts run_informer(const PipelineConfig& cfg, StageReport& rep) {
  const ModelSpec spec = ModelSpec::load(cfg.spec_path);
  const auto rows = all_subpop_truths(spec);
  std::size_t crossed = 0;
  for (const auto& r : rows) crossed += r.bounds.crossed;
  write_informer_table(cfg.output_dir / "informer.tsv", rows);
  rep.log.push_back("informer: " + std::to_string(rows.size()) + " subpopulations, " +
                    std::to_string(crossed) + " crossed");
  return {{}, {"informer.tsv"}};
}

Artifacts run_generate(const PipelineConfig& cfg, StageReport& rep) {
  const ModelSpec spec = ModelSpec::load(cfg.spec_path);
  GenConfig g{cfg.n_experimental, cfg.n_observational, stage_seed(cfg.seed, Stage::generate)};
  const auto fmt = cfg.binary ? RecordFormat::binary : RecordFormat::text;
  write_records(cfg.output_dir / experimental_file(cfg), sample_experimental(spec, g), fmt);
  write_records(cfg.output_dir / observational_file(cfg), sample_observational(spec, g), fmt);
  rep.log.push_back("generate: " + std::to_string(g.n_experimental) + " experimental, " +
                    std::to_string(g.n_observational) + " observational records");
  return {{}, {experimental_file(cfg), observational_file(cfg)}};
}

Artifacts run_label(const PipelineConfig& cfg, StageReport& rep) {
  const fs::path ep = cfg.output_dir / experimental_file(cfg);
  const fs::path op = cfg.output_dir / observational_file(cfg);
  const auto table = tally(read_records(ep, format_for(ep)), read_records(op, format_for(op)));
  const auto estimates = accepted_estimates(table, cfg.threshold);
  const LabelSet set = make_labels(estimates);
  std::ostringstream log;
  log << "accepted\t" << set.accepted << "\nlabels\t" << set.labels.size() << "\ncrossed\t"
      << set.crossed.size() << '\n';
  for (const auto& c : set.crossed) {
    log << "crossed_subpopulation\t" << c.index() << '\n';
    rep.log.push_back("label: excluded crossed estimate at subpopulation " +
                      std::to_string(c.index()));
  }
  write_file(cfg.output_dir / "label_report.tsv", log.str());
  if (set.labels.empty()) {
    throw Error(ErrorCategory::insufficient_data,
                "no subpopulation passed the threshold of " + std::to_string(cfg.threshold));
  }
  const LabelSplit s = split(set.labels, cfg.train_fraction, stage_seed(cfg.seed, Stage::label));
  write_labels(cfg.output_dir / "labels.tsv", set.labels);
  write_index_file(cfg.output_dir / "train.idx", s.train);
  write_index_file(cfg.output_dir / "test.idx", s.test);
  rep.log.push_back("label: " + std::to_string(set.accepted) + " accepted, " +
                    std::to_string(set.labels.size()) + " labels, split " +
                    std::to_string(s.train.size()) + " train / " + std::to_string(s.test.size()) +
                    " test");
  return {{experimental_file(cfg), observational_file(cfg)},
          {"labels.tsv", "train.idx", "test.idx", "label_report.tsv"}};
}

std::vector<LabeledExample> select_labels(const std::vector<LabeledExample>& labels,
                                          const std::vector<std::uint32_t>& indices) {
  std::vector<LabeledExample> by_index(kNumSubpopulations);
  std::vector<bool> present(kNumSubpopulations, false);
  for (const auto& l : labels) {
    by_index[l.subpop.index()] = l;
    present[l.subpop.index()] = true;
  }
  std::vector<LabeledExample> out;
  for (auto i : indices) {
    if (i >= kNumSubpopulations || !present[i]) {
      throw Error(ErrorCategory::parse, "split index " + std::to_string(i) + " has no label");
    }
    out.push_back(by_index[i]);
  }
  return out;
}

Artifacts run_train(const PipelineConfig& cfg, StageReport& rep) {
  const auto labels = read_labels(cfg.output_dir / "labels.tsv");
  const auto train_set = select_labels(labels, read_index_file(cfg.output_dir / "train.idx"));
  if (train_set.empty()) throw Error(ErrorCategory::insufficient_data, "empty training split");
  TrainConfig tc;
  tc.iterations = cfg.iterations;
  tc.learning_rate = cfg.learning_rate;
  tc.optimizer = cfg.optimizer;
  tc.seed = stage_seed(cfg.seed, Stage::train);
  const Network init = Network::init(Network::default_dims(cfg.hidden_width), tc.seed);
  const TrainResult res = train(init, Batch::from_labels(train_set), tc);
  res.net.save(cfg.output_dir / "model.txt");
  std::ostringstream trace;
  trace << "iteration\tloss\n";
  for (std::size_t i = 0; i < res.loss_trace.size(); ++i) {
    trace << i << '\t' << format_double(res.loss_trace[i]) << '\n';
  }
  write_file(cfg.output_dir / "loss.tsv", trace.str());
  rep.log.push_back("train: " + std::to_string(train_set.size()) + " examples, loss " +
                    format_double(res.loss_trace.front()) + " -> " +
                    format_double(res.loss_trace.back()));
  return {{"labels.tsv", "train.idx"}, {"model.txt", "loss.tsv"}};
}

Artifacts run_evaluate(const PipelineConfig& cfg, StageReport& rep) {
  const auto truths = read_informer_table(cfg.output_dir / "informer.tsv");
  const Network net = Network::load(cfg.output_dir / "model.txt");
  const auto preds = predict_all(net);
  write_predictions(cfg.output_dir / "predictions.tsv", preds);
  const auto rows = join_rows(preds, truths);
  const auto train_idx = read_index_file(cfg.output_dir / "train.idx");
  const auto test_idx = read_index_file(cfg.output_dir / "test.idx");

  EvaluationSummary s;
  s.all = population_errors(rows);
  s.violations_all = violation_stats(rows);
  s.n_train = train_idx.size();
  s.n_test = test_idx.size();
  if (!train_idx.empty()) s.train = average_errors(select_rows(rows, train_idx));
  if (!test_idx.empty()) {
    const auto test_rows = select_rows(rows, test_idx);
    s.test = average_errors(test_rows);
    s.violations_test = violation_stats(test_rows);
  }
  write_file(cfg.output_dir / "metrics.tsv", metrics_tsv(s));
  write_file(cfg.output_dir / "report.txt", report_text(s));
  write_plot_files(cfg.output_dir,
                   plot_sample(rows, cfg.plot_samples, stage_seed(cfg.seed, Stage::evaluate)));
  rep.log.push_back("evaluate: mean abs error lower " + format_double(s.all.lower) + ", upper " +
                    format_double(s.all.upper) + " over all subpopulations");
  return {{"informer.tsv", "model.txt", "train.idx", "test.idx"},
          {"predictions.tsv", "metrics.tsv", "report.txt", "plot_lower.tsv", "plot_upper.tsv"}};
}

}  // namespace

StageReport run_stage(Stage stage, const PipelineConfig& cfg) {
  cfg.validate();
  if (!fs::exists(cfg.spec_path)) {
    throw Error(ErrorCategory::io, "model spec not found: " + cfg.spec_path.string());
  }
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw Error(ErrorCategory::io, "cannot create " + cfg.output_dir.string());

  json manifest = load_manifest(cfg.output_dir);
  check_ancestry(stage, cfg, manifest);

  StageReport rep{stage, {}};
  Artifacts art;
  switch (stage) {
    case Stage::informer: art = run_informer(cfg, rep); break;
    case Stage::generate: art = run_generate(cfg, rep); break;
    case Stage::label: art = run_label(cfg, rep); break;
    case Stage::train: art = run_train(cfg, rep); break;
    case Stage::evaluate: art = run_evaluate(cfg, rep); break;
  }

  json rec;
  rec["config"] = stage_config(stage, cfg);
  rec["config_hash"] = hash_text(rec["config"].dump());
  rec["inputs"] = json::object();
  for (const auto& f : art.inputs) rec["inputs"][f] = file_digest(cfg.output_dir / f);
  if (stage == Stage::informer || stage == Stage::generate) {
    rec["inputs"]["spec"] = file_digest(cfg.spec_path);
  }
  rec["outputs"] = json::object();
  for (const auto& f : art.outputs) rec["outputs"][f] = file_digest(cfg.output_dir / f);

  manifest["stages"][to_string(stage)] = rec;
  manifest["effective_config"] = cfg.canonical();
  manifest["effective_config_hash"] = hash_text(cfg.canonical());
  save_manifest(cfg.output_dir, manifest);
  return rep;
}

std::vector<StageReport> reproduce(const PipelineConfig& cfg) {
  std::vector<StageReport> out;
  for (Stage s : kAllStages) out.push_back(run_stage(s, cfg));
  return out;
}

}  // namespace causelab
