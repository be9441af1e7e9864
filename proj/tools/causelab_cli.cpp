// causelab: stage-by-stage driver for learning PNS bounds of subpopulations.
//
//   causelab informer|generate|label|train|evaluate|reproduce [flags]
//
// On failure prints one line "error: <category>: <message>" to stderr and
// exits with a nonzero, category-specific status.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "causelab/error.hpp"
#include "causelab/pipeline.hpp"

using namespace causelab;

namespace {

struct Flags {
  std::string config;
  std::string seed, out_dir, spec, n_exp, n_obs, threshold, train_fraction;
  std::string iterations, learning_rate, hidden_width, optimizer, plot_samples;
  bool binary = false;
};

void add_flags(CLI::App& cmd, Flags& f) {
  cmd.add_option("--config", f.config, "Key/value config file; flags override it");
  cmd.add_option("--seed", f.seed, "Master seed for every stage");
  cmd.add_option("--out-dir", f.out_dir, "Directory for stage artifacts");
  cmd.add_option("--spec", f.spec, "Model spec file (default: bundled model)");
  cmd.add_option("--n-exp", f.n_exp, "Experimental sample count");
  cmd.add_option("--n-obs", f.n_obs, "Observational sample count");
  cmd.add_flag("--binary", f.binary, "Write samples as packed 3-byte records (.bin)");
  cmd.add_option("--threshold", f.threshold, "Minimum (exclusive) per-regime count for a label");
  cmd.add_option("--train-fraction", f.train_fraction, "Fraction of labels used for training");
  cmd.add_option("--iterations", f.iterations, "Full-batch training steps");
  cmd.add_option("--learning-rate", f.learning_rate, "Step size");
  cmd.add_option("--hidden-width", f.hidden_width, "Width of the three hidden layers");
  cmd.add_option("--optimizer", f.optimizer, "adam or gradient_descent");
  cmd.add_option("--plot-samples", f.plot_samples, "Subpopulations in the plot files");
}

PipelineConfig effective_config(const Flags& f) {
  PipelineConfig cfg;
  if (!f.config.empty()) cfg = PipelineConfig::load(f.config);
  KvDocument overrides;
  auto put = [&](const char* key, const std::string& v) {
    if (!v.empty()) overrides.set(key, v);
  };
  put("seed", f.seed);
  put("output_dir", f.out_dir);
  put("spec_path", f.spec);
  put("n_experimental", f.n_exp);
  put("n_observational", f.n_obs);
  put("threshold", f.threshold);
  put("train_fraction", f.train_fraction);
  put("iterations", f.iterations);
  put("learning_rate", f.learning_rate);
  put("hidden_width", f.hidden_width);
  put("optimizer", f.optimizer);
  put("plot_samples", f.plot_samples);
  if (f.binary) overrides.set("binary", "true");
  cfg.apply(overrides);
  return cfg;
}

void print(const StageReport& r) {
  for (const auto& line : r.log) std::cout << line << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn bounds on the probability of necessity and sufficiency for subpopulations"};
  app.require_subcommand(1);
  Flags flags;
  const char* stages[][2] = {
      {"informer", "Exact bounds and PNS for every subpopulation"},
      {"generate", "Seeded experimental and observational samples"},
      {"label", "Frequency estimates and bound labels, train/test split"},
      {"train", "Fit the regressor on the training labels"},
      {"evaluate", "Compare predictions with the exact bounds"},
      {"reproduce", "Run every stage in order"},
  };
  for (auto& s : stages) add_flags(*app.add_subcommand(s[0], s[1]), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << '\n';
    return exit_code(ErrorCategory::usage);
  }

  try {
    const PipelineConfig cfg = effective_config(flags);
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "reproduce") {
      for (const auto& r : reproduce(cfg)) print(r);
      std::cout << "report: " << (cfg.output_dir / "report.txt").string() << '\n';
    } else {
      print(run_stage(parse_stage(cmd), cfg));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << category_name(e.category()) << ": " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
