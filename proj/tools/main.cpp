#include "viewplan/experiment.hpp"
#include "viewplan/errors.hpp"
#include "viewplan/io.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool quiet = false;
};

void add_common(CLI::App& sub, CommonFlags& flags) {
  sub.add_option("--config", flags.config, "experiment configuration (JSON)")->required();
  sub.add_option("--out", flags.out, "output directory (overrides output_dir)");
  sub.add_option("--seed", flags.seed, "global seed (overrides seed)");
  sub.add_option("--jobs", flags.jobs, "worker threads for independent runs")->check(CLI::PositiveNumber);
  sub.add_flag("--quiet", flags.quiet, "suppress progress lines");
}

int run(viewplan::ExperimentKind kind, const CommonFlags& flags, const CLI::App& sub) {
  using namespace viewplan;
  try {
    const ExperimentConfig config = load_config(flags.config);
    RunOptions options;
    options.kind = kind;
    options.jobs = flags.jobs;
    if (sub.count("--out")) options.out = flags.out;
    if (sub.count("--seed")) options.seed = flags.seed;
    if (!flags.quiet) options.log = &std::cerr;
    const ExperimentResult result = run_experiment(config, options);
    if (result.chamfer) std::cout << "chamfer_distance " << format_double(*result.chamfer) << "\n";
    for (const auto& row : result.summary)
      std::cout << row.scene << " sigma=" << format_double(row.sigma) << " median_cd_x100="
                << format_double(row.median_cd_x100) << " mean_cd_x100=" << format_double(row.mean_cd_x100)
                << " std=" << format_double(row.std_cd_x100) << "\n";
    for (const auto& artifact : result.artifacts) std::cout << "wrote " << artifact.generic_string() << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SpotCheckError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSpotCheck;
  } catch (const ExperimentFailed& e) {
    std::cerr << "error: run failed, see failure.json: " << e.what() << "\n";
    return kExitRunFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  using viewplan::ExperimentKind;
  CLI::App app{"Camera view planning experiments: ensemble-GP Bayesian optimization and baselines"};
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
    ExperimentKind kind;
  };
  const Command commands[] = {
      {"generate", "write synthetic scene reference clouds", ExperimentKind::kGenerate},
      {"optimize", "run BOSfM on every scene and seed", ExperimentKind::kOptimize},
      {"baseline", "run the configured baselines", ExperimentKind::kBaseline},
      {"evaluate", "score a stored plan on a stored scene", ExperimentKind::kEvaluate},
      {"regret", "BOSfM traces and simple-regret curves", ExperimentKind::kRegret},
      {"compare", "report table over circle, MCP, geometric-BO and BOSfM", ExperimentKind::kCompare},
      {"sweep-input-noise", "BOSfM across an input-noise grid", ExperimentKind::kSweepInputNoise},
      {"sweep-image-noise", "transferred plans across an image-noise grid", ExperimentKind::kSweepImageNoise},
      {"generalize", "transfer the trained plan to changed scenes", ExperimentKind::kGeneralize},
  };
  std::vector<std::pair<CLI::App*, ExperimentKind>> subs;
  std::vector<CommonFlags> flags(std::size(commands));
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    CLI::App* sub = app.add_subcommand(commands[i].name, commands[i].help);
    add_common(*sub, flags[i]);
    subs.emplace_back(sub, commands[i].kind);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : viewplan::kExitConfig;
  }
  for (std::size_t i = 0; i < subs.size(); ++i)
    if (subs[i].first->parsed()) return run(subs[i].second, flags[i], *subs[i].first);
  return viewplan::kExitFailure;
}
