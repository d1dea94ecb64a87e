#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <thread>

#include "partherm/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitOther = 1;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin-bath thermalization experiments: exact diagonalization against the statistical theory"};
  std::string experiment, config, out_dir = ".";
  std::uint64_t seed = 0;
  int workers = 1;
  bool quiet = false;
  app.add_option("experiment", experiment, "Experiment to run")
      ->required()
      ->check(CLI::IsMember(partherm::experiment_names()));
  app.add_option("--config", config, "INI configuration file")->required();
  auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides experiment.seed)");
  app.add_option("--workers", workers, "Worker threads")->check(CLI::Range(1, 1024));
  app.add_option("--out", out_dir, "Output directory for data.csv and manifest.json");
  app.add_flag("-q,--quiet", quiet, "No progress output");
  app.set_version_flag("--version", partherm::library_version());

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  partherm::ExperimentConfig cfg;
  try {
    cfg = partherm::load_config(config, partherm::parse_experiment(experiment));
    if (*seed_opt) cfg.master_seed = seed;
  } catch (const partherm::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    partherm::ProgressFn progress;
    if (!quiet) {
      progress = [](long done, long total) {
        std::fprintf(stderr, "\r%s: realization %ld/%ld", "partherm", done, total);
        if (done == total) std::fputc('\n', stderr);
      };
    }
    const auto out = partherm::run_experiment(cfg, workers, progress);
    for (const auto& w : out.warnings) std::cerr << "warning: " << w << '\n';
    partherm::write_outputs(out_dir, cfg, out, workers);
    if (!quiet) {
      std::cerr << "wrote " << out.rows.size() << " rows to " << out_dir << "/data.csv (" << out.wall_seconds
                << " s)\n";
    }
  } catch (const partherm::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const partherm::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitOther;
  }
  return kExitOk;
}
