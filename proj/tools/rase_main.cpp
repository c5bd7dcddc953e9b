#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "rase/cli_commands.hpp"
#include "rase/errors.hpp"
#include "rase/version.hpp"

namespace {

// Exit codes: 0 success, 2 usage/config, 3 data format, 4 numerical failure.
int run(int argc, char** argv) {
  CLI::App app{"Simulator and analysis toolkit for rephased-ASE heterodyne experiments"};
  app.set_version_flag("--version", rase::kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();  // accept the global flags after the subcommand name too

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> shots;
  app.add_option("--config", config_path, "Experiment config file (.cfg text or .json)")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Override the RNG seed");
  app.add_option("--shots", shots, "Override the shot count");
  app.add_option("--out", out_dir, "Output directory (default: config, then $RASE_OUT_ROOT)");

  auto* curves = app.add_subcommand("curves", "Write the analytic model curve tables");

  auto* simulate = app.add_subcommand("simulate", "Synthesize a run and write the record dump");
  int n_threads = 1;
  simulate->add_option("--threads", n_threads, "Worker threads for shot synthesis")
      ->check(CLI::PositiveNumber);

  auto* analyze = app.add_subcommand("analyze", "Post-process a record dump");
  std::string dump_path;
  std::string background_path;
  std::optional<double> window_us;
  bool bootstrap = false;
  analyze->add_option("dump", dump_path, "Record dump to analyze")
      ->required()
      ->check(CLI::ExistingFile);
  analyze->add_option("--background", background_path,
                      "No-inversion dump for empirical vacuum normalization")
      ->check(CLI::ExistingFile);
  analyze->add_option("--window-us", window_us, "Analysis time window inside each detection window");
  analyze->add_flag("--bootstrap", bootstrap, "Bootstrap standard errors (1000 resamples)");

  auto* fit = app.add_subcommand("fit", "Fit the chain transmission to a variance table");
  std::string table_path;
  fit->add_option("table", table_path, "CSV with columns alpha_l,variance[,se]")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  rase::ExperimentConfig cfg = config_path.empty()
                                   ? rase::ExperimentConfig::paper_defaults()
                                   : rase::load_config_file(config_path);
  if (seed) cfg.sequence.rng_seed = *seed;
  if (shots) cfg.sequence.n_shots = *shots;

  if (curves->parsed()) {
    const std::string dir = rase::resolve_out_dir(out_dir, cfg, "curves");
    rase::cmd_curves(cfg, dir);
    std::cout << "curves written to " << dir << "\n";
  } else if (simulate->parsed()) {
    const std::string dir = rase::resolve_out_dir(out_dir, cfg, "simulate");
    const rase::SimulateResult res = rase::cmd_simulate(cfg, dir, n_threads);
    std::cout << "dump written to " << res.dump_path << "\n";
  } else if (analyze->parsed()) {
    const std::string dir = rase::resolve_out_dir(out_dir, cfg, "analyze");
    rase::AnalyzeOverrides overrides;
    overrides.window_us = window_us;
    if (bootstrap) overrides.bootstrap = true;
    overrides.background_dump = background_path;
    rase::cmd_analyze(dump_path, overrides, dir);
    std::cout << "analysis written to " << dir << "\n";
  } else if (fit->parsed()) {
    const std::string dir = rase::resolve_out_dir(out_dir, cfg, "fit");
    rase::cmd_fit(table_path, dir);
    std::cout << "fit written to " << dir << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const rase::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const rase::DataFormatError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const rase::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
