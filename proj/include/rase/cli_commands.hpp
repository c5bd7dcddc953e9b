#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "rase/config.hpp"

namespace rase {

/// Output base directory: explicit flag first, then the config's out_dir,
/// then $RASE_OUT_ROOT, then ./rase_out.
std::string resolve_out_dir(const std::string& cli_out, const ExperimentConfig& cfg,
                            const std::string& subcommand);

/// Model curve tables: ASE variance vs optical depth, efficiency vs optical
/// depth, inseparability vs weight b, plus the level-scheme metadata table.
void cmd_curves(const ExperimentConfig& cfg, const std::string& out_dir);

struct SimulateResult {
  std::string dump_path;
  std::string background_path;  // empty unless background_shots > 0
  std::string manifest_path;
  std::uint64_t config_hash = 0;
};

/// Synthesize a run and write the record dump plus a manifest. The dump bytes
/// are fully determined by (config, seed); only the manifest carries a
/// timestamp.
SimulateResult cmd_simulate(const ExperimentConfig& cfg, const std::string& out_dir,
                            int n_threads = 1);

struct AnalyzeOverrides {
  std::optional<double> window_us;
  std::optional<bool> bootstrap;
  std::string background_dump;  // empirical vacuum normalization when given
};

/// Post-process a record dump: per-shot quadratures, variance summaries, the
/// efficiency point and (RASE kind) the inseparability curve with its
/// sigma-violation. The dump's embedded config echo drives the analysis.
void cmd_analyze(const std::string& dump_path, const AnalyzeOverrides& overrides,
                 const std::string& out_dir);

/// Fit the chain transmission to a variance-vs-depth table (CSV columns
/// alpha_l, variance[, se]) and re-derive each point's optical depth from its
/// ASE variance, flagging untrusted probe depths.
void cmd_fit(const std::string& table_path, const std::string& out_dir);

}  // namespace rase
