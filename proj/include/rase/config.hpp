#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rase/analysis.hpp"
#include "rase/sequence.hpp"

namespace rase {

/// Hyperfine level scheme metadata: transition labels and relative oscillator
/// strengths. Carried for documentation and output labeling only; the
/// Gaussian model does not consume it.
struct LevelScheme {
  struct Transition {
    std::string ground;
    std::string excited;
    double strength;
  };
  std::vector<Transition> transitions;

  void validate() const;

  // Pr3+:Y2SiO5 site-1 scheme used by the four-level sequence.
  static LevelScheme praseodymium_site1();
};

/// Everything one run needs: shot timeline, noise, decay rescaling and
/// analysis options, plus output routing.
struct ExperimentConfig {
  int format_version = 1;
  SequenceConfig sequence;
  NoiseModel noise;
  DecayScaling decay{59.2, 10.0, 20.0};
  AnalysisOptions analysis;
  // No-inversion calibration shots interleaved with a run; 0 keeps the
  // nominal (analytic) vacuum normalization.
  int background_shots = 0;
  std::string out_dir;
  LevelScheme levels = LevelScheme::praseodymium_site1();

  const GainFeature& gain() const { return sequence.gain; }

  void validate() const;

  // Defaults above mirror the hardware run this toolkit models: 10 us signal
  // windows, 1.7/2.5 us rephasing pulses, 5 us spin storage, 90 % visibility,
  // l = 0.11 chain transmission, 59.2 us optical decay.
  static ExperimentConfig paper_defaults();
};

/// Line-oriented config text: `[section]` headers and `key = value` lines.
/// Unknown sections or keys are rejected with the offending line number.
ExperimentConfig parse_config_text(const std::string& text);
std::string config_to_text(const ExperimentConfig& cfg);

/// JSON equivalents for tooling. Same strictness about unknown keys.
ExperimentConfig parse_config_json(const std::string& json_text);
std::string config_to_json(const ExperimentConfig& cfg);

/// Reads .json or config-text by extension.
ExperimentConfig load_config_file(const std::string& path);

/// FNV-1a over the canonical text form; stable across runs and platforms.
std::uint64_t config_hash(const ExperimentConfig& cfg);

/// Field-by-field comparison (exact; used by round-trip checks).
bool config_equal(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace rase
