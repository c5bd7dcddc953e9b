#pragma once

#include <cstddef>
#include <cstdint>

#include "rase/model.hpp"

namespace rase {

enum class SequenceKind { Rase, I4le };

enum class FieldKind { Ase, Rase };

/// Weak coherent input pulse seeding the I4LE variant. The amplitude is the
/// detected quadrature amplitude of the pulse mode before gain and loss,
/// in vacuum-normalized units.
struct InputPulse {
  double amplitude = 30.0;
  double length_us = 1.0;
};

/// Classical phase-reference pulse appended after the signal windows. The
/// default amplitude (40 vacuum units) keeps the phase-estimation error well
/// below the quantum noise.
struct RefPulse {
  double amplitude = 40.0;
  double length_us = 2.0;
  double phase_rad = 0.0;
};

/// Full shot timeline and detection parameters for one run.
///
/// The timeline is: ASE window, pi1, spin storage tau_s, pi2, RASE window,
/// then two reference pulses (one per field frequency). Each signal window is
/// treated as a single temporal mode at its intermediate frequency.
struct SequenceConfig {
  SequenceKind kind = SequenceKind::Rase;

  // Defaults target the storage run this toolkit reproduces: optical depth
  // 0.8 through an 11 % detection chain, with the rephasing transmission
  // fitted to the observed inseparability minimum.
  GainFeature gain{0.8, 0.11, 0.0715};

  double ase_window_us = 10.0;
  double rase_window_us = 10.0;
  double tau_s_us = 5.0;
  double pi1_len_us = 1.7;
  double pi2_len_us = 2.5;

  double ase_if_hz = 2.0e6;
  double rase_if_hz = -2.0e6;
  double sample_rate_hz = 20.0e6;

  InputPulse input_pulse;
  RefPulse ref_pulse;

  int n_shots = 9000;
  std::uint64_t rng_seed = 1;

  // Throws std::invalid_argument on any violated invariant.
  void validate() const;
};

/// Detection noise description. vacuum_psd sets the white-noise scale such
/// that a demodulated vacuum quadrature has variance vacuum_psd; estimators
/// divide it back out, so the end-to-end vacuum variance is 1 regardless.
/// excess_noise adds that many vacuum units of white noise on top.
struct NoiseModel {
  double vacuum_psd = 1.0;
  double excess_noise = 0.0;
  double visibility = 0.90;
  // The default chain transmission already folds in the detection visibility;
  // set this to apply visibility^2 as an explicit extra transmission instead.
  bool visibility_separate = false;

  void validate() const;
};

struct WindowSpan {
  std::size_t begin = 0;  // first sample index
  std::size_t end = 0;    // one past last
  std::size_t size() const { return end - begin; }
};

/// Sample-index layout of one shot record.
struct SequenceLayout {
  std::size_t n_samples = 0;
  double sample_rate_hz = 0.0;
  WindowSpan ase;
  WindowSpan rase;
  WindowSpan input;  // I4LE input pulse, leading part of the ASE window
  WindowSpan echo;   // I4LE echo, leading part of the RASE window
  WindowSpan ref1;   // reference pulse at the ASE frequency
  WindowSpan ref2;   // reference pulse at the RASE frequency

  static SequenceLayout from(const SequenceConfig& cfg);
};

}  // namespace rase
