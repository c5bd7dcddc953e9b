#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rase/synth.hpp"

namespace rase {

enum class WindowFn { Rect, Hann };

/// Analysis window for quadrature extraction: where to demodulate (the field's
/// intermediate frequency), which slice of the detection window to use, and
/// the weighting function. span_hz is the spectral integration range used by
/// the power-spectrum view; the matched filter's own bandwidth is set by the
/// time window.
struct SpectralWindow {
  double center_hz = 0.0;
  double span_hz = 100e3;
  double time_window_us = 0.0;  // <= 0 means the full detection window
  double start_offset_us = 0.0;
  WindowFn window_function = WindowFn::Rect;
};

/// Vacuum-normalized quadratures of one field in one shot.
struct QuadraturePair {
  FieldKind field = FieldKind::Ase;
  double x = 0.0;
  double p = 0.0;
  std::uint64_t shot_id = 0;
};

struct PhaseEstimate {
  double phase_rad = 0.0;
  double ref_power = 0.0;  // mean demodulated reference power, vacuum units
  bool low_confidence = false;
};

struct VarianceEstimate {
  double mean_var = 0.0;  // average of the x and p sample variances
  double se = 0.0;        // 1 sigma, Gaussian statistics, n_eff = 2 n
  std::size_t n_shots = 0;
};

struct EfficiencyEstimate {
  double eta = 0.0;
  double se = 0.0;
};

/// Per-run empirical normalization factors measured from no-inversion shots;
/// multiply extracted quadratures by these. Defaults to the nominal (unit)
/// calibration.
struct VacuumNormalization {
  double ase_scale = 1.0;
  double rase_scale = 1.0;
};

// Kept below this factor times the vacuum level, the reference pulses are too
// dim to trust the phase estimate.
inline constexpr double kRefPowerFloor = 5.0;

/// Interferometer phase from the two reference pulses. low_confidence is set
/// when the mean demodulated reference power is below kRefPowerFloor times
/// the vacuum level (e.g. zero reference amplitude).
PhaseEstimate estimate_phase(const ShotRecord& rec, const SequenceConfig& cfg,
                             const NoiseModel& noise);

/// Matched-filter quadratures of one field: demodulate at the window's center
/// frequency with the chosen weighting over the chosen time slice, rotate by
/// -phase_rad, normalize so a vacuum input has unit variance.
QuadraturePair extract_quadratures(const ShotRecord& rec, const SequenceConfig& cfg,
                                   const NoiseModel& noise, FieldKind field,
                                   const SpectralWindow& window, double phase_rad,
                                   const VacuumNormalization& norm = {});

// Default analysis window for a field (full detection window, rect weight,
// centered on the field's intermediate frequency).
SpectralWindow default_window(const SequenceConfig& cfg, FieldKind field);

/// Unbiased sample variance pooled over x and p, with standard error from the
/// chi-squared sampling distribution (n_eff = 2 n samples). Requires n >= 2.
VarianceEstimate variance_of(std::span<const QuadraturePair> pairs);

/// eta = (rase.mean_var - 1) / (ase.mean_var - 1), first-order error
/// propagation. Throws NumericalError when ase.mean_var <= 1 (no gain).
EfficiencyEstimate efficiency_from_runs(const VarianceEstimate& ase,
                                        const VarianceEstimate& rase);

/// Integrated matched-filter power of a pulse window over the spectral span,
/// with the analytic vacuum bias removed. Used for I4LE area ratios.
double pulse_spectral_area(const ShotRecord& rec, const SequenceConfig& cfg,
                           const NoiseModel& noise, FieldKind field, double span_hz = 100e3);

/// Empirical vacuum calibration from no-inversion records: scales that bring
/// the measured background variance of each field to 1 under the given window.
VacuumNormalization calibrate_vacuum(std::span<const ShotRecord> background,
                                     const SequenceConfig& cfg, const NoiseModel& noise,
                                     const SpectralWindow& ase_window,
                                     const SpectralWindow& rase_window);

// Deterministic pairwise summation; reduction order is fixed by the input
// order regardless of how the data were produced.
double pairwise_sum(std::span<const double> values);

}  // namespace rase
