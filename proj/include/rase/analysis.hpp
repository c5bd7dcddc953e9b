#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rase/estimators.hpp"
#include "rase/model.hpp"

namespace rase {

/// One (optical depth, measured ASE variance) observation for the loss fit.
/// se = 0 means unweighted.
struct VariancePoint {
  double alpha_l = 0.0;
  double variance = 1.0;
  double se = 0.0;
};

struct LossFit {
  double transmission_l = 0.0;
  double se = 0.0;
  double chi2 = 0.0;
  std::size_t n_points = 0;
};

/// Weighted least squares for the chain transmission l in
/// variance = 1 + l (2 e^{alpha_l} - 2); linear in l, no intercept.
/// Throws NumericalError for a degenerate design (fewer than 2 points with
/// alpha_l > 0, or all optical depths equal).
LossFit fit_loss(std::span<const VariancePoint> points);

/// Exact inverse of the ASE variance law: alpha_l = ln(1 + (V - 1) / (2 l)).
/// Throws NumericalError when the variance sits below the vacuum level.
double invert_ase_for_alpha(double ase_variance, double transmission_l);

// Optical depths from probe-pulse transmission saturate; probe-style values
// at or above this are flagged untrusted and re-derived from the ASE variance.
inline constexpr double kProbeAlphaTrustLimit = 2.0;

enum class AlphaSource { Probe, AseVariance };

enum class RunKind { Rase, I4leScaled };

/// Per-run inputs for the efficiency curve.
struct RunSummary {
  double alpha_l = 0.0;
  AlphaSource alpha_source = AlphaSource::AseVariance;
  RunKind kind = RunKind::Rase;
  VarianceEstimate ase;
  VarianceEstimate rase;
  // I4LE only: spectral area ratio echo/input and its standard error.
  double i4le_area_ratio = 0.0;
  double i4le_area_ratio_se = 0.0;
};

struct EfficiencyCurvePoint {
  double alpha_l = 0.0;
  double eta_measured = 0.0;
  double eta_se = 0.0;
  double eta_model = 0.0;   // NaN when the model is undefined at this depth
  RunKind kind = RunKind::Rase;
  bool model_defined = false;
  bool untrusted_alpha = false;
};

/// Measured efficiency for each run (variance ratio for RASE, delay-rescaled
/// area ratio for I4LE) with the intrinsic-efficiency model overlay.
std::vector<EfficiencyCurvePoint> build_efficiency_curve(std::span<const RunSummary> runs,
                                                         const DecayScaling& decay);

struct InsepEstimate {
  double b = 0.0;
  double total_variance = 0.0;
  double se = 0.0;
  double sigma_violation = 0.0;  // (2 - total) / se
};

/// EPR total variance per weight b: per shot form
///   u = sqrt(b) x_A + sqrt(1-b) x_R,  v = sqrt(b) p_A - sqrt(1-b) p_R,
/// then total = var(u) + var(v) with Gaussian-statistics standard errors.
/// Shots are paired by shot_id; unpaired inputs raise PairingError.
std::vector<InsepEstimate> estimate_inseparability(std::span<const QuadraturePair> pairs_ase,
                                                   std::span<const QuadraturePair> pairs_rase,
                                                   std::span<const double> b_grid);

struct BootstrapOptions {
  int resamples = 1000;
  std::uint64_t seed = 0x626f6f74;
};

/// Same curve with bootstrap standard errors (shot resampling).
std::vector<InsepEstimate> estimate_inseparability_bootstrap(
    std::span<const QuadraturePair> pairs_ase, std::span<const QuadraturePair> pairs_rase,
    std::span<const double> b_grid, const BootstrapOptions& opts);

/// Leftmost minimum of an estimated curve.
InsepEstimate curve_minimum(std::span<const InsepEstimate> curve);

struct OverlayRow {
  double b = 0.0;
  double measured = 0.0;
  double measured_se = 0.0;
  double model = 0.0;
};

/// Measured curve and the analytic model on a shared b grid, for plotting.
std::vector<OverlayRow> overlay_model(std::span<const InsepEstimate> measured,
                                      const GainFeature& g);

/// reph_transmission such that the analytic inseparability minimum of
/// (alpha_l, transmission_l, t_r) equals target_min. Bisection; the minimum
/// is monotone decreasing in t_r.
double fit_reph_to_minimum(double alpha_l, double transmission_l, double target_min);

/// Probe-measured depths annotated with the trust flag and the ASE-derived
/// re-estimate.
struct AlphaAnnotation {
  double alpha_input = 0.0;
  double alpha_from_ase = 0.0;
  bool untrusted = false;
};

AlphaAnnotation annotate_alpha(double alpha_probe, double ase_variance, double transmission_l);

/// Full post-processing of one run's records: phase correction, quadrature
/// extraction, variance summaries, efficiency and (RASE kind) the
/// inseparability curve.
struct AnalysisOptions {
  double window_us = 0.0;  // <= 0: full detection windows
  WindowFn window_function = WindowFn::Rect;
  double span_hz = 100e3;
  double b_grid_step = 0.01;
  bool bootstrap = false;
  int bootstrap_resamples = 1000;
  bool strict_phase = true;  // throw on low-confidence phase references
};

struct RunAnalysis {
  std::vector<QuadraturePair> ase_pairs;
  std::vector<QuadraturePair> rase_pairs;
  VarianceEstimate ase_var;
  VarianceEstimate rase_var;
  std::optional<EfficiencyEstimate> efficiency;  // absent when ASE shows no gain
  std::vector<InsepEstimate> insep_curve;        // RASE kind only
  InsepEstimate insep_min;
  double i4le_area_ratio = 0.0;  // I4LE kind only
  double i4le_area_ratio_se = 0.0;
};

RunAnalysis analyze_records(std::span<const ShotRecord> records, const SequenceConfig& cfg,
                            const NoiseModel& noise, const AnalysisOptions& opts = {},
                            const VacuumNormalization& norm = {});

}  // namespace rase
