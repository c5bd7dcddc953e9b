#pragma once

#include <numbers>
#include <span>
#include <vector>

#include "rase/gaussian.hpp"

namespace rase {

/// Inverted gain feature as seen by the detection chain.
///
/// alpha_l is the optical depth of the feature (e^{alpha_l} is the intensity
/// gain), transmission_l the detection-chain intensity transmission applied to
/// both fields, and reph_transmission the extra intensity transmission applied
/// to the rephased field only. linewidth_hz is carried as metadata.
struct GainFeature {
  GainFeature(double alpha_l, double transmission_l, double reph_transmission = 1.0,
              double linewidth_hz = 200e3);
  double alpha_l;
  double transmission_l;
  double reph_transmission;
  double linewidth_hz;
};

/// Exponential-decay rescaling between two recall delays.
struct DecayScaling {
  enum class Kind { Intensity, Amplitude };
  DecayScaling(double tau_us, double t_ref_us, double t_target_us,
               Kind kind = Kind::Intensity);
  double tau_us;
  double t_ref_us;
  double t_target_us;
  Kind kind;
};

struct InsepPoint {
  double b;
  double total_variance;
};

// Squeeze parameter realizing intensity gain e^{alpha_l}: cosh^2 r = e^{alpha_l}.
double squeeze_for_gain(double alpha_l);

// Mean ASE quadrature variance (vacuum-normalized) of a feature with gain
// e^{alpha_l} seen through chain transmission l:
//   l * (2 e^{alpha_l} - 1) + (1 - l).
double ase_variance(const GainFeature& g);

// Intrinsic rephasing efficiency model, the ratio of recalled to amplified
// mean photon number:
//   (1 + 8 sinh^2(alpha_l / 2) - 2) / (2 e^{alpha_l} - 2).
// The numerator changes sign at alpha_l = ln 2; below that the model value is
// negative and callers should treat the regime as outside the model's
// validity (see rase_efficiency_defined).
double rase_efficiency(double alpha_l);

// Smallest optical depth for which the efficiency model is non-negative.
inline constexpr double kEfficiencyModelMinAlpha = std::numbers::ln2;

inline bool rase_efficiency_defined(double alpha_l) {
  return alpha_l >= kEfficiencyModelMinAlpha;
}

// Rescale an efficiency measured at delay t_ref to delay t_target using the
// optical decay constant tau. Kind selects whether tau is an intensity or a
// field-amplitude decay time (intensity decays twice as fast in the latter).
double scale_efficiency(double eta, const DecayScaling& d);

// Joint ASE/RASE state: two-mode squeezed vacuum at the feature gain,
// transmission l on both arms, extra transmission reph_transmission on the
// RASE arm. Mode 0 is ASE, mode 1 is RASE.
GaussianState lossy_tmsv_state(const GainFeature& g);

// Total EPR variance  <(d u)^2> + <(d v)^2>  with
//   u = sqrt(b) x_A + sqrt(1-b) x_R,   v = sqrt(b) p_A - sqrt(1-b) p_R
// evaluated on lossy_tmsv_state(g) for each b in the grid. Any separable
// state satisfies total >= 2; at b = 0 the total is twice the RASE arm
// variance, at b = 1 twice the ASE arm variance.
std::vector<InsepPoint> insep_curve(const GainFeature& g, std::span<const double> b_grid);

// Minimizing weight and value of the curve above. Golden-section search to
// |db| <= 1e-5 with ties broken toward smaller b; a 1001-point grid scan
// guards against non-unimodal inputs.
InsepPoint find_min_b(const GainFeature& g);

}  // namespace rase
