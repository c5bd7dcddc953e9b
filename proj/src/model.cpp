#include "rase/model.hpp"

#include <cmath>
#include <stdexcept>

#include "rase/errors.hpp"

namespace rase {

namespace {

void require_unit_interval(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
  }
}

struct ArmStats {
  double var_ase;
  double var_rase;
  double cross;  // |x-x cross covariance|
};

ArmStats arm_stats(const GainFeature& g) {
  const GaussianState st = lossy_tmsv_state(g);
  return ArmStats{quadrature_stats(st, 0).var_x, quadrature_stats(st, 1).var_x,
                  std::abs(st.cov_entry(0, 0, 1, 0))};
}

double total_variance_at(double b, const ArmStats& s) {
  // var(u) = var(v) for this state family, hence the factor 2.
  const double cross = 2.0 * std::sqrt(std::max(0.0, b * (1.0 - b))) * s.cross;
  return 2.0 * (b * s.var_ase + (1.0 - b) * s.var_rase - cross);
}

}  // namespace

GainFeature::GainFeature(double alpha_l_, double transmission_l_, double reph_transmission_,
                         double linewidth_hz_)
    : alpha_l(alpha_l_),
      transmission_l(transmission_l_),
      reph_transmission(reph_transmission_),
      linewidth_hz(linewidth_hz_) {
  if (!(alpha_l >= 0.0)) throw std::invalid_argument("GainFeature: alpha_l must be >= 0");
  require_unit_interval(transmission_l, "GainFeature: transmission_l");
  require_unit_interval(reph_transmission, "GainFeature: reph_transmission");
  if (!(linewidth_hz >= 0.0)) throw std::invalid_argument("GainFeature: linewidth_hz must be >= 0");
}

DecayScaling::DecayScaling(double tau_us_, double t_ref_us_, double t_target_us_, Kind kind_)
    : tau_us(tau_us_), t_ref_us(t_ref_us_), t_target_us(t_target_us_), kind(kind_) {
  if (!(tau_us > 0.0)) throw std::invalid_argument("DecayScaling: tau_us must be > 0");
  if (t_ref_us < 0.0 || t_target_us < 0.0) {
    throw std::invalid_argument("DecayScaling: delays must be >= 0");
  }
}

double squeeze_for_gain(double alpha_l) {
  if (!(alpha_l >= 0.0)) throw std::invalid_argument("squeeze_for_gain: alpha_l must be >= 0");
  return std::acosh(std::sqrt(std::exp(alpha_l)));
}

double ase_variance(const GainFeature& g) {
  return g.transmission_l * (2.0 * std::exp(g.alpha_l) - 1.0) + (1.0 - g.transmission_l);
}

double rase_efficiency(double alpha_l) {
  if (!(alpha_l > 0.0)) {
    throw std::domain_error("rase_efficiency: alpha_l must be > 0");
  }
  const double sh = std::sinh(0.5 * alpha_l);
  return (1.0 + 8.0 * sh * sh - 2.0) / (2.0 * std::exp(alpha_l) - 2.0);
}

double scale_efficiency(double eta, const DecayScaling& d) {
  require_unit_interval(eta, "scale_efficiency: eta");
  const double rate = d.kind == DecayScaling::Kind::Amplitude ? 2.0 : 1.0;
  return eta * std::exp(-rate * (d.t_target_us - d.t_ref_us) / d.tau_us);
}

GaussianState lossy_tmsv_state(const GainFeature& g) {
  GaussianState st = GaussianState::vacuum(2, {"ASE", "RASE"});
  st = two_mode_squeeze(st, SqueezeParams(squeeze_for_gain(g.alpha_l), 0, 1));
  st = apply_loss(st, LossChannel(g.transmission_l, 0));
  st = apply_loss(st, LossChannel(g.transmission_l, 1));
  st = apply_loss(st, LossChannel(g.reph_transmission, 1));
  return st;
}

std::vector<InsepPoint> insep_curve(const GainFeature& g, std::span<const double> b_grid) {
  const ArmStats s = arm_stats(g);
  std::vector<InsepPoint> out;
  out.reserve(b_grid.size());
  for (double b : b_grid) {
    if (!(b >= 0.0 && b <= 1.0)) {
      throw std::invalid_argument("insep_curve: b must lie in [0, 1]");
    }
    out.push_back(InsepPoint{b, total_variance_at(b, s)});
  }
  return out;
}

InsepPoint find_min_b(const GainFeature& g) {
  const ArmStats s = arm_stats(g);
  const auto f = [&s](double b) { return total_variance_at(b, s); };

  // Near-equal values prefer the smaller-b side, so a flat curve (vacuum)
  // converges to b = 0.
  constexpr double kTie = 1e-12;
  const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);

  auto golden = [&](double lo, double hi) {
    double c = hi - invphi * (hi - lo);
    double d = lo + invphi * (hi - lo);
    double fc = f(c), fd = f(d);
    while (hi - lo > 1e-7) {
      if (fc <= fd + kTie) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - invphi * (hi - lo);
        fc = f(c);
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + invphi * (hi - lo);
        fd = f(d);
      }
    }
    return 0.5 * (lo + hi);
  };

  double best_b = golden(0.0, 1.0);
  double best_v = f(best_b);

  // Grid fallback guards pathological (non-unimodal) inputs.
  constexpr int kGrid = 1000;
  for (int i = 0; i <= kGrid; ++i) {
    const double b = static_cast<double>(i) / kGrid;
    if (f(b) < best_v - kTie) {
      const double lo = std::max(0.0, b - 1.0 / kGrid);
      const double hi = std::min(1.0, b + 1.0 / kGrid);
      best_b = golden(lo, hi);
      best_v = f(best_b);
    }
  }

  // Endpoints win ties toward smaller b.
  if (f(0.0) <= best_v + kTie) return InsepPoint{0.0, f(0.0)};
  if (f(1.0) < best_v - kTie) return InsepPoint{1.0, f(1.0)};
  return InsepPoint{best_b, best_v};
}

}  // namespace rase
