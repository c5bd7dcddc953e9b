#include "rase/estimators.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "rase/errors.hpp"

namespace rase {

namespace {

using cd = std::complex<double>;

double window_weight(WindowFn fn, std::size_t j, std::size_t n) {
  switch (fn) {
    case WindowFn::Rect:
      return 1.0;
    case WindowFn::Hann:
      if (n < 2) return 1.0;
      return 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(j) /
                                   static_cast<double>(n - 1)));
  }
  return 1.0;
}

// Demodulated amplitude of the slice [w.begin, w.end) at frequency f with a
// unit-norm weight vector: alpha = sum r[k] w[k] e^{-i 2 pi f t_k} / ||w||.
cd demodulate(const std::vector<cd>& trace, const WindowSpan& w, double f_over_fs,
              WindowFn fn) {
  double norm2 = 0.0;
  cd acc{0.0, 0.0};
  const std::size_t n = w.size();
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t k = w.begin + j;
    const double weight = window_weight(fn, j, n);
    const double ph = -2.0 * std::numbers::pi * f_over_fs * static_cast<double>(k);
    acc += trace[k] * weight * cd(std::cos(ph), std::sin(ph));
    norm2 += weight * weight;
  }
  return acc / std::sqrt(norm2);
}

WindowSpan slice_window(const WindowSpan& base, const SpectralWindow& win,
                        double sample_rate_hz, std::size_t trace_len) {
  const double samples_per_us = sample_rate_hz * 1e-6;
  const auto n_off = static_cast<std::size_t>(std::floor(win.start_offset_us * samples_per_us + 1e-9));
  std::size_t n_len = base.size();
  if (win.time_window_us > 0.0) {
    n_len = static_cast<std::size_t>(std::floor(win.time_window_us * samples_per_us + 1e-9));
  }
  WindowSpan out{base.begin + n_off, base.begin + n_off + n_len};
  if (n_len == 0 || out.end > base.end || out.end > trace_len) {
    throw std::invalid_argument("analysis window falls outside the detection window");
  }
  return out;
}

const WindowSpan& field_window(const SequenceLayout& lay, FieldKind field) {
  return field == FieldKind::Ase ? lay.ase : lay.rase;
}

double field_if(const SequenceConfig& cfg, FieldKind field) {
  return field == FieldKind::Ase ? cfg.ase_if_hz : cfg.rase_if_hz;
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n <= 16) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

PhaseEstimate estimate_phase(const ShotRecord& rec, const SequenceConfig& cfg,
                             const NoiseModel& noise) {
  noise.validate();
  const SequenceLayout lay = SequenceLayout::from(cfg);
  if (rec.trace.size() < lay.n_samples) {
    throw std::invalid_argument("estimate_phase: record lacks the reference-pulse window");
  }

  const cd a1 = demodulate(rec.trace, lay.ref1, cfg.ase_if_hz / cfg.sample_rate_hz,
                           WindowFn::Rect);
  const cd a2 = demodulate(rec.trace, lay.ref2, cfg.rase_if_hz / cfg.sample_rate_hz,
                           WindowFn::Rect);

  // Back the nominal pulse phase out, then average the two fields coherently.
  const cd nominal = cd(std::cos(cfg.ref_pulse.phase_rad), std::sin(cfg.ref_pulse.phase_rad));
  const cd mean = 0.5 * (a1 + a2) / nominal;

  // Mean demodulated pulse power in vacuum units; a vacuum window averages
  // to 1 (= psd/2 before normalization).
  const double power = (std::norm(a1) + std::norm(a2)) / noise.vacuum_psd;

  PhaseEstimate est;
  est.ref_power = power;
  est.low_confidence = power < kRefPowerFloor;
  est.phase_rad = std::atan2(mean.imag(), mean.real());
  if (est.phase_rad < 0.0) est.phase_rad += 2.0 * std::numbers::pi;
  return est;
}

SpectralWindow default_window(const SequenceConfig& cfg, FieldKind field) {
  SpectralWindow w;
  w.center_hz = field_if(cfg, field);
  w.time_window_us = 0.0;
  return w;
}

QuadraturePair extract_quadratures(const ShotRecord& rec, const SequenceConfig& cfg,
                                   const NoiseModel& noise, FieldKind field,
                                   const SpectralWindow& window, double phase_rad,
                                   const VacuumNormalization& norm) {
  noise.validate();
  if (!(window.span_hz > 0.0)) {
    throw std::invalid_argument("extract_quadratures: span_hz must be > 0");
  }
  const SequenceLayout lay = SequenceLayout::from(cfg);
  const WindowSpan span = slice_window(field_window(lay, field), window,
                                       cfg.sample_rate_hz, rec.trace.size());

  cd alpha = demodulate(rec.trace, span, window.center_hz / cfg.sample_rate_hz,
                        window.window_function);
  alpha /= std::sqrt(noise.vacuum_psd);
  alpha *= cd(std::cos(-phase_rad), std::sin(-phase_rad));

  const double scale = field == FieldKind::Ase ? norm.ase_scale : norm.rase_scale;
  QuadraturePair out;
  out.field = field;
  out.shot_id = rec.shot_id;
  out.x = 2.0 * alpha.real() * scale;
  out.p = 2.0 * alpha.imag() * scale;
  if (!std::isfinite(out.x) || !std::isfinite(out.p)) {
    throw NumericalError("extract_quadratures: non-finite quadrature");
  }
  return out;
}

VarianceEstimate variance_of(std::span<const QuadraturePair> pairs) {
  const std::size_t n = pairs.size();
  if (n < 2) throw std::invalid_argument("variance_of: need at least 2 shots");

  std::vector<double> xs(n), ps(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = pairs[i].x;
    ps[i] = pairs[i].p;
  }
  const double mx = pairwise_sum(xs) / static_cast<double>(n);
  const double mp = pairwise_sum(ps) / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = (xs[i] - mx) * (xs[i] - mx);
    ps[i] = (ps[i] - mp) * (ps[i] - mp);
  }
  const double var_x = pairwise_sum(xs) / static_cast<double>(n - 1);
  const double var_p = pairwise_sum(ps) / static_cast<double>(n - 1);

  VarianceEstimate est;
  est.n_shots = n;
  est.mean_var = 0.5 * (var_x + var_p);
  est.se = est.mean_var * std::sqrt(2.0 / static_cast<double>(2 * n - 1));
  return est;
}

EfficiencyEstimate efficiency_from_runs(const VarianceEstimate& ase,
                                        const VarianceEstimate& rase) {
  if (!(ase.mean_var > 1.0)) {
    throw NumericalError("efficiency_from_runs: ASE variance at or below the vacuum level, "
                         "efficiency undefined");
  }
  const double gain = ase.mean_var - 1.0;
  EfficiencyEstimate est;
  est.eta = (rase.mean_var - 1.0) / gain;
  est.se = std::sqrt(std::pow(rase.se / gain, 2) +
                     std::pow((rase.mean_var - 1.0) * ase.se / (gain * gain), 2));
  return est;
}

double pulse_spectral_area(const ShotRecord& rec, const SequenceConfig& cfg,
                           const NoiseModel& noise, FieldKind field, double span_hz) {
  noise.validate();
  if (!(span_hz > 0.0)) throw std::invalid_argument("pulse_spectral_area: span_hz must be > 0");
  const SequenceLayout lay = SequenceLayout::from(cfg);
  const WindowSpan& w = field_window(lay, field);
  if (rec.trace.size() < w.end) {
    throw std::invalid_argument("pulse_spectral_area: record too short");
  }

  // Periodogram bins over the detection window: spacing fs / Nw around the
  // field's carrier, summed across the span. Vacuum contributes psd/2 per bin.
  const double bin_hz = cfg.sample_rate_hz / static_cast<double>(w.size());
  const int half_bins = std::max(0, static_cast<int>(std::floor(0.5 * span_hz / bin_hz + 1e-9)));
  const double f0 = field_if(cfg, field);

  double area = 0.0;
  for (int j = -half_bins; j <= half_bins; ++j) {
    const double f = (f0 + j * bin_hz) / cfg.sample_rate_hz;
    cd acc{0.0, 0.0};
    for (std::size_t k = w.begin; k < w.end; ++k) {
      const double ph = -2.0 * std::numbers::pi * f * static_cast<double>(k);
      acc += rec.trace[k] * cd(std::cos(ph), std::sin(ph));
    }
    area += std::norm(acc) / static_cast<double>(w.size()) - 0.5 * noise.vacuum_psd;
  }
  return area;
}

VacuumNormalization calibrate_vacuum(std::span<const ShotRecord> background,
                                     const SequenceConfig& cfg, const NoiseModel& noise,
                                     const SpectralWindow& ase_window,
                                     const SpectralWindow& rase_window) {
  if (background.size() < 2) {
    throw std::invalid_argument("calibrate_vacuum: need at least 2 background shots");
  }
  std::vector<QuadraturePair> ase, rase;
  ase.reserve(background.size());
  rase.reserve(background.size());
  for (const ShotRecord& rec : background) {
    // Background shots carry no signal; phase correction is irrelevant for
    // their variance, so extract at zero phase.
    ase.push_back(extract_quadratures(rec, cfg, noise, FieldKind::Ase, ase_window, 0.0));
    rase.push_back(extract_quadratures(rec, cfg, noise, FieldKind::Rase, rase_window, 0.0));
  }
  VacuumNormalization norm;
  norm.ase_scale = 1.0 / std::sqrt(variance_of(ase).mean_var);
  norm.rase_scale = 1.0 / std::sqrt(variance_of(rase).mean_var);
  return norm;
}

}  // namespace rase
