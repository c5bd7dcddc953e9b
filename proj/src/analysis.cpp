#include "rase/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rase/errors.hpp"
#include "rase/rng.hpp"

namespace rase {

namespace {

struct UvSamples {
  std::vector<double> u;
  std::vector<double> v;
};

// Paired per-shot EPR combinations for one b.
UvSamples form_uv(std::span<const QuadraturePair> a, std::span<const QuadraturePair> r,
                  double b) {
  if (!(b >= 0.0 && b <= 1.0)) {
    throw std::invalid_argument("estimate_inseparability: b must lie in [0, 1]");
  }
  const double wa = std::sqrt(b);
  const double wr = std::sqrt(1.0 - b);
  UvSamples s;
  s.u.resize(a.size());
  s.v.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    s.u[i] = wa * a[i].x + wr * r[i].x;
    s.v[i] = wa * a[i].p - wr * r[i].p;
  }
  return s;
}

double sample_variance(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<double> tmp(v.begin(), v.end());
  const double mean = pairwise_sum(tmp) / static_cast<double>(n);
  for (auto& x : tmp) x = (x - mean) * (x - mean);
  return pairwise_sum(tmp) / static_cast<double>(n - 1);
}

InsepEstimate estimate_at_b(std::span<const QuadraturePair> a,
                            std::span<const QuadraturePair> r, double b) {
  const UvSamples s = form_uv(a, r, b);
  const std::size_t n = s.u.size();
  const double var_u = sample_variance(s.u);
  const double var_v = sample_variance(s.v);

  InsepEstimate est;
  est.b = b;
  est.total_variance = var_u + var_v;
  // Standard error of the summed variance: u and v estimates are independent,
  // each with se = var * sqrt(2 / (n - 1)).
  const double c = 2.0 / static_cast<double>(n - 1);
  est.se = std::sqrt(c * (var_u * var_u + var_v * var_v));
  est.sigma_violation = (2.0 - est.total_variance) / est.se;
  return est;
}

// Sorted copies paired by shot_id; throws PairingError on any mismatch.
std::pair<std::vector<QuadraturePair>, std::vector<QuadraturePair>> pair_by_shot(
    std::span<const QuadraturePair> a, std::span<const QuadraturePair> r) {
  if (a.size() != r.size()) {
    throw PairingError("estimate_inseparability: shot counts differ");
  }
  if (a.size() < 2) {
    throw std::invalid_argument("estimate_inseparability: need at least 2 shots");
  }
  std::vector<QuadraturePair> sa(a.begin(), a.end());
  std::vector<QuadraturePair> sr(r.begin(), r.end());
  const auto by_id = [](const QuadraturePair& lhs, const QuadraturePair& rhs) {
    return lhs.shot_id < rhs.shot_id;
  };
  std::sort(sa.begin(), sa.end(), by_id);
  std::sort(sr.begin(), sr.end(), by_id);
  for (std::size_t i = 0; i < sa.size(); ++i) {
    if (sa[i].shot_id != sr[i].shot_id) {
      throw PairingError("estimate_inseparability: unpaired shot ids");
    }
  }
  return {std::move(sa), std::move(sr)};
}

std::vector<double> default_b_grid(double step) {
  std::vector<double> grid;
  const int n = std::max(1, static_cast<int>(std::llround(1.0 / step)));
  grid.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) grid.push_back(static_cast<double>(i) / n);
  return grid;
}

}  // namespace

LossFit fit_loss(std::span<const VariancePoint> points) {
  std::vector<VariancePoint> used;
  for (const auto& p : points) {
    if (p.alpha_l > 0.0) used.push_back(p);
  }
  if (used.size() < 2) {
    throw NumericalError("fit_loss: need at least 2 points with alpha_l > 0");
  }
  const auto [lo, hi] = std::minmax_element(
      used.begin(), used.end(),
      [](const VariancePoint& a, const VariancePoint& b) { return a.alpha_l < b.alpha_l; });
  if (hi->alpha_l - lo->alpha_l < 1e-12) {
    throw NumericalError("fit_loss: degenerate design, all optical depths equal");
  }

  const bool weighted =
      std::all_of(used.begin(), used.end(), [](const VariancePoint& p) { return p.se > 0.0; });

  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : used) {
    const double w = weighted ? 1.0 / (p.se * p.se) : 1.0;
    const double x = 2.0 * std::exp(p.alpha_l) - 2.0;
    const double y = p.variance - 1.0;
    sxx += w * x * x;
    sxy += w * x * y;
  }

  LossFit fit;
  fit.n_points = used.size();
  fit.transmission_l = sxy / sxx;

  double chi2 = 0.0;
  for (const auto& p : used) {
    const double w = weighted ? 1.0 / (p.se * p.se) : 1.0;
    const double x = 2.0 * std::exp(p.alpha_l) - 2.0;
    const double res = (p.variance - 1.0) - fit.transmission_l * x;
    chi2 += w * res * res;
  }
  fit.chi2 = chi2;

  if (weighted) {
    fit.se = std::sqrt(1.0 / sxx);
  } else {
    // Residual-based error estimate for unweighted input.
    const double dof = static_cast<double>(used.size()) - 1.0;
    fit.se = dof > 0.0 ? std::sqrt((chi2 / dof) / sxx) : 0.0;
  }
  return fit;
}

double invert_ase_for_alpha(double ase_variance, double transmission_l) {
  if (!(transmission_l > 0.0 && transmission_l <= 1.0)) {
    throw std::invalid_argument("invert_ase_for_alpha: transmission_l must lie in (0, 1]");
  }
  if (ase_variance < 1.0 - 1e-9) {
    throw NumericalError("invert_ase_for_alpha: variance below vacuum level, no gain");
  }
  const double excess = std::max(0.0, ase_variance - 1.0);
  return std::log1p(excess / (2.0 * transmission_l));
}

AlphaAnnotation annotate_alpha(double alpha_probe, double ase_variance,
                               double transmission_l) {
  AlphaAnnotation ann;
  ann.alpha_input = alpha_probe;
  ann.untrusted = alpha_probe >= kProbeAlphaTrustLimit;
  ann.alpha_from_ase = invert_ase_for_alpha(ase_variance, transmission_l);
  return ann;
}

std::vector<EfficiencyCurvePoint> build_efficiency_curve(std::span<const RunSummary> runs,
                                                         const DecayScaling& decay) {
  std::vector<EfficiencyCurvePoint> curve;
  curve.reserve(runs.size());
  for (const RunSummary& run : runs) {
    EfficiencyCurvePoint pt;
    pt.alpha_l = run.alpha_l;
    pt.kind = run.kind;
    pt.untrusted_alpha =
        run.alpha_source == AlphaSource::Probe && run.alpha_l >= kProbeAlphaTrustLimit;
    pt.model_defined = rase_efficiency_defined(run.alpha_l);
    pt.eta_model = pt.model_defined ? rase_efficiency(run.alpha_l)
                                    : std::numeric_limits<double>::quiet_NaN();

    if (run.kind == RunKind::Rase) {
      const EfficiencyEstimate eff = efficiency_from_runs(run.ase, run.rase);
      pt.eta_measured = eff.eta;
      pt.eta_se = eff.se;
    } else {
      const double clamped = std::clamp(run.i4le_area_ratio, 0.0, 1.0);
      const double factor = scale_efficiency(1.0, decay);
      pt.eta_measured = clamped * factor;
      pt.eta_se = run.i4le_area_ratio_se * factor;
    }
    curve.push_back(pt);
  }
  return curve;
}

std::vector<InsepEstimate> estimate_inseparability(std::span<const QuadraturePair> pairs_ase,
                                                   std::span<const QuadraturePair> pairs_rase,
                                                   std::span<const double> b_grid) {
  const auto [a, r] = pair_by_shot(pairs_ase, pairs_rase);
  std::vector<InsepEstimate> curve;
  curve.reserve(b_grid.size());
  for (double b : b_grid) curve.push_back(estimate_at_b(a, r, b));
  return curve;
}

std::vector<InsepEstimate> estimate_inseparability_bootstrap(
    std::span<const QuadraturePair> pairs_ase, std::span<const QuadraturePair> pairs_rase,
    std::span<const double> b_grid, const BootstrapOptions& opts) {
  if (opts.resamples < 2) {
    throw std::invalid_argument("bootstrap: need at least 2 resamples");
  }
  const auto [a, r] = pair_by_shot(pairs_ase, pairs_rase);
  const std::size_t n = a.size();

  std::vector<InsepEstimate> curve = estimate_inseparability(pairs_ase, pairs_rase, b_grid);

  // Resample shots with replacement; se per b is the spread of the resampled
  // totals.
  std::vector<std::vector<double>> totals(b_grid.size());
  for (auto& t : totals) t.reserve(static_cast<std::size_t>(opts.resamples));

  std::vector<QuadraturePair> ra(n), rr(n);
  for (int rep = 0; rep < opts.resamples; ++rep) {
    ShotRng rng(derive_stream_id(opts.seed, static_cast<std::uint64_t>(rep), 0xb001));
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(rng.next_uniform() * static_cast<double>(n));
      const std::size_t idx = std::min(j, n - 1);
      ra[i] = a[idx];
      rr[i] = r[idx];
      ra[i].shot_id = rr[i].shot_id = static_cast<std::uint64_t>(i);
    }
    for (std::size_t gi = 0; gi < b_grid.size(); ++gi) {
      totals[gi].push_back(estimate_at_b(ra, rr, b_grid[gi]).total_variance);
    }
  }

  for (std::size_t gi = 0; gi < b_grid.size(); ++gi) {
    const double m = pairwise_sum(totals[gi]) / static_cast<double>(totals[gi].size());
    double acc = 0.0;
    for (double t : totals[gi]) acc += (t - m) * (t - m);
    curve[gi].se = std::sqrt(acc / static_cast<double>(totals[gi].size() - 1));
    curve[gi].sigma_violation = (2.0 - curve[gi].total_variance) / curve[gi].se;
  }
  return curve;
}

InsepEstimate curve_minimum(std::span<const InsepEstimate> curve) {
  if (curve.empty()) throw std::invalid_argument("curve_minimum: empty curve");
  const InsepEstimate* best = &curve.front();
  for (const auto& pt : curve) {
    if (pt.total_variance < best->total_variance - 1e-12) best = &pt;
  }
  return *best;
}

std::vector<OverlayRow> overlay_model(std::span<const InsepEstimate> measured,
                                      const GainFeature& g) {
  std::vector<double> grid;
  grid.reserve(measured.size());
  for (const auto& pt : measured) grid.push_back(pt.b);
  const std::vector<InsepPoint> model = insep_curve(g, grid);

  std::vector<OverlayRow> rows;
  rows.reserve(measured.size());
  for (std::size_t i = 0; i < measured.size(); ++i) {
    rows.push_back(OverlayRow{measured[i].b, measured[i].total_variance, measured[i].se,
                              model[i].total_variance});
  }
  return rows;
}

double fit_reph_to_minimum(double alpha_l, double transmission_l, double target_min) {
  if (!(target_min > 0.0 && target_min <= 2.0)) {
    throw std::invalid_argument("fit_reph_to_minimum: target must lie in (0, 2]");
  }
  const auto min_at = [&](double t_r) {
    return find_min_b(GainFeature(alpha_l, transmission_l, t_r)).total_variance;
  };
  if (min_at(1.0) > target_min) {
    throw NumericalError("fit_reph_to_minimum: target below the lossless minimum");
  }
  double lo = 0.0, hi = 1.0;  // min_at decreases with t_r
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (min_at(mid) > target_min) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

RunAnalysis analyze_records(std::span<const ShotRecord> records, const SequenceConfig& cfg,
                            const NoiseModel& noise, const AnalysisOptions& opts,
                            const VacuumNormalization& norm) {
  if (records.size() < 2) {
    throw std::invalid_argument("analyze_records: need at least 2 shots");
  }

  SpectralWindow wa = default_window(cfg, FieldKind::Ase);
  SpectralWindow wr = default_window(cfg, FieldKind::Rase);
  wa.span_hz = wr.span_hz = opts.span_hz;
  wa.window_function = wr.window_function = opts.window_function;
  if (opts.window_us > 0.0) {
    wa.time_window_us = wr.time_window_us = opts.window_us;
  }

  RunAnalysis out;
  out.ase_pairs.reserve(records.size());
  out.rase_pairs.reserve(records.size());

  if (cfg.kind == SequenceKind::Rase) {
    for (const ShotRecord& rec : records) {
      const PhaseEstimate ph = estimate_phase(rec, cfg, noise);
      if (ph.low_confidence && opts.strict_phase) {
        throw NumericalError("analyze_records: low-confidence phase reference in shot " +
                             std::to_string(rec.shot_id));
      }
      out.ase_pairs.push_back(
          extract_quadratures(rec, cfg, noise, FieldKind::Ase, wa, ph.phase_rad, norm));
      out.rase_pairs.push_back(
          extract_quadratures(rec, cfg, noise, FieldKind::Rase, wr, ph.phase_rad, norm));
    }
    out.ase_var = variance_of(out.ase_pairs);
    out.rase_var = variance_of(out.rase_pairs);
    if (out.ase_var.mean_var > 1.0) {
      out.efficiency = efficiency_from_runs(out.ase_var, out.rase_var);
    }

    const std::vector<double> grid = default_b_grid(opts.b_grid_step);
    out.insep_curve =
        opts.bootstrap
            ? estimate_inseparability_bootstrap(out.ase_pairs, out.rase_pairs, grid,
                                                BootstrapOptions{opts.bootstrap_resamples})
            : estimate_inseparability(out.ase_pairs, out.rase_pairs, grid);
    out.insep_min = curve_minimum(out.insep_curve);
  } else {
    // I4LE: deterministic pulses; efficiency from spectral areas.
    std::vector<double> ratios;
    ratios.reserve(records.size());
    double sum_in = 0.0, sum_echo = 0.0;
    for (const ShotRecord& rec : records) {
      const double ain = pulse_spectral_area(rec, cfg, noise, FieldKind::Ase, opts.span_hz);
      const double aecho = pulse_spectral_area(rec, cfg, noise, FieldKind::Rase, opts.span_hz);
      sum_in += ain;
      sum_echo += aecho;
      if (ain > 0.0) ratios.push_back(aecho / ain);
    }
    if (sum_in <= 0.0) {
      throw NumericalError("analyze_records: no detectable input pulse power");
    }
    out.i4le_area_ratio = sum_echo / sum_in;
    if (ratios.size() > 1) {
      const double m = pairwise_sum(ratios) / static_cast<double>(ratios.size());
      double acc = 0.0;
      for (double v : ratios) acc += (v - m) * (v - m);
      const auto n = static_cast<double>(ratios.size());
      out.i4le_area_ratio_se = std::sqrt(acc / (n - 1.0) / n);
    }
  }
  return out;
}

}  // namespace rase
