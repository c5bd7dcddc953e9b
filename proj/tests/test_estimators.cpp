#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "rase/errors.hpp"
#include "rase/estimators.hpp"
#include "rase/rng.hpp"
#include "rase/synth.hpp"

using namespace rase;

namespace {

using cd = std::complex<double>;

SequenceConfig run_config(double alpha, double l = 0.11, double t_r = 0.0715) {
  SequenceConfig cfg;
  cfg.gain = GainFeature(alpha, l, t_r);
  cfg.rng_seed = 301;
  return cfg;
}

// Record with zeroed noise and hand-placed mode content, for closed-form
// checks of the demodulation chain.
ShotRecord manufactured_record(const SequenceConfig& cfg, cd ase_coeff, cd ref_coeff) {
  const SequenceLayout lay = SequenceLayout::from(cfg);
  ShotRecord rec;
  rec.shot_id = 0;
  rec.trace.assign(lay.n_samples, cd{0.0, 0.0});
  const auto imprint = [&](const WindowSpan& w, double f_hz, cd coeff) {
    for (std::size_t k = w.begin; k < w.end; ++k) {
      const double ph = 2.0 * std::numbers::pi * (f_hz / cfg.sample_rate_hz) * k;
      rec.trace[k] += coeff * cd(std::cos(ph), std::sin(ph)) /
                      std::sqrt(static_cast<double>(w.size()));
    }
  };
  imprint(lay.ase, cfg.ase_if_hz, ase_coeff);
  imprint(lay.ref1, cfg.ase_if_hz, ref_coeff);
  imprint(lay.ref2, cfg.rase_if_hz, ref_coeff);
  return rec;
}

}  // namespace

TEST_CASE("estimate_phase") {
  const SequenceConfig cfg = run_config(0.0);
  const NoiseModel noise;

  SUBCASE("noiseless record at zero phase") {
    const ShotRecord rec = manufactured_record(cfg, cd{0.0, 0.0}, cd{20.0, 0.0});
    const PhaseEstimate est = estimate_phase(rec, cfg, noise);
    CHECK_FALSE(est.low_confidence);
    CHECK(std::abs(est.phase_rad) <= 1e-6);
  }

  SUBCASE("noiseless record at a known phase") {
    const double theta = 1.234;
    const cd ref = 20.0 * cd(std::cos(theta), std::sin(theta));
    const PhaseEstimate est = estimate_phase(manufactured_record(cfg, cd{0, 0}, ref), cfg, noise);
    CHECK(est.phase_rad == doctest::Approx(theta).epsilon(1e-9));
  }

  SUBCASE("Monte-Carlo error against truth at the default amplitude") {
    SequenceConfig mc = run_config(0.0);
    mc.n_shots = 400;
    const auto run = synthesize_run(mc, noise, 4);
    double sq_err = 0.0;
    for (const auto& rec : run) {
      const PhaseEstimate est = estimate_phase(rec, mc, noise);
      CHECK_FALSE(est.low_confidence);
      double diff = est.phase_rad - rec.truth.interferometer_phase_rad;
      diff = std::remainder(diff, 2.0 * std::numbers::pi);
      sq_err += diff * diff;
    }
    CHECK(std::sqrt(sq_err / static_cast<double>(run.size())) < 0.05);
  }

  SUBCASE("forced pi/3 phase is recovered within the error budget") {
    SequenceConfig mc = run_config(0.0);
    double sq_err = 0.0;
    constexpr int kShots = 200;
    for (int i = 0; i < kShots; ++i) {
      const ShotRecord rec = synthesize_shot_at_phase(mc, noise, static_cast<std::uint64_t>(i),
                                                      std::numbers::pi / 3.0);
      const double diff = std::remainder(
          estimate_phase(rec, mc, noise).phase_rad - std::numbers::pi / 3.0,
          2.0 * std::numbers::pi);
      sq_err += diff * diff;
    }
    CHECK(std::sqrt(sq_err / kShots) < 0.05);
  }

  SUBCASE("zero reference amplitude flags low confidence") {
    SequenceConfig dark = run_config(0.0);
    dark.ref_pulse.amplitude = 0.0;
    const ShotRecord rec = synthesize_shot(dark, noise, 0);
    CHECK(estimate_phase(rec, dark, noise).low_confidence);
  }

  SUBCASE("record without the reference window is rejected") {
    ShotRecord rec = synthesize_shot(cfg, noise, 0);
    rec.trace.resize(100);
    CHECK_THROWS_AS(estimate_phase(rec, cfg, noise), std::invalid_argument);
  }
}

TEST_CASE("extract_quadratures closed-form responses") {
  const SequenceConfig cfg = run_config(0.0);
  const NoiseModel noise;
  const double amp = 6.0;

  SUBCASE("full-window matched filter recovers the mode amplitude") {
    const ShotRecord rec = manufactured_record(cfg, cd{0.5 * amp, 0.0}, cd{20.0, 0.0});
    const QuadraturePair q = extract_quadratures(rec, cfg, noise, FieldKind::Ase,
                                                 default_window(cfg, FieldKind::Ase), 0.0);
    CHECK(q.x == doctest::Approx(amp).epsilon(1e-9));
    CHECK(std::abs(q.p) <= 1e-9);
  }

  SUBCASE("reduced window captures sqrt of the energy fraction") {
    const ShotRecord rec = manufactured_record(cfg, cd{0.5 * amp, 0.0}, cd{20.0, 0.0});
    SpectralWindow w = default_window(cfg, FieldKind::Ase);
    w.time_window_us = 4.0;
    const QuadraturePair q = extract_quadratures(rec, cfg, noise, FieldKind::Ase, w, 0.0);
    CHECK(q.x == doctest::Approx(amp * std::sqrt(0.4)).epsilon(1e-9));
  }

  SUBCASE("hann window overlap follows the weight vector") {
    const ShotRecord rec = manufactured_record(cfg, cd{0.5 * amp, 0.0}, cd{20.0, 0.0});
    SpectralWindow w = default_window(cfg, FieldKind::Ase);
    w.window_function = WindowFn::Hann;
    const QuadraturePair q = extract_quadratures(rec, cfg, noise, FieldKind::Ase, w, 0.0);
    // Overlap of the normalized hann weights with the flat mode.
    const std::size_t n = SequenceLayout::from(cfg).ase.size();
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double h =
          0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * j / static_cast<double>(n - 1)));
      sum += h;
      sum2 += h * h;
    }
    const double overlap = sum / std::sqrt(sum2) / std::sqrt(static_cast<double>(n));
    CHECK(q.x == doctest::Approx(amp * overlap).epsilon(1e-9));
  }

  SUBCASE("rotation by pi/2 swaps the quadratures up to sign") {
    const ShotRecord rec = manufactured_record(cfg, cd{1.5, 0.8}, cd{20.0, 0.0});
    const SpectralWindow w = default_window(cfg, FieldKind::Ase);
    const QuadraturePair q0 = extract_quadratures(rec, cfg, noise, FieldKind::Ase, w, 0.0);
    const QuadraturePair q90 =
        extract_quadratures(rec, cfg, noise, FieldKind::Ase, w, std::numbers::pi / 2.0);
    CHECK(q90.x == doctest::Approx(q0.p).epsilon(1e-9));
    CHECK(q90.p == doctest::Approx(-q0.x).epsilon(1e-9));
  }

  SUBCASE("window outside the record is rejected") {
    const ShotRecord rec = manufactured_record(cfg, cd{0, 0}, cd{20.0, 0.0});
    SpectralWindow w = default_window(cfg, FieldKind::Ase);
    w.time_window_us = 12.0;
    CHECK_THROWS_AS(extract_quadratures(rec, cfg, noise, FieldKind::Ase, w, 0.0),
                    std::invalid_argument);
    w = default_window(cfg, FieldKind::Ase);
    w.start_offset_us = 9.0;
    w.time_window_us = 4.0;
    CHECK_THROWS_AS(extract_quadratures(rec, cfg, noise, FieldKind::Ase, w, 0.0),
                    std::invalid_argument);
  }
}

TEST_CASE("variance_of") {
  SUBCASE("constant input has zero variance") {
    std::vector<QuadraturePair> pairs(8, QuadraturePair{FieldKind::Ase, 1.3, -0.4, 0});
    for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i].shot_id = i;
    const VarianceEstimate est = variance_of(pairs);
    CHECK(est.mean_var == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(est.se == doctest::Approx(0.0).epsilon(1e-15));
  }

  SUBCASE("needs at least two shots") {
    std::vector<QuadraturePair> one(1);
    CHECK_THROWS_AS(variance_of(one), std::invalid_argument);
  }

  SUBCASE("standard error follows the pooled chi-squared formula") {
    ShotRng rng(2024);
    std::vector<QuadraturePair> pairs(10000);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      pairs[i] = QuadraturePair{FieldKind::Ase, rng.next_normal(), rng.next_normal(), i};
    }
    const VarianceEstimate est = variance_of(pairs);
    CHECK(est.se ==
          doctest::Approx(est.mean_var * std::sqrt(2.0 / 19999.0)).epsilon(1e-12));
    CHECK(est.se == doctest::Approx(0.01).epsilon(0.05));
    CHECK(std::abs(est.mean_var - 1.0) <= 3.0 * est.se);
  }
}

TEST_CASE("efficiency_from_runs") {
  const VarianceEstimate ase{1.672, 0.012, 9000};

  SUBCASE("vacuum-level recall gives zero efficiency") {
    const VarianceEstimate rase{1.0, 0.01, 9000};
    CHECK(efficiency_from_runs(ase, rase).eta == doctest::Approx(0.0).epsilon(1e-15));
  }

  SUBCASE("reference arithmetic") {
    const VarianceEstimate rase{1.094, 0.01, 9000};
    const EfficiencyEstimate eff = efficiency_from_runs(ase, rase);
    CHECK(eff.eta == doctest::Approx(0.094 / 0.672).epsilon(1e-12));
    CHECK(eff.eta == doctest::Approx(0.14).epsilon(2e-2));
    CHECK(eff.se > 0.0);
  }

  SUBCASE("no gain is an error") {
    const VarianceEstimate flat{1.0, 0.01, 9000};
    const VarianceEstimate rase{1.05, 0.01, 9000};
    CHECK_THROWS_AS(efficiency_from_runs(flat, rase), NumericalError);
  }
}

TEST_CASE("full-pipeline variance convergence") {
  SequenceConfig cfg = run_config(1.4, 0.11, 0.14);
  cfg.n_shots = 4000;
  const NoiseModel noise;
  const auto run = synthesize_run(cfg, noise, 4);

  std::vector<QuadraturePair> ase;
  for (const auto& rec : run) {
    const PhaseEstimate ph = estimate_phase(rec, cfg, noise);
    ase.push_back(extract_quadratures(rec, cfg, noise, FieldKind::Ase,
                                      default_window(cfg, FieldKind::Ase), ph.phase_rad));
  }
  const VarianceEstimate est = variance_of(ase);
  CHECK(std::abs(est.mean_var - 1.6721439927) <= 3.0 * est.se);
}

TEST_CASE("phase-correction closure against zero-phase twins") {
  SequenceConfig cfg = run_config(1.4, 0.11, 0.14);
  cfg.n_shots = 300;
  const NoiseModel noise;

  double num = 0.0, den = 0.0;
  for (int i = 0; i < cfg.n_shots; ++i) {
    const ShotRecord rec = synthesize_shot(cfg, noise, static_cast<std::uint64_t>(i));
    const ShotRecord twin = synthesize_shot_at_phase(cfg, noise, static_cast<std::uint64_t>(i), 0.0);
    const PhaseEstimate ph = estimate_phase(rec, cfg, noise);
    for (FieldKind field : {FieldKind::Ase, FieldKind::Rase}) {
      const SpectralWindow w = default_window(cfg, field);
      const QuadraturePair corrected = extract_quadratures(rec, cfg, noise, field, w, ph.phase_rad);
      const QuadraturePair reference = extract_quadratures(twin, cfg, noise, field, w, 0.0);
      num += std::pow(corrected.x - reference.x, 2) + std::pow(corrected.p - reference.p, 2);
      den += reference.x * reference.x + reference.p * reference.p;
    }
  }
  CHECK(std::sqrt(num / den) < 0.05);
}

TEST_CASE("window invariance of the vacuum normalization") {
  SequenceConfig cfg = run_config(0.0);
  cfg.n_shots = 2500;
  const NoiseModel noise;
  const auto run = synthesize_run(cfg, noise, 4);

  for (WindowFn fn : {WindowFn::Rect, WindowFn::Hann}) {
    for (double window_us : {10.0, 4.0}) {
      SpectralWindow w = default_window(cfg, FieldKind::Ase);
      w.window_function = fn;
      w.time_window_us = window_us;
      std::vector<QuadraturePair> pairs;
      for (const auto& rec : run) {
        pairs.push_back(extract_quadratures(rec, cfg, noise, FieldKind::Ase, w,
                                            rec.truth.interferometer_phase_rad));
      }
      const VarianceEstimate est = variance_of(pairs);
      CHECK(std::abs(est.mean_var - 1.0) <= 3.0 * est.se);
    }
  }
}

TEST_CASE("sample covariance converges to the model covariance") {
  SequenceConfig cfg = run_config(0.8, 0.11, 0.0715);
  cfg.n_shots = 9000;
  const NoiseModel noise;
  const auto run = synthesize_run(cfg, noise, 4);

  std::vector<QuadraturePair> ase, rase;
  for (const auto& rec : run) {
    const PhaseEstimate ph = estimate_phase(rec, cfg, noise);
    ase.push_back(extract_quadratures(rec, cfg, noise, FieldKind::Ase,
                                      default_window(cfg, FieldKind::Ase), ph.phase_rad));
    rase.push_back(extract_quadratures(rec, cfg, noise, FieldKind::Rase,
                                       default_window(cfg, FieldKind::Rase), ph.phase_rad));
  }

  const GaussianState model = lossy_tmsv_state(cfg.gain);
  const auto n = static_cast<double>(cfg.n_shots);
  Eigen::MatrixXd sample = Eigen::MatrixXd::Zero(4, 4);
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  for (int i = 0; i < cfg.n_shots; ++i) {
    const Eigen::Vector4d v(ase[static_cast<std::size_t>(i)].x, ase[static_cast<std::size_t>(i)].p,
                            rase[static_cast<std::size_t>(i)].x, rase[static_cast<std::size_t>(i)].p);
    mean += v / n;
  }
  for (int i = 0; i < cfg.n_shots; ++i) {
    const Eigen::Vector4d v(ase[static_cast<std::size_t>(i)].x, ase[static_cast<std::size_t>(i)].p,
                            rase[static_cast<std::size_t>(i)].x, rase[static_cast<std::size_t>(i)].p);
    sample += (v - mean) * (v - mean).transpose() / (n - 1.0);
  }

  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double truth = model.cov()(i, j);
      const double se = std::sqrt(
          (model.cov()(i, i) * model.cov()(j, j) + truth * truth) / n);
      CHECK(std::abs(sample(i, j) - truth) <= 4.0 * se);
    }
  }
}

TEST_CASE("empirical vacuum calibration tracks the nominal one") {
  SequenceConfig cfg = run_config(1.4, 0.11, 0.14);
  cfg.n_shots = 3000;
  const NoiseModel noise;
  const auto background = synthesize_background_run(cfg, noise, 3000, 4);

  const SpectralWindow wa = default_window(cfg, FieldKind::Ase);
  const SpectralWindow wr = default_window(cfg, FieldKind::Rase);
  const VacuumNormalization norm = calibrate_vacuum(background, cfg, noise, wa, wr);
  // 3000 background shots pin the scale to ~1.3 %.
  CHECK(norm.ase_scale == doctest::Approx(1.0).epsilon(0.05));
  CHECK(norm.rase_scale == doctest::Approx(1.0).epsilon(0.05));

  const auto run = synthesize_run(cfg, noise, 4);
  std::vector<QuadraturePair> pairs;
  for (const auto& rec : run) {
    const PhaseEstimate ph = estimate_phase(rec, cfg, noise);
    pairs.push_back(extract_quadratures(rec, cfg, noise, FieldKind::Ase, wa, ph.phase_rad, norm));
  }
  const VarianceEstimate est = variance_of(pairs);
  // Calibration noise widens the tolerance band.
  CHECK(std::abs(est.mean_var - 1.6721439927) <=
        3.0 * est.se + 3.0 * 1.6721439927 * 0.026);
}

TEST_CASE("pulse spectral areas recover the echo ratio") {
  SequenceConfig cfg = run_config(1.0, 0.11, 0.2);
  cfg.kind = SequenceKind::I4le;
  cfg.n_shots = 300;
  const NoiseModel noise;
  const auto run = synthesize_run(cfg, noise, 4);

  double sum_in = 0.0, sum_echo = 0.0;
  for (const auto& rec : run) {
    sum_in += pulse_spectral_area(rec, cfg, noise, FieldKind::Ase);
    sum_echo += pulse_spectral_area(rec, cfg, noise, FieldKind::Rase);
  }
  CHECK(sum_echo / sum_in == doctest::Approx(0.2).epsilon(0.05));

  SUBCASE("vacuum area averages to zero") {
    SequenceConfig dark = run_config(0.0);
    dark.n_shots = 600;
    double acc = 0.0;
    for (const auto& rec : synthesize_run(dark, noise, 4)) {
      acc += pulse_spectral_area(rec, dark, noise, FieldKind::Ase);
    }
    acc /= 600.0;
    CHECK(std::abs(acc) < 0.2);
  }
}

TEST_CASE("pairwise_sum is exact on integers and order-fixed") {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i % 7);
  double plain = 0.0;
  for (double x : v) plain += x;
  CHECK(pairwise_sum(v) == plain);
}
