#include "rase/synth.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>
#include <thread>

#include "rase/rng.hpp"

namespace rase {

namespace {

using cd = std::complex<double>;

constexpr std::uint64_t kSaltShot = 0x52415345u;        // main per-shot stream
constexpr std::uint64_t kSaltExcess = 0x4e4f495345u;    // excess-noise stream
constexpr std::uint64_t kSaltBackground = 0x4241434bu;  // calibration shots

// Unit-energy rect mode on [w.begin, w.end) at carrier f, i.e.
// u[k] = exp(i 2 pi f t_k) / sqrt(Nw). Global sample time keeps synthesis and
// demodulation phase conventions identical.
cd mode_sample(const WindowSpan& w, double f_over_fs, std::size_t k) {
  const double ph = 2.0 * std::numbers::pi * f_over_fs * static_cast<double>(k);
  return cd(std::cos(ph), std::sin(ph)) / std::sqrt(static_cast<double>(w.size()));
}

cd project_mode(const std::vector<cd>& trace, const WindowSpan& w, double f_over_fs) {
  cd acc{0.0, 0.0};
  for (std::size_t k = w.begin; k < w.end; ++k) {
    acc += trace[k] * std::conj(mode_sample(w, f_over_fs, k));
  }
  return acc;
}

void add_mode(std::vector<cd>& trace, const WindowSpan& w, double f_over_fs, cd coeff) {
  for (std::size_t k = w.begin; k < w.end; ++k) {
    trace[k] += coeff * mode_sample(w, f_over_fs, k);
  }
}

// Chain transmission with the visibility either folded in (default) or
// applied as an explicit amplitude factor.
double effective_transmission(const SequenceConfig& cfg, const NoiseModel& noise) {
  double l = cfg.gain.transmission_l;
  if (noise.visibility_separate) l *= noise.visibility * noise.visibility;
  return l;
}

ShotRecord synthesize_impl(const SequenceConfig& cfg, const NoiseModel& noise,
                           std::uint64_t shot_id, std::optional<double> forced_phase,
                           bool background) {
  cfg.validate();
  noise.validate();
  const SequenceLayout lay = SequenceLayout::from(cfg);

  const std::uint64_t stream =
      derive_stream_id(cfg.rng_seed, shot_id, background ? kSaltBackground : kSaltShot);
  ShotRng rng(stream);

  double theta = 2.0 * std::numbers::pi * rng.next_uniform();
  if (forced_phase) {
    theta = std::fmod(*forced_phase, 2.0 * std::numbers::pi);
    if (theta < 0.0) theta += 2.0 * std::numbers::pi;
  }
  const cd rot = cd(std::cos(theta), std::sin(theta));

  // Joint quadrature sample (x_A, p_A, x_R, p_R). Drawn for every RASE shot,
  // background shots included, to keep stream layouts uniform.
  Eigen::Vector4d z = Eigen::Vector4d::Zero();
  if (cfg.kind == SequenceKind::Rase) {
    const double alpha = background ? 0.0 : cfg.gain.alpha_l;
    const GaussianState st = lossy_tmsv_state(
        GainFeature(alpha, effective_transmission(cfg, noise), cfg.gain.reph_transmission,
                    cfg.gain.linewidth_hz));
    const Eigen::Matrix4d chol = st.cov().llt().matrixL();
    Eigen::Vector4d gauss;
    for (int i = 0; i < 4; ++i) gauss(i) = rng.next_normal();
    z = chol * gauss;
  }

  const double root_psd = std::sqrt(noise.vacuum_psd);
  const double noise_sd = 0.5 * root_psd;

  ShotRecord rec;
  rec.shot_id = shot_id;
  rec.truth = ShotTruth{theta, stream};
  rec.trace.resize(lay.n_samples);
  for (auto& s : rec.trace) {
    s = cd(rng.next_normal() * noise_sd, rng.next_normal() * noise_sd);
  }

  const double f_a = cfg.ase_if_hz / cfg.sample_rate_hz;
  const double f_r = cfg.rase_if_hz / cfg.sample_rate_hz;

  if (cfg.kind == SequenceKind::Rase) {
    // Replace each window mode's vacuum content with the drawn joint sample:
    // the demodulated mode amplitude then equals the sample exactly, and the
    // orthogonal complement of the record stays at the vacuum level.
    const cd alpha_a = 0.5 * cd(z(0), z(1)) * root_psd;
    const cd alpha_r = 0.5 * cd(z(2), z(3)) * root_psd;
    add_mode(rec.trace, lay.ase, f_a, alpha_a * rot - project_mode(rec.trace, lay.ase, f_a));
    add_mode(rec.trace, lay.rase, f_r, alpha_r * rot - project_mode(rec.trace, lay.rase, f_r));
  } else if (!background) {
    // Deterministic amplified input pulse and echo on top of the noise floor.
    const double l_eff = effective_transmission(cfg, noise);
    const double amp_in =
        cfg.input_pulse.amplitude * std::exp(0.5 * cfg.gain.alpha_l) * std::sqrt(l_eff);
    const double amp_echo = amp_in * std::sqrt(cfg.gain.reph_transmission);
    add_mode(rec.trace, lay.input, f_a, 0.5 * amp_in * root_psd * rot);
    add_mode(rec.trace, lay.echo, f_r, 0.5 * amp_echo * root_psd * rot);
  }

  // Reference pulses, fixed nominal phase, one per field frequency. They ride
  // on the same interferometer phase as the signal.
  const cd ref = 0.5 * cfg.ref_pulse.amplitude * root_psd * rot *
                 cd(std::cos(cfg.ref_pulse.phase_rad), std::sin(cfg.ref_pulse.phase_rad));
  add_mode(rec.trace, lay.ref1, f_a, ref);
  add_mode(rec.trace, lay.ref2, f_r, ref);

  if (noise.excess_noise > 0.0) {
    ShotRng xrng(derive_stream_id(cfg.rng_seed, shot_id, kSaltExcess));
    const double xsd = 0.5 * std::sqrt(noise.excess_noise * noise.vacuum_psd);
    for (auto& s : rec.trace) {
      s += cd(xrng.next_normal() * xsd, xrng.next_normal() * xsd);
    }
  }

  return rec;
}

std::vector<ShotRecord> run_impl(const SequenceConfig& cfg, const NoiseModel& noise,
                                 int n_shots, int n_threads, bool background) {
  if (n_shots < 1) throw std::invalid_argument("synthesize_run: n_shots must be >= 1");
  std::vector<ShotRecord> records(static_cast<std::size_t>(n_shots));

  const auto worker = [&](int first, int stride) {
    for (int i = first; i < n_shots; i += stride) {
      records[static_cast<std::size_t>(i)] =
          synthesize_impl(cfg, noise, static_cast<std::uint64_t>(i), std::nullopt, background);
    }
  };

  if (n_threads <= 1) {
    worker(0, 1);
  } else {
    const int nt = std::min(n_threads, n_shots);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nt));
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker, t, nt);
    for (auto& th : pool) th.join();
  }
  return records;
}

}  // namespace

ShotRecord synthesize_shot(const SequenceConfig& cfg, const NoiseModel& noise,
                           std::uint64_t shot_id) {
  return synthesize_impl(cfg, noise, shot_id, std::nullopt, /*background=*/false);
}

ShotRecord synthesize_shot_at_phase(const SequenceConfig& cfg, const NoiseModel& noise,
                                    std::uint64_t shot_id, double phase_rad) {
  return synthesize_impl(cfg, noise, shot_id, phase_rad, /*background=*/false);
}

std::vector<ShotRecord> synthesize_run(const SequenceConfig& cfg, const NoiseModel& noise,
                                       int n_threads) {
  return run_impl(cfg, noise, cfg.n_shots, n_threads, /*background=*/false);
}

std::vector<ShotRecord> synthesize_background_run(const SequenceConfig& cfg,
                                                  const NoiseModel& noise, int n_shots,
                                                  int n_threads) {
  return run_impl(cfg, noise, n_shots, n_threads, /*background=*/true);
}

}  // namespace rase
