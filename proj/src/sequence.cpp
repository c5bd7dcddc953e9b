#include "rase/sequence.hpp"

#include <cmath>
#include <stdexcept>

namespace rase {

void SequenceConfig::validate() const {
  // GainFeature validates itself on construction; re-run for states produced
  // by deserialization.
  GainFeature check = gain;
  (void)check;

  if (!(ase_window_us > 0.0) || !(rase_window_us > 0.0)) {
    throw std::invalid_argument("SequenceConfig: signal windows must be > 0");
  }
  if (tau_s_us < 0.0 || pi1_len_us < 0.0 || pi2_len_us < 0.0) {
    throw std::invalid_argument("SequenceConfig: pulse and storage times must be >= 0");
  }
  const double max_if = std::max(std::abs(ase_if_hz), std::abs(rase_if_hz));
  if (!(sample_rate_hz >= 4.0 * max_if) || !(sample_rate_hz > 0.0)) {
    throw std::invalid_argument(
        "SequenceConfig: sample_rate_hz must be at least 4x the largest intermediate frequency");
  }
  if (n_shots < 1) throw std::invalid_argument("SequenceConfig: n_shots must be >= 1");
  if (input_pulse.amplitude < 0.0 || !(input_pulse.length_us > 0.0)) {
    throw std::invalid_argument("SequenceConfig: bad input pulse");
  }
  if (kind == SequenceKind::I4le && input_pulse.length_us > ase_window_us) {
    throw std::invalid_argument("SequenceConfig: input pulse longer than the ASE window");
  }
  if (ref_pulse.amplitude < 0.0 || !(ref_pulse.length_us > 0.0)) {
    throw std::invalid_argument("SequenceConfig: bad reference pulse");
  }
}

void NoiseModel::validate() const {
  if (!(vacuum_psd > 0.0)) throw std::invalid_argument("NoiseModel: vacuum_psd must be > 0");
  if (excess_noise < 0.0) throw std::invalid_argument("NoiseModel: excess_noise must be >= 0");
  if (!(visibility > 0.0 && visibility <= 1.0)) {
    throw std::invalid_argument("NoiseModel: visibility must lie in (0, 1]");
  }
}

SequenceLayout SequenceLayout::from(const SequenceConfig& cfg) {
  cfg.validate();
  const double samples_per_us = cfg.sample_rate_hz * 1e-6;
  const auto at = [samples_per_us](double t_us) {
    return static_cast<std::size_t>(std::floor(t_us * samples_per_us + 1e-9));
  };

  SequenceLayout lay;
  lay.sample_rate_hz = cfg.sample_rate_hz;

  double t = 0.0;
  lay.ase = {at(t), at(t + cfg.ase_window_us)};
  lay.input = {lay.ase.begin, at(t + cfg.input_pulse.length_us)};
  t += cfg.ase_window_us + cfg.pi1_len_us + cfg.tau_s_us + cfg.pi2_len_us;
  lay.rase = {at(t), at(t + cfg.rase_window_us)};
  lay.echo = {lay.rase.begin, at(t + cfg.input_pulse.length_us)};
  t += cfg.rase_window_us;
  lay.ref1 = {at(t), at(t + cfg.ref_pulse.length_us)};
  t += cfg.ref_pulse.length_us;
  lay.ref2 = {at(t), at(t + cfg.ref_pulse.length_us)};
  t += cfg.ref_pulse.length_us;

  lay.n_samples = at(t);
  return lay;
}

}  // namespace rase
