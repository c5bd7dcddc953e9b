#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "rase/sequence.hpp"

namespace rase {

/// Hidden ground truth for one synthesized shot; test and diagnostic use only.
struct ShotTruth {
  double interferometer_phase_rad = 0.0;  // in [0, 2pi)
  std::uint64_t rng_stream_id = 0;
};

/// One complex baseband heterodyne record spanning the full shot timeline.
struct ShotRecord {
  std::uint64_t shot_id = 0;
  std::vector<std::complex<double>> trace;
  ShotTruth truth;
};

/// Synthesize a single shot. Deterministic given (cfg.rng_seed, shot_id):
/// draws the interferometer phase, the joint ASE/RASE quadrature sample (RASE
/// kind) and the white noise floor from a stream derived from that pair, so
/// shots can be generated in any order or thread count.
ShotRecord synthesize_shot(const SequenceConfig& cfg, const NoiseModel& noise,
                           std::uint64_t shot_id);

/// Same stream as synthesize_shot but with the interferometer phase forced to
/// a given value. Used to build zero-phase twin records for phase-correction
/// diagnostics; all other draws are identical to the unforced shot.
ShotRecord synthesize_shot_at_phase(const SequenceConfig& cfg, const NoiseModel& noise,
                                    std::uint64_t shot_id, double phase_rad);

/// All shots of a run, ordered by shot_id. n_threads > 1 fans the synthesis
/// out across threads; results are identical for any thread count.
std::vector<ShotRecord> synthesize_run(const SequenceConfig& cfg, const NoiseModel& noise,
                                       int n_threads = 1);

/// Vacuum calibration twin of a run: same timeline and noise but zero gain and
/// no input pulse, drawn from streams independent of the signal shots.
std::vector<ShotRecord> synthesize_background_run(const SequenceConfig& cfg,
                                                  const NoiseModel& noise, int n_shots,
                                                  int n_threads = 1);

}  // namespace rase
