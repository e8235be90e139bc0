#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "heartradar/ecg.hpp"
#include "heartradar/radar.hpp"
#include "heartradar/series.hpp"

namespace heartradar::synth {

/// Independent stream seed for one consumer of a run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

struct SubjectParams {
  double heart_rate_bpm = 70.0;
  double hrv_fraction = 0.05;      // respiratory modulation depth of the rate
  double resp_rate_bpm = 12.0;
  double resp_amplitude = 4e-3;    // m
  double beat_amplitude = 0.5e-3;  // m
  bool apnea = false;              // rate falls linearly by 10% per 30 s
  double electromechanical_delay = 0.0;  // s, R apex to the systolic drop
};

// Displacement of one beat around its drop time x = 0, in units of the
// beat amplitude: a logistic fall, then two half-height logistic rises at
// rise1/rise2 * sqrt(RR) seconds.
struct BeatTemplate {
  double fall_s = 0.08;  // 10-90% duration of the fall
  double rise1 = 0.15;
  double rise2 = 0.30;
  double rise_tau = 0.03;  // s
};

struct CaptureTruth {
  std::vector<double> heartbeat_times;  // R apexes, radar clock
  std::vector<double> systole_times;    // displacement drops, radar clock
  std::vector<double> p_wave_times;
  std::vector<double> t_wave_times;
  DisplacementSeries displacement;      // frame-rate ground truth
  double duration = 0.0;
  double resp_phase = 0.0;
  double operator_offset = 0.0;         // ECG start - radar start
  std::optional<double> impulse_time;   // ECG clock
  std::uint64_t seed = 0;
};

/// Beat times covering [from, to): the first beat half an interval after
/// `from`, each next one a full instantaneous period later.
std::vector<double> generate_beats(const SubjectParams& params, double from, double to, double resp_phase);

/// Chest displacement d(t) sampled at k / frame_rate for k < round(duration * frame_rate),
/// with beats over [0, duration).
CaptureTruth synth_displacement(const SubjectParams& params, double duration, double frame_rate,
                                std::uint64_t seed, const BeatTemplate& shape = {});

/// Same, with beats drawn over [beats_from, beats_to) so an ECG window
/// outside the radar capture still sees heartbeats. Every generated beat
/// is listed in the truth.
CaptureTruth synth_displacement(const SubjectParams& params, double duration, double frame_rate,
                                std::uint64_t seed, double beats_from, double beats_to,
                                const BeatTemplate& shape = {});

struct RadarSynthParams {
  radar::RadarConfig config{};
  double distance = 0.48;  // m, rest position of the chest
  double lateral_offset = 0.0;  // m, relative to the array centre
  double amplitude = 1.0;
  double noise_db = -20.0;  // noise power per sample relative to the echo; -inf disables
};

/// FMCW beat signal of a single point target at distance - d(t). Noise is
/// drawn per (rx, frame) packet starting with chirp 0, so the reduced cube
/// below is bit-identical to reduce_chirps of this one.
radar::IqCube synth_radar_iq(const CaptureTruth& truth, const RadarSynthParams& params, std::uint64_t seed);
radar::ReducedCube synth_reduced_iq(const CaptureTruth& truth, const RadarSynthParams& params,
                                    std::uint64_t seed);

struct EcgSynthParams {
  double sample_rate = 2000.0;
  double amplitude_scale = 1.0;
  double p_amplitude = 0.12;  // mV at lead II
  double noise_mv = 0.007;    // per bipolar lead I and III
  double wander_mv = 0.0;     // 0.2 Hz baseline wander
  double mains_mv = 0.0;      // 50 Hz interference
};

/// Leads over the radar-clock window [start, start + duration); t0 = start.
/// Lead I and III are scaled copies of one waveform plus independent noise,
/// II = I + III and the augmented leads follow.
ecg::EcgRecord synth_ecg(const CaptureTruth& truth, double start, double duration, const EcgSynthParams& params,
                         std::uint64_t seed);

/// Adds a 3300 mV, 100 ms rectangular pulse to leads I and II from time `at`
/// (record clock) and refreshes the augmented leads.
ecg::EcgRecord inject_impulse(ecg::EcgRecord record, double at);

/// Re-labels a radar-clock ECG onto its own clock, which started `offset`
/// seconds after the radar's; the truth keeps the value.
ecg::EcgRecord apply_operator_offset(ecg::EcgRecord record, double offset, CaptureTruth& truth);

struct BundleSpec {
  SubjectParams subject{};
  BeatTemplate shape{};
  EcgSynthParams ecg{};
  double duration = 30.0;          // s of radar capture
  double frame_rate = 625.0;
  double offset = 0.0;             // ignored when impulse_at is set
  std::optional<double> impulse_at;  // ECG started this long before the radar
  std::uint64_t seed = 1;
};

struct Bundle {
  CaptureTruth truth;
  ecg::EcgRecord ecg;  // own clock, starts at 0
};

/// Displacement truth and ECG. With impulse_at = T the ECG starts T seconds
/// before the radar (offset -T) and carries the impulse at T on its clock.
Bundle synth_bundle(const BundleSpec& spec);

}  // namespace heartradar::synth
