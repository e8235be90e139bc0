#include "heartradar/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "heartradar/errors.hpp"

namespace heartradar::synth {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum Stream : std::uint64_t { kRespiration = 1, kRadarNoise = 2, kEcgNoise = 3 };

double logistic(double x) { return 0.5 * (1.0 + std::tanh(0.5 * x)); }

double instantaneous_rate(const SubjectParams& p, double t, double resp_phase) {
  const double fr = p.resp_rate_bpm / 60.0;
  double rate = p.heart_rate_bpm / 60.0 * (1.0 + p.hrv_fraction * std::sin(kTwoPi * fr * t + resp_phase));
  if (p.apnea) rate *= 1.0 - 0.1 * std::max(t, 0.0) / 30.0;
  return rate;
}

double interval_after(const std::vector<double>& beats, std::size_t k) {
  if (k + 1 < beats.size()) return beats[k + 1] - beats[k];
  if (k > 0) return beats[k] - beats[k - 1];
  return 1.0;
}

void validate_subject(const SubjectParams& p) {
  if (!(p.heart_rate_bpm > 0.0) || !(p.resp_rate_bpm > 0.0)) {
    throw InvalidArgument("subject: heart and respiration rates must be positive");
  }
  if (!(p.hrv_fraction >= 0.0 && p.hrv_fraction < 1.0)) {
    throw InvalidArgument("subject: hrv_fraction must lie in [0, 1)");
  }
  if (p.resp_amplitude < 0.0 || p.beat_amplitude < 0.0) {
    throw InvalidArgument("subject: amplitudes must be non-negative");
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::vector<double> generate_beats(const SubjectParams& params, double from, double to, double resp_phase) {
  validate_subject(params);
  std::vector<double> beats;
  double t = from + 0.5 / instantaneous_rate(params, from, resp_phase);
  while (t < to) {
    beats.push_back(t);
    t += 1.0 / instantaneous_rate(params, t, resp_phase);
  }
  return beats;
}

CaptureTruth synth_displacement(const SubjectParams& params, double duration, double frame_rate,
                                std::uint64_t seed, const BeatTemplate& shape) {
  return synth_displacement(params, duration, frame_rate, seed, 0.0, duration, shape);
}

CaptureTruth synth_displacement(const SubjectParams& params, double duration, double frame_rate,
                                std::uint64_t seed, double beats_from, double beats_to,
                                const BeatTemplate& shape) {
  if (!(duration > 0.0)) throw InvalidArgument("synth: duration must be positive");
  if (!(frame_rate > 0.0)) throw InvalidArgument("synth: frame rate must be positive");
  CaptureTruth truth;
  truth.seed = seed;
  truth.duration = duration;
  std::mt19937_64 rng(derive_seed(seed, kRespiration));
  truth.resp_phase = std::uniform_real_distribution<double>(0.0, kTwoPi)(rng);
  truth.heartbeat_times = generate_beats(params, beats_from, beats_to, truth.resp_phase);

  const auto& beats = truth.heartbeat_times;
  for (std::size_t k = 0; k < beats.size(); ++k) {
    const double q = std::sqrt(interval_after(beats, k));
    truth.systole_times.push_back(beats[k] + params.electromechanical_delay);
    truth.p_wave_times.push_back(beats[k] - 0.16 * q);
    truth.t_wave_times.push_back(beats[k] + 0.30 * q);
  }

  const auto n = static_cast<std::size_t>(std::llround(duration * frame_rate));
  auto& d = truth.displacement;
  d.t0 = 0.0;
  d.dt = 1.0 / frame_rate;
  d.values.assign(n, 0.0);
  const double fr = params.resp_rate_bpm / 60.0;
  for (std::size_t i = 0; i < n; ++i) {
    d.values[i] = params.resp_amplitude * std::sin(kTwoPi * fr * d.time(i) + truth.resp_phase);
  }

  const double tau_fall = shape.fall_s / (2.0 * std::log(9.0));
  const double amp = params.beat_amplitude;
  for (std::size_t k = 0; k < beats.size(); ++k) {
    const double q = std::sqrt(interval_after(beats, k));
    const double drop = truth.systole_times[k];
    const double lo = drop - 1.0;
    const double hi = drop + shape.rise2 * q + 1.2;
    const auto first = static_cast<std::size_t>(std::max(0.0, std::ceil(lo * frame_rate)));
    for (std::size_t i = first; i < n && d.time(i) <= hi; ++i) {
      const double x = d.time(i) - drop;
      d.values[i] += amp * (-logistic(x / tau_fall) + 0.5 * logistic((x - shape.rise1 * q) / shape.rise_tau) +
                            0.5 * logistic((x - shape.rise2 * q) / shape.rise_tau));
    }
  }
  return truth;
}

namespace {

// Fills `chirps` consecutive chirps of one (rx, frame) packet. The echo is
// identical across the chirps; noise is drawn chirp after chirp.
void fill_packet(const CaptureTruth& truth, const RadarSynthParams& params, std::uint64_t seed, std::size_t rx,
                 std::size_t frame, std::size_t chirps, std::complex<float>* out) {
  const auto& cfg = params.config;
  const std::size_t ns = cfg.samples_per_chirp;
  const double c = radar::kSpeedOfLight;
  const double range = params.distance - truth.displacement.values[frame];
  const double beat_hz = 2.0 * cfg.slope * range / c;
  const double lambda = cfg.wavelength();
  const double x_rx = (static_cast<double>(rx) - 0.5 * static_cast<double>(cfg.n_rx - 1)) * cfg.rx_spacing_m();
  const double path = std::hypot(params.lateral_offset - x_rx, params.distance) -
                      std::hypot(params.lateral_offset, params.distance);
  // Carrier phase is referenced to the ramp start; the range-bin phase
  // then advances with the centre wavelength.
  const double phase0 = 4.0 * std::numbers::pi * range * cfg.start_frequency() / c + kTwoPi * path / lambda;
  const double per_sample = kTwoPi * beat_hz / cfg.adc_rate();

  const bool noisy = std::isfinite(params.noise_db);
  const double sigma = noisy ? params.amplitude * std::pow(10.0, params.noise_db / 20.0) / std::sqrt(2.0) : 0.0;
  std::mt19937_64 rng(derive_seed(seed, kRadarNoise, rx * 1'000'000'007ULL + frame));
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<std::complex<double>> echo(ns);
  for (std::size_t k = 0; k < ns; ++k) echo[k] = std::polar(params.amplitude, phase0 + per_sample * static_cast<double>(k));
  for (std::size_t ch = 0; ch < chirps; ++ch) {
    for (std::size_t k = 0; k < ns; ++k) {
      std::complex<double> v = echo[k];
      if (noisy) {
        const double re = gauss(rng) * sigma;
        const double im = gauss(rng) * sigma;
        v += std::complex<double>(re, im);
      }
      out[ch * ns + k] = std::complex<float>(v);
    }
  }
}

}  // namespace

radar::IqCube synth_radar_iq(const CaptureTruth& truth, const RadarSynthParams& params, std::uint64_t seed) {
  params.config.validate();
  radar::IqCube cube;
  cube.config = params.config;
  cube.n_frames = truth.displacement.size();
  const std::size_t packet = params.config.chirps_per_frame * params.config.samples_per_chirp;
  cube.data.resize(cube.n_packets() * packet);
  for (std::size_t rx = 0; rx < params.config.n_rx; ++rx) {
    for (std::size_t f = 0; f < cube.n_frames; ++f) {
      fill_packet(truth, params, seed, rx, f, params.config.chirps_per_frame, &cube.at(rx, f, 0, 0));
    }
  }
  return cube;
}

radar::ReducedCube synth_reduced_iq(const CaptureTruth& truth, const RadarSynthParams& params,
                                    std::uint64_t seed) {
  params.config.validate();
  radar::ReducedCube cube;
  cube.config = params.config;
  cube.n_frames = truth.displacement.size();
  const std::size_t ns = params.config.samples_per_chirp;
  cube.data.resize(cube.n_packets() * ns);
  for (std::size_t rx = 0; rx < params.config.n_rx; ++rx) {
    for (std::size_t f = 0; f < cube.n_frames; ++f) {
      fill_packet(truth, params, seed, rx, f, 1, cube.data.data() + cube.index(rx, f, 0));
    }
  }
  return cube;
}

ecg::EcgRecord synth_ecg(const CaptureTruth& truth, double start, double duration, const EcgSynthParams& params,
                         std::uint64_t seed) {
  if (!(duration > 0.0)) throw InvalidArgument("synth_ecg: duration must be positive");
  if (!(params.sample_rate > 0.0)) throw InvalidArgument("synth_ecg: sample rate must be positive");
  const double fs = params.sample_rate;
  const auto n = static_cast<std::size_t>(std::llround(duration * fs));
  std::vector<double> base(n, 0.0);

  auto add_wave = [&](double centre, double amplitude, double sigma) {
    if (amplitude == 0.0) return;
    const double lo = std::ceil((centre - 8.0 * sigma - start) * fs);
    const double hi = std::floor((centre + 8.0 * sigma - start) * fs);
    if (hi < 0.0 || lo >= static_cast<double>(n)) return;
    const auto first = static_cast<std::size_t>(std::max(lo, 0.0));
    const auto last = static_cast<std::size_t>(std::min(hi, static_cast<double>(n) - 1.0));
    for (std::size_t i = first; i <= last; ++i) {
      const double z = (start + static_cast<double>(i) / fs - centre) / sigma;
      base[i] += amplitude * std::exp(-0.5 * z * z);
    }
  };
  const auto& beats = truth.heartbeat_times;
  const double s = params.amplitude_scale;
  for (std::size_t k = 0; k < beats.size(); ++k) {
    const double b = beats[k];
    const double q = std::sqrt(interval_after(beats, k));
    add_wave(b - 0.16 * q, s * params.p_amplitude, 0.020 * q);
    add_wave(b - 0.025, -s * 0.10, 0.008);
    add_wave(b, s * 1.2, 0.010);
    add_wave(b + 0.025, -s * 0.25, 0.008);
    add_wave(b + 0.30 * q, s * 0.35, 0.045 * q);
  }

  ecg::EcgRecord rec;
  rec.sample_rate = fs;
  rec.t0 = start;
  std::vector<double> lead_i(n);
  std::vector<double> lead_iii(n);
  std::array<std::mt19937_64, 2> rng{std::mt19937_64(derive_seed(seed, kEcgNoise, 0)),
                                     std::mt19937_64(derive_seed(seed, kEcgNoise, 1))};
  std::normal_distribution<double> g1(0.0, 1.0);
  std::normal_distribution<double> g3(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = start + static_cast<double>(i) / fs;
    const double common = base[i] + params.wander_mv * std::sin(kTwoPi * 0.2 * t) +
                          params.mains_mv * std::sin(kTwoPi * 50.0 * t);
    lead_i[i] = 0.45 * common + params.noise_mv * g1(rng[0]);
    lead_iii[i] = 0.55 * common + params.noise_mv * g3(rng[1]);
  }
  std::vector<double> lead_ii(n);
  for (std::size_t i = 0; i < n; ++i) lead_ii[i] = lead_i[i] + lead_iii[i];
  rec.leads[ecg::Lead::I] = std::move(lead_i);
  rec.leads[ecg::Lead::II] = std::move(lead_ii);
  rec.leads[ecg::Lead::III] = std::move(lead_iii);
  ecg::refresh_augmented_leads(rec);
  return rec;
}

ecg::EcgRecord inject_impulse(ecg::EcgRecord record, double at) {
  constexpr double kPulseMv = 3300.0;
  constexpr double kPulseS = 0.1;
  const double end = record.t0 + record.duration();
  if (!(at >= record.t0) || at + kPulseS > end + 1e-9) {
    throw InvalidArgument("inject_impulse: pulse at " + std::to_string(at) + " s does not fit in the record");
  }
  const auto first = static_cast<std::size_t>(std::ceil((at - record.t0) * record.sample_rate - 1e-9));
  const auto count = static_cast<std::size_t>(std::llround(kPulseS * record.sample_rate));
  for (ecg::Lead lead : {ecg::Lead::I, ecg::Lead::II}) {
    auto& v = record.leads.at(lead);
    for (std::size_t i = first; i < std::min(first + count, v.size()); ++i) v[i] += kPulseMv;
  }
  ecg::refresh_augmented_leads(record);
  return record;
}

ecg::EcgRecord apply_operator_offset(ecg::EcgRecord record, double offset, CaptureTruth& truth) {
  record.t0 -= offset;
  truth.operator_offset = offset;
  return record;
}

Bundle synth_bundle(const BundleSpec& spec) {
  const double offset = spec.impulse_at ? -*spec.impulse_at : spec.offset;
  if (spec.impulse_at && !(*spec.impulse_at >= 0.0)) throw InvalidArgument("synth: impulse time must be >= 0");
  const double ecg_start = offset;
  const double ecg_duration = offset < 0.0 ? spec.duration - offset : spec.duration;
  const double from = std::min(0.0, ecg_start);
  const double to = std::max(spec.duration, ecg_start + ecg_duration);

  Bundle b;
  b.truth = synth_displacement(spec.subject, spec.duration, spec.frame_rate, spec.seed, from, to, spec.shape);
  b.ecg = synth_ecg(b.truth, ecg_start, ecg_duration, spec.ecg, spec.seed);
  b.ecg = apply_operator_offset(std::move(b.ecg), offset, b.truth);
  if (spec.impulse_at) {
    b.ecg = inject_impulse(std::move(b.ecg), *spec.impulse_at);
    b.truth.impulse_time = spec.impulse_at;
  }
  return b;
}

}  // namespace heartradar::synth
