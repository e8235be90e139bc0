#include "heartradar/radar.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "heartradar/errors.hpp"

namespace heartradar::radar {

void RadarConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidArgument(std::string("radar config: ") + name + " must be positive");
    }
  };
  positive(f_center, "f_center");
  positive(bandwidth, "bandwidth");
  positive(slope, "slope");
  positive(frame_rate, "frame_rate");
  positive(rx_spacing, "rx_spacing");
  if (chirps_per_frame == 0 || samples_per_chirp == 0 || n_rx == 0 || range_fft_size == 0) {
    throw InvalidArgument("radar config: counts must be >= 1");
  }
  if (bandwidth >= f_center) throw InvalidArgument("radar config: bandwidth must be below f_center");
}

dsp::ComplexSeries RangeProfileSeries::slow_time(std::size_t rx, std::size_t bin) const {
  if (rx >= config.n_rx || bin >= fft_size) throw InvalidArgument("slow_time: rx or range bin out of range");
  dsp::ComplexSeries s;
  s.sample_rate = config.frame_rate;
  s.samples.resize(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) s.samples[f] = at(rx, f, bin);
  return s;
}

ReducedCube reduce_chirps(const IqCube& cube) {
  ReducedCube out;
  out.config = cube.config;
  out.n_frames = cube.n_frames;
  out.loss_mask = cube.loss_mask;
  const std::size_t ns = cube.config.samples_per_chirp;
  out.data.resize(cube.config.n_rx * cube.n_frames * ns);
  for (std::size_t rx = 0; rx < cube.config.n_rx; ++rx) {
    for (std::size_t f = 0; f < cube.n_frames; ++f) {
      const auto* src = &cube.at(rx, f, 0, 0);
      std::copy(src, src + ns, out.data.begin() + static_cast<std::ptrdiff_t>(out.index(rx, f, 0)));
    }
  }
  return out;
}

RangeProfileSeries range_fft(const ReducedCube& cube, std::size_t fft_size) {
  const std::size_t ns = cube.config.samples_per_chirp;
  if (fft_size < ns) {
    throw InvalidArgument("range_fft: fft_size " + std::to_string(fft_size) + " is smaller than " +
                          std::to_string(ns) + " samples per chirp");
  }
  RangeProfileSeries out;
  out.config = cube.config;
  out.config.range_fft_size = fft_size;
  out.n_frames = cube.n_frames;
  out.fft_size = fft_size;
  out.data.resize(cube.config.n_rx * cube.n_frames * fft_size);
  std::vector<dsp::Complex> buffer(fft_size);
  for (std::size_t rx = 0; rx < cube.config.n_rx; ++rx) {
    for (std::size_t f = 0; f < cube.n_frames; ++f) {
      std::fill(buffer.begin(), buffer.end(), dsp::Complex{});
      for (std::size_t k = 0; k < ns; ++k) {
        const auto& v = cube.at(rx, f, k);
        buffer[k] = dsp::Complex(v.real(), v.imag());
      }
      const auto spectrum = dsp::fft(buffer);
      std::copy(spectrum.begin(), spectrum.end(),
                out.data.begin() + static_cast<std::ptrdiff_t>((rx * cube.n_frames + f) * fft_size));
    }
  }
  return out;
}

std::vector<double> mean_range_modulus(const RangeProfileSeries& profiles) {
  std::vector<double> mean(profiles.fft_size, 0.0);
  if (profiles.n_frames == 0) return mean;
  for (std::size_t rx = 0; rx < profiles.config.n_rx; ++rx) {
    for (std::size_t f = 0; f < profiles.n_frames; ++f) {
      for (std::size_t b = 0; b < profiles.fft_size; ++b) mean[b] += std::abs(profiles.at(rx, f, b));
    }
  }
  const double norm = static_cast<double>(profiles.config.n_rx * profiles.n_frames);
  for (double& m : mean) m /= norm;
  return mean;
}

std::size_t select_brightest_range(const RangeProfileSeries& profiles) {
  const auto mean = mean_range_modulus(profiles);
  return static_cast<std::size_t>(std::max_element(mean.begin(), mean.end()) - mean.begin());
}

VelocitySeries argmax_velocity_raw(const RangeProfileSeries& profiles, std::size_t range_bin,
                                   const dsp::StftParams& stft) {
  if (range_bin >= profiles.fft_size) throw InvalidArgument("argmax velocity: range bin out of range");
  std::vector<dsp::ComplexSeries> channels;
  channels.reserve(profiles.config.n_rx);
  for (std::size_t rx = 0; rx < profiles.config.n_rx; ++rx) channels.push_back(profiles.slow_time(rx, range_bin));
  const auto bins = dsp::summed_stft_peak_bins(channels, stft);

  const double fs = profiles.config.frame_rate;
  const double hz_per_bin = fs / static_cast<double>(stft.n_bins);
  const double half_lambda = profiles.config.wavelength() / 2.0;
  VelocitySeries v;
  v.t0 = 0.5 * static_cast<double>(stft.window_size - 1) / fs;
  v.dt = static_cast<double>(stft.step) / fs;
  v.values.resize(bins.size());
  for (std::size_t i = 0; i < bins.size(); ++i) {
    // Positive Doppler is a growing range, i.e. motion away from the radar.
    v.values[i] = -static_cast<double>(bins[i]) * hz_per_bin * half_lambda;
  }
  return v;
}

VelocitySeries detrend_velocity(const VelocitySeries& v, std::size_t smooth_window,
                                std::size_t trend_window) {
  VelocitySeries out;
  out.t0 = v.t0;
  out.dt = v.dt;
  auto smooth = dsp::moving_average(v.values, smooth_window, 1);
  const auto trend = dsp::moving_average(smooth, trend_window, 1);
  for (std::size_t i = 0; i < smooth.size(); ++i) smooth[i] -= trend[i];
  out.values = std::move(smooth);
  return out;
}

VelocitySeries extract_velocity_argmax(const RangeProfileSeries& profiles, std::size_t range_bin,
                                       const ArgmaxParams& params) {
  const auto raw = argmax_velocity_raw(profiles, range_bin, params.stft);
  return detrend_velocity(raw, params.smooth_window, params.trend_window);
}

DisplacementSeries phase_displacement(const RangeProfileSeries& profiles, std::size_t range_bin,
                                      std::size_t rx) {
  if (range_bin >= profiles.fft_size) throw InvalidArgument("phase method: range bin out of range");
  if (rx >= profiles.config.n_rx) throw InvalidArgument("phase method: rx index out of range");
  if (profiles.n_frames == 0) throw InvalidArgument("phase method: empty capture");
  std::vector<double> phase(profiles.n_frames);
  for (std::size_t f = 0; f < profiles.n_frames; ++f) phase[f] = std::arg(profiles.at(rx, f, range_bin));
  const auto unwrapped = dsp::unwrap_phase(phase);
  const double scale = -profiles.config.wavelength() / (4.0 * std::numbers::pi);
  DisplacementSeries d;
  d.t0 = 0.0;
  d.dt = 1.0 / profiles.config.frame_rate;
  d.values.resize(unwrapped.size());
  for (std::size_t i = 0; i < unwrapped.size(); ++i) d.values[i] = (unwrapped[i] - unwrapped[0]) * scale;
  return d;
}

VelocitySeries extract_velocity_phase(const RangeProfileSeries& profiles, std::size_t range_bin,
                                      const PhaseParams& params) {
  const auto d = phase_displacement(profiles, range_bin, params.rx);
  if (d.size() < params.trend_window) {
    throw InvalidArgument("phase method: capture shorter than the trend window");
  }
  VelocitySeries v;
  v.t0 = d.t0;
  v.dt = d.dt;
  v.values = dsp::differentiate(d.values, profiles.config.frame_rate);
  const auto trend = dsp::moving_average(v.values, params.trend_window, 1);
  for (std::size_t i = 0; i < v.values.size(); ++i) v.values[i] -= trend[i];
  return v;
}

double antenna_phase_difference(double target_distance, double pair_spacing, const PairGeometry& geometry,
                                double wavelength) {
  if (!(target_distance > 0.0)) throw InvalidArgument("antenna_phase_difference: distance must be positive");
  if (!(wavelength > 0.0)) throw InvalidArgument("antenna_phase_difference: wavelength must be positive");
  const double r1 = std::hypot(geometry.lateral_offset + 0.5 * pair_spacing, target_distance);
  const double r2 = std::hypot(geometry.lateral_offset - 0.5 * pair_spacing, target_distance);
  return 2.0 * std::numbers::pi / wavelength * (r1 - r2);
}

std::vector<std::size_t> choose_lost_packets(std::size_t n_packets, double loss_rate, std::uint64_t seed) {
  if (!(loss_rate >= 0.0 && loss_rate <= 1.0)) {
    throw InvalidArgument("inject_packet_loss: loss_rate must lie in [0, 1]");
  }
  const auto count = static_cast<std::size_t>(std::llround(loss_rate * static_cast<double>(n_packets)));
  std::vector<std::size_t> all(n_packets);
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::size_t> chosen;
  chosen.reserve(count);
  std::mt19937_64 rng(seed);
  std::sample(all.begin(), all.end(), std::back_inserter(chosen), count, rng);
  return chosen;
}

IqCube inject_packet_loss(IqCube cube, double loss_rate, std::uint64_t seed) {
  const auto lost = choose_lost_packets(cube.n_packets(), loss_rate, seed);
  if (cube.loss_mask.size() != cube.n_packets()) cube.loss_mask.assign(cube.n_packets(), 0);
  const std::size_t packet_len = cube.config.chirps_per_frame * cube.config.samples_per_chirp;
  for (std::size_t p : lost) {
    cube.loss_mask[p] = 1;
    auto first = cube.data.begin() + static_cast<std::ptrdiff_t>(p * packet_len);
    std::fill(first, first + static_cast<std::ptrdiff_t>(packet_len), std::complex<float>{});
  }
  return cube;
}

ReducedCube inject_packet_loss(ReducedCube cube, double loss_rate, std::uint64_t seed) {
  const auto lost = choose_lost_packets(cube.n_packets(), loss_rate, seed);
  if (cube.loss_mask.size() != cube.n_packets()) cube.loss_mask.assign(cube.n_packets(), 0);
  const std::size_t packet_len = cube.config.samples_per_chirp;
  for (std::size_t p : lost) {
    cube.loss_mask[p] = 1;
    auto first = cube.data.begin() + static_cast<std::ptrdiff_t>(p * packet_len);
    std::fill(first, first + static_cast<std::ptrdiff_t>(packet_len), std::complex<float>{});
  }
  return cube;
}

RadarResult process_capture(const ReducedCube& cube, const RadarProcessing& processing) {
  cube.config.validate();
  return process_profiles(range_fft(cube, processing.range_fft_size), processing);
}

RadarResult process_profiles(const RangeProfileSeries& profiles, const RadarProcessing& processing) {
  RadarResult result;
  result.mean_modulus = mean_range_modulus(profiles);
  const auto peak = std::max_element(result.mean_modulus.begin(), result.mean_modulus.end());
  if (peak == result.mean_modulus.end() || !(*peak > 0.0)) {
    throw NoTarget("no target: the capture carries no reflected energy");
  }
  result.range_bin = static_cast<std::size_t>(peak - result.mean_modulus.begin());
  result.range_m = profiles.bin_distance(result.range_bin);
  result.velocity = extract_velocity_argmax(profiles, result.range_bin, processing.argmax);
  result.velocity_phase = extract_velocity_phase(profiles, result.range_bin, processing.phase);
  result.displacement = dsp::integrate(result.velocity);
  return result;
}

}  // namespace heartradar::radar
