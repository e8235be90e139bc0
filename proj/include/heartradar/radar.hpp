#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "heartradar/dsp.hpp"
#include "heartradar/series.hpp"

namespace heartradar::radar {

inline constexpr double kSpeedOfLight = 299'792'458.0;

struct RadarConfig {
  double f_center = 79e9;       // Hz
  double bandwidth = 4e9;       // Hz
  double slope = 100e12;        // Hz/s
  double frame_rate = 625.0;    // frames per second
  std::size_t chirps_per_frame = 16;
  std::size_t samples_per_chirp = 64;
  std::size_t n_rx = 4;
  double rx_spacing = 1.0;      // in units of wavelength / 2
  std::size_t range_fft_size = 256;

  double ramp_time() const { return bandwidth / slope; }
  double wavelength() const { return kSpeedOfLight / f_center; }
  double start_frequency() const { return f_center - 0.5 * bandwidth; }
  /// Samples per chirp over the ramp; the ADC rate is never stated by the hardware config.
  double adc_rate() const { return static_cast<double>(samples_per_chirp) / ramp_time(); }
  double range_resolution() const { return kSpeedOfLight / (2.0 * bandwidth); }
  /// d = f * c * r / (2 B): metres per hertz of beat frequency.
  double distance_per_hz() const { return kSpeedOfLight * ramp_time() / (2.0 * bandwidth); }
  double range_bin_distance(std::size_t bin) const {
    return static_cast<double>(bin) * adc_rate() / static_cast<double>(range_fft_size) *
           distance_per_hz();
  }
  double rx_spacing_m() const { return rx_spacing * wavelength() / 2.0; }
  /// v = f * lambda / 2 for one STFT bin.
  double velocity_resolution(std::size_t stft_bins) const {
    return frame_rate / static_cast<double>(stft_bins) * wavelength() / 2.0;
  }
  double temporal_resolution() const { return 1.0 / frame_rate; }
  /// Largest unambiguous radial speed, frame_rate/2 * lambda/2.
  double max_unambiguous_velocity() const { return frame_rate / 2.0 * wavelength() / 2.0; }

  /// Throws InvalidArgument on non-positive quantities or zero counts.
  void validate() const;
};

// Raw capture, indexed [rx][frame][chirp][sample]. One packet is one
// antenna's samples for one frame; loss_mask (n_rx * n_frames, may be
// empty) flags packets that were zero-filled.
struct IqCube {
  RadarConfig config;
  std::size_t n_frames = 0;
  std::vector<std::complex<float>> data;
  std::vector<std::uint8_t> loss_mask;

  std::size_t index(std::size_t rx, std::size_t frame, std::size_t chirp, std::size_t sample) const {
    return ((rx * n_frames + frame) * config.chirps_per_frame + chirp) * config.samples_per_chirp + sample;
  }
  std::complex<float>& at(std::size_t rx, std::size_t frame, std::size_t chirp, std::size_t sample) {
    return data[index(rx, frame, chirp, sample)];
  }
  const std::complex<float>& at(std::size_t rx, std::size_t frame, std::size_t chirp,
                                std::size_t sample) const {
    return data[index(rx, frame, chirp, sample)];
  }
  std::size_t n_packets() const { return config.n_rx * n_frames; }
};

// First chirp of every frame, indexed [rx][frame][sample]. Slow time is
// then sampled at exactly the frame rate.
struct ReducedCube {
  RadarConfig config;
  std::size_t n_frames = 0;
  std::vector<std::complex<float>> data;
  std::vector<std::uint8_t> loss_mask;

  std::size_t index(std::size_t rx, std::size_t frame, std::size_t sample) const {
    return (rx * n_frames + frame) * config.samples_per_chirp + sample;
  }
  const std::complex<float>& at(std::size_t rx, std::size_t frame, std::size_t sample) const {
    return data[index(rx, frame, sample)];
  }
  std::size_t n_packets() const { return config.n_rx * n_frames; }
};

// Range spectra [rx][frame][range bin].
struct RangeProfileSeries {
  RadarConfig config;
  std::size_t n_frames = 0;
  std::size_t fft_size = 0;
  std::vector<dsp::Complex> data;

  const dsp::Complex& at(std::size_t rx, std::size_t frame, std::size_t bin) const {
    return data[(rx * n_frames + frame) * fft_size + bin];
  }
  double bin_distance(std::size_t bin) const {
    return static_cast<double>(bin) * config.adc_rate() / static_cast<double>(fft_size) *
           config.distance_per_hz();
  }
  /// Slow-time series of one antenna at one range bin.
  dsp::ComplexSeries slow_time(std::size_t rx, std::size_t bin) const;
};

ReducedCube reduce_chirps(const IqCube& cube);

RangeProfileSeries range_fft(const ReducedCube& cube, std::size_t fft_size);

/// Time-mean modulus per range bin, averaged over antennas.
std::vector<double> mean_range_modulus(const RangeProfileSeries& profiles);

/// Argmax of mean_range_modulus, lowest index on ties.
std::size_t select_brightest_range(const RangeProfileSeries& profiles);

struct ArgmaxParams {
  dsp::StftParams stft{33, 8192, 1};
  std::size_t smooth_window = 31;   // frames, removes bin-quantisation jitter
  std::size_t trend_window = 1251;  // frames, macro-motion estimate to subtract
};

/// Per-step velocity from the summed-antenna spectrogram peak, before any
/// smoothing. Step m is stamped at the window centre.
VelocitySeries argmax_velocity_raw(const RangeProfileSeries& profiles, std::size_t range_bin,
                                   const dsp::StftParams& stft);

/// Removes jitter with the small window, then subtracts the large-window trend.
VelocitySeries detrend_velocity(const VelocitySeries& v, std::size_t smooth_window,
                                std::size_t trend_window);

VelocitySeries extract_velocity_argmax(const RangeProfileSeries& profiles, std::size_t range_bin,
                                       const ArgmaxParams& params = {});

struct PhaseParams {
  std::size_t rx = 0;
  std::size_t trend_window = 1251;
};

/// Unwrapped phase at range_bin scaled by lambda / (4 pi), sign flipped so
/// that motion toward the radar is positive; d[0] = 0.
DisplacementSeries phase_displacement(const RangeProfileSeries& profiles, std::size_t range_bin,
                                      std::size_t rx = 0);

VelocitySeries extract_velocity_phase(const RangeProfileSeries& profiles, std::size_t range_bin,
                                      const PhaseParams& params = {});

// Target position relative to the midpoint of an antenna pair lying on the
// x axis: lateral offset along the array, range along boresight.
struct PairGeometry {
  double lateral_offset = 0.1;  // m
};

/// (2 pi / lambda) (r1 - r2), antenna 1 at -spacing/2, antenna 2 at +spacing/2.
double antenna_phase_difference(double target_distance, double pair_spacing, const PairGeometry& geometry,
                                double wavelength);

/// Zeroes round(loss_rate * n_packets) distinct packets chosen uniformly
/// at random; deterministic for a given seed.
IqCube inject_packet_loss(IqCube cube, double loss_rate, std::uint64_t seed);
ReducedCube inject_packet_loss(ReducedCube cube, double loss_rate, std::uint64_t seed);

/// The packet indices (rx * n_frames + frame) inject_packet_loss would zero.
std::vector<std::size_t> choose_lost_packets(std::size_t n_packets, double loss_rate, std::uint64_t seed);

struct RadarProcessing {
  std::size_t range_fft_size = 256;
  ArgmaxParams argmax{};
  PhaseParams phase{};
};

struct RadarResult {
  std::size_t range_bin = 0;
  double range_m = 0.0;
  std::vector<double> mean_modulus;
  VelocitySeries velocity;        // argmax method, detrended
  VelocitySeries velocity_phase;  // phase method
  DisplacementSeries displacement;  // integral of the argmax velocity
};

/// Range FFT, brightest range, both velocity methods and the displacement.
/// Throws NoTarget when the capture carries no energy at all.
RadarResult process_capture(const ReducedCube& cube, const RadarProcessing& processing = {});
RadarResult process_profiles(const RangeProfileSeries& profiles, const RadarProcessing& processing = {});

}  // namespace heartradar::radar
