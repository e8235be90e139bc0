#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "heartradar/series.hpp"

// Numerical primitives shared by the radar and ECG pipelines. Everything
// here is a pure function of its arguments and safe to call concurrently.
namespace heartradar::dsp {

using Complex = std::complex<double>;

struct ComplexSeries {
  std::vector<Complex> samples;
  double sample_rate = 1.0;
};

// Power grid [time step][frequency bin], two-sided and centered: column j
// holds frequency (j - n_bins/2) * bin_hz, so negative Doppler sits left of
// the middle column.
struct Spectrogram {
  std::size_t n_steps = 0;
  std::size_t n_bins = 0;
  double bin_hz = 0.0;
  double step_s = 0.0;
  std::vector<double> power;

  double at(std::size_t step, std::size_t column) const { return power[step * n_bins + column]; }
  double frequency(std::size_t column) const {
    return (static_cast<double>(column) - static_cast<double>(n_bins / 2)) * bin_hz;
  }
};

/// Symmetric Hann window; w = [1] for n = 1.
std::vector<double> hann_window(std::size_t n);

/// Forward DFT, X[f] = sum_k x[k] exp(-j 2 pi k f / n). Any length >= 1.
std::vector<Complex> fft(std::span<const Complex> x);
/// Inverse DFT including the 1/n factor.
std::vector<Complex> inverse_fft(std::span<const Complex> x);

ComplexSeries fft(const ComplexSeries& x);

struct StftParams {
  std::size_t window_size = 33;
  std::size_t n_bins = 8192;
  std::size_t step = 1;
};

/// Hann-windowed, zero-padded short-time power spectrum. Row m covers
/// x[m*step, m*step + window_size).
Spectrogram stft(const ComplexSeries& x, const StftParams& params);

/// Signed frequency index of a bin in natural FFT order: bins above n/2
/// wrap to negative frequencies.
long signed_bin(std::size_t bin, std::size_t n_bins) noexcept;

// Streaming STFT over several channels of equal length: for every time
// step the channels' power spectra are summed and the strongest bin is
// reported as a signed frequency index. The full spectrogram is never
// materialised. Ties go to the smallest |frequency|, then the negative side.
std::vector<long> summed_stft_peak_bins(std::span<const ComplexSeries> channels,
                                        const StftParams& params);

/// Centered moving average applied `order` times; the window shrinks
/// symmetrically near the edges so output length equals input length.
std::vector<double> moving_average(std::span<const double> x, std::size_t window,
                                   std::size_t order = 1);

enum class FilterKind { highpass, lowpass, bandstop };

struct FilterSpec {
  FilterKind kind = FilterKind::lowpass;
  double low_hz = 0.0;   // cutoff for highpass/lowpass; lower edge for bandstop
  double high_hz = 0.0;  // upper edge for bandstop
  int order = 4;         // overall filter order (bandstop: must be even)
};

// One biquad, a0 normalised to 1.
struct Biquad {
  std::array<double, 3> b{};
  std::array<double, 3> a{1.0, 0.0, 0.0};
};

/// Butterworth design as cascaded second-order sections.
std::vector<Biquad> butterworth(const FilterSpec& spec, double sample_rate);

/// |H(e^{j 2 pi f / fs})| of a section cascade, single pass.
double magnitude_response(std::span<const Biquad> sos, double freq_hz, double sample_rate);

/// Forward-backward filtering with odd-extension padding and steady-state
/// initial conditions: zero phase, squared magnitude response.
std::vector<double> zero_phase_filter(std::span<const double> x, const FilterSpec& spec,
                                      double sample_rate);

/// Cumulative trapezoidal integral; d[0] = 0.
DisplacementSeries integrate(const VelocitySeries& v);
std::vector<double> integrate(std::span<const double> x, double sample_rate);

/// Central differences inside, one-sided at the ends, scaled by sample_rate.
std::vector<double> differentiate(std::span<const double> x, double sample_rate);

/// Removes 2*pi jumps between consecutive samples.
std::vector<double> unwrap_phase(std::span<const double> phase);

double mean(std::span<const double> x);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double stddev(std::span<const double> x);
double median(std::vector<double> x);
/// Median absolute deviation from the median (unscaled).
double median_absolute_deviation(std::span<const double> x);

}  // namespace heartradar::dsp
