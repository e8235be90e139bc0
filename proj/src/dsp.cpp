#include "heartradar/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <string>

#include "heartradar/errors.hpp"

namespace heartradar::dsp {

namespace {

// FFTW planning is not thread-safe; execution of an existing plan on new
// arrays is. Plans are created once per (shape, direction) under a lock and
// then executed through the new-array interface. FFTW_ESTIMATE keeps the
// chosen algorithm, and therefore every output bit, identical across runs.
struct PlanKey {
  int n;
  int howmany;
  int sign;
  auto operator<=>(const PlanKey&) const = default;
};

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int n, int howmany, int sign) {
    std::lock_guard lock(mutex_);
    const PlanKey key{n, howmany, sign};
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    const std::size_t total = static_cast<std::size_t>(n) * static_cast<std::size_t>(howmany);
    fftw_complex* in = fftw_alloc_complex(total);
    fftw_complex* out = fftw_alloc_complex(total);
    fftw_plan plan = fftw_plan_many_dft(1, &n, howmany, in, nullptr, 1, n, out, nullptr, 1, n, sign,
                                        FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, plan);
    return plan;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<PlanKey, fftw_plan> plans_;
};

void execute(int n, int howmany, int sign, const Complex* in, Complex* out) {
  fftw_plan plan = PlanCache::instance().get(n, howmany, sign);
  // std::complex<double> is layout-compatible with fftw_complex.
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Power spectrum of a window of `window` samples zero-padded to `n_bins`.
//
// When n_bins = M * L with L >= window, bin f = l*M + m satisfies
//   X[l*M + m] = sum_k (y[k] e^{-j 2 pi k m / N}) e^{-j 2 pi k l / L},
// i.e. M short FFTs of length L over twiddled copies of the window. The
// spectrum is left in that [m][l] layout; natural_bin() maps back.
class ZeroPaddedSpectrum {
 public:
  ZeroPaddedSpectrum(std::size_t window, std::size_t n_bins) : window_(window), n_bins_(n_bins) {
    const std::size_t l = next_pow2(window);
    if (l <= n_bins && n_bins % l == 0) {
      short_len_ = l;
      groups_ = n_bins / l;
      twiddle_.resize(groups_ * window_);
      for (std::size_t m = 0; m < groups_; ++m) {
        for (std::size_t k = 0; k < window_; ++k) {
          const double angle = -2.0 * std::numbers::pi * static_cast<double>((k * m) % n_bins) /
                               static_cast<double>(n_bins);
          twiddle_[m * window_ + k] = std::polar(1.0, angle);
        }
      }
    } else {
      short_len_ = n_bins;
      groups_ = 1;
    }
    in_.assign(n_bins_, Complex{});
    out_.assign(n_bins_, Complex{});
  }

  // Adds |X|^2 of the windowed samples into `power` (layout order).
  void accumulate(std::span<const Complex> windowed, std::span<double> power) {
    if (groups_ == 1) {
      std::copy(windowed.begin(), windowed.end(), in_.begin());
    } else {
      for (std::size_t m = 0; m < groups_; ++m) {
        Complex* dst = in_.data() + m * short_len_;
        const Complex* tw = twiddle_.data() + m * window_;
        for (std::size_t k = 0; k < window_; ++k) dst[k] = windowed[k] * tw[k];
      }
    }
    execute(static_cast<int>(short_len_), static_cast<int>(groups_), FFTW_FORWARD, in_.data(),
            out_.data());
    for (std::size_t i = 0; i < n_bins_; ++i) power[i] += std::norm(out_[i]);
  }

  std::size_t natural_bin(std::size_t layout_index) const noexcept {
    const std::size_t m = layout_index / short_len_;
    const std::size_t l = layout_index % short_len_;
    return l * groups_ + m;
  }

 private:
  std::size_t window_;
  std::size_t n_bins_;
  std::size_t short_len_ = 0;
  std::size_t groups_ = 1;
  std::vector<Complex> twiddle_;
  std::vector<Complex> in_;
  std::vector<Complex> out_;
};

void check_stft(std::size_t length, const StftParams& p) {
  if (p.window_size == 0) throw InvalidArgument("stft: window_size must be >= 1");
  if (p.step == 0) throw InvalidArgument("stft: step must be >= 1");
  if (p.n_bins < p.window_size) throw InvalidArgument("stft: n_bins must be >= window_size");
  if (p.window_size > length) {
    throw InvalidArgument("stft: window_size " + std::to_string(p.window_size) +
                          " exceeds series length " + std::to_string(length));
  }
}

}  // namespace

std::vector<double> hann_window(std::size_t n) {
  if (n == 0) throw InvalidArgument("hann_window: n must be >= 1");
  if (n == 1) return {1.0};
  std::vector<double> w(n);
  const double denom = static_cast<double>(n - 1);
  for (std::size_t k = 0; k <= (n - 1) / 2; ++k) {
    const double v = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / denom));
    w[k] = v;
    w[n - 1 - k] = v;
  }
  return w;
}

std::vector<Complex> fft(std::span<const Complex> x) {
  if (x.empty()) throw InvalidArgument("fft: empty input");
  std::vector<Complex> out(x.size());
  execute(static_cast<int>(x.size()), 1, FFTW_FORWARD, x.data(), out.data());
  return out;
}

std::vector<Complex> inverse_fft(std::span<const Complex> x) {
  if (x.empty()) throw InvalidArgument("inverse_fft: empty input");
  std::vector<Complex> out(x.size());
  execute(static_cast<int>(x.size()), 1, FFTW_BACKWARD, x.data(), out.data());
  const double scale = 1.0 / static_cast<double>(x.size());
  for (auto& v : out) v *= scale;
  return out;
}

ComplexSeries fft(const ComplexSeries& x) {
  return ComplexSeries{fft(std::span<const Complex>(x.samples)), x.sample_rate};
}

long signed_bin(std::size_t bin, std::size_t n_bins) noexcept {
  const auto b = static_cast<long>(bin);
  const auto n = static_cast<long>(n_bins);
  return b >= (n + 1) / 2 ? b - n : b;
}

Spectrogram stft(const ComplexSeries& x, const StftParams& params) {
  check_stft(x.samples.size(), params);
  const std::size_t n = params.n_bins;
  const auto window = hann_window(params.window_size);
  const std::size_t steps = (x.samples.size() - params.window_size) / params.step + 1;

  Spectrogram s;
  s.n_steps = steps;
  s.n_bins = n;
  s.bin_hz = x.sample_rate / static_cast<double>(n);
  s.step_s = static_cast<double>(params.step) / x.sample_rate;
  s.power.assign(steps * n, 0.0);

  ZeroPaddedSpectrum engine(params.window_size, n);
  std::vector<Complex> windowed(params.window_size);
  std::vector<double> layout(n);
  for (std::size_t m = 0; m < steps; ++m) {
    const Complex* src = x.samples.data() + m * params.step;
    for (std::size_t k = 0; k < params.window_size; ++k) windowed[k] = src[k] * window[k];
    std::fill(layout.begin(), layout.end(), 0.0);
    engine.accumulate(windowed, layout);
    double* row = s.power.data() + m * n;
    for (std::size_t i = 0; i < n; ++i) {
      const long f = signed_bin(engine.natural_bin(i), n);
      row[static_cast<std::size_t>(f + static_cast<long>(n / 2))] = layout[i];
    }
  }
  return s;
}

std::vector<long> summed_stft_peak_bins(std::span<const ComplexSeries> channels,
                                        const StftParams& params) {
  if (channels.empty()) throw InvalidArgument("summed_stft_peak_bins: no channels");
  const std::size_t length = channels.front().samples.size();
  for (const auto& c : channels) {
    if (c.samples.size() != length) throw InvalidArgument("summed_stft_peak_bins: channel lengths differ");
  }
  check_stft(length, params);
  const std::size_t n = params.n_bins;
  const auto window = hann_window(params.window_size);
  const std::size_t steps = (length - params.window_size) / params.step + 1;
  const std::size_t deg = params.window_size - 1;
  const std::size_t coarse_n = next_pow2(std::max<std::size_t>(16 * deg, params.window_size));

  std::vector<long> peaks(steps);
  std::vector<std::vector<Complex>> windowed(channels.size(), std::vector<Complex>(params.window_size));
  auto window_step = [&](std::size_t m) {
    for (std::size_t c = 0; c < channels.size(); ++c) {
      const Complex* src = channels[c].samples.data() + m * params.step;
      for (std::size_t k = 0; k < params.window_size; ++k) windowed[c][k] = src[k] * window[k];
    }
  };
  auto better = [](double p, long f, double best, long best_bin) {
    return p > best || (p == best && (std::labs(f) < std::labs(best_bin) ||
                                      (std::labs(f) == std::labs(best_bin) && f < best_bin)));
  };

  if (deg == 0 || 2 * coarse_n > n || n % coarse_n != 0) {
    // Exhaustive search over every bin.
    ZeroPaddedSpectrum engine(params.window_size, n);
    std::vector<long> layout_to_signed(n);
    for (std::size_t i = 0; i < n; ++i) layout_to_signed[i] = signed_bin(engine.natural_bin(i), n);
    std::vector<double> power(n);
    for (std::size_t m = 0; m < steps; ++m) {
      window_step(m);
      std::fill(power.begin(), power.end(), 0.0);
      for (const auto& w : windowed) engine.accumulate(w, power);
      double best = -1.0;
      long best_bin = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (better(power[i], layout_to_signed[i], best, best_bin)) {
          best = power[i];
          best_bin = layout_to_signed[i];
        }
      }
      peaks[m] = best_bin;
    }
    return peaks;
  }

  // Coarse-to-fine search. The summed power P(theta) is a non-negative
  // trigonometric polynomial of degree deg, so |P''| <= deg^2 max P and on a
  // coarse interval of width h, P cannot exceed the larger endpoint by more
  // than deg^2 max P h^2 / 8. Only intervals that could still reach the coarse
  // maximum are evaluated bin by bin, which returns the exhaustive argmax.
  const std::size_t stride = n / coarse_n;
  const double h = 2.0 * std::numbers::pi / static_cast<double>(coarse_n);
  const double mu = static_cast<double>(deg * deg) * h * h / 8.0;
  std::vector<Complex> twiddle(n);
  for (std::size_t q = 0; q < n; ++q) {
    twiddle[q] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(q) / static_cast<double>(n));
  }
  std::vector<Complex> padded(coarse_n);
  std::vector<Complex> spectrum(coarse_n);
  std::vector<double> coarse(coarse_n);
  std::vector<std::size_t> seen(n, 0);

  for (std::size_t m = 0; m < steps; ++m) {
    window_step(m);
    std::fill(coarse.begin(), coarse.end(), 0.0);
    for (const auto& w : windowed) {
      std::copy(w.begin(), w.end(), padded.begin());
      std::fill(padded.begin() + static_cast<std::ptrdiff_t>(w.size()), padded.end(), Complex{});
      execute(static_cast<int>(coarse_n), 1, FFTW_FORWARD, padded.data(), spectrum.data());
      for (std::size_t i = 0; i < coarse_n; ++i) coarse[i] += std::norm(spectrum[i]);
    }
    const double coarse_max = *std::max_element(coarse.begin(), coarse.end());
    if (coarse_max == 0.0) {
      peaks[m] = 0;
      continue;
    }
    const double upper = coarse_max / (1.0 - mu);
    const double margin = mu * upper + 1e-9 * upper;

    double best = -1.0;
    long best_bin = 0;
    for (std::size_t i = 0; i < coarse_n; ++i) {
      const double edge = std::max(coarse[i], coarse[(i + 1) % coarse_n]);
      if (edge + margin < coarse_max) continue;
      for (std::size_t j = 0; j <= stride; ++j) {
        const std::size_t f = (i * stride + j) % n;
        if (seen[f] == m + 1) continue;
        seen[f] = m + 1;
        double p = 0.0;
        for (const auto& w : windowed) {
          Complex acc{};
          std::size_t q = 0;
          for (std::size_t k = 0; k < w.size(); ++k) {
            acc += w[k] * twiddle[q];
            q += f;
            if (q >= n) q -= n;
          }
          p += std::norm(acc);
        }
        const long sf = signed_bin(f, n);
        if (better(p, sf, best, best_bin)) {
          best = p;
          best_bin = sf;
        }
      }
    }
    peaks[m] = best_bin;
  }
  return peaks;
}

std::vector<double> moving_average(std::span<const double> x, std::size_t window,
                                   std::size_t order) {
  if (window == 0 || window % 2 == 0) {
    throw InvalidArgument("moving_average: window must be odd and positive, got " +
                          std::to_string(window));
  }
  if (order == 0) throw InvalidArgument("moving_average: order must be >= 1");
  if (window > x.size()) {
    throw InvalidArgument("moving_average: window " + std::to_string(window) +
                          " exceeds series length " + std::to_string(x.size()));
  }
  const std::size_t n = x.size();
  const std::size_t half = window / 2;
  std::vector<double> current(x.begin(), x.end());
  std::vector<double> prefix(n + 1);
  for (std::size_t pass = 0; pass < order; ++pass) {
    prefix[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + current[i];
    std::vector<double> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t h = std::min({half, i, n - 1 - i});
      next[i] = (prefix[i + h + 1] - prefix[i - h]) / static_cast<double>(2 * h + 1);
    }
    current = std::move(next);
  }
  return current;
}

DisplacementSeries integrate(const VelocitySeries& v) {
  if (v.empty()) throw InvalidArgument("integrate: empty series");
  DisplacementSeries d;
  d.t0 = v.t0;
  d.dt = v.dt;
  d.values = integrate(v.values, 1.0 / v.dt);
  return d;
}

std::vector<double> integrate(std::span<const double> x, double sample_rate) {
  if (x.empty()) throw InvalidArgument("integrate: empty series");
  const double half_dt = 0.5 / sample_rate;
  std::vector<double> out(x.size());
  out[0] = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) out[i] = out[i - 1] + half_dt * (x[i - 1] + x[i]);
  return out;
}

std::vector<double> differentiate(std::span<const double> x, double sample_rate) {
  const std::size_t n = x.size();
  if (n < 2) throw InvalidArgument("differentiate: need at least 2 samples");
  std::vector<double> out(n);
  out[0] = (x[1] - x[0]) * sample_rate;
  out[n - 1] = (x[n - 1] - x[n - 2]) * sample_rate;
  const double half_rate = 0.5 * sample_rate;
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (x[i + 1] - x[i - 1]) * half_rate;
  return out;
}

std::vector<double> unwrap_phase(std::span<const double> phase) {
  std::vector<double> out(phase.begin(), phase.end());
  if (out.size() < 2) return out;
  constexpr double pi = std::numbers::pi;
  double correction = 0.0;
  for (std::size_t i = 1; i < phase.size(); ++i) {
    const double d = phase[i] - phase[i - 1];
    double dmod = std::fmod(d + pi, 2.0 * pi);
    if (dmod < 0.0) dmod += 2.0 * pi;
    dmod -= pi;
    if (dmod == -pi && d > 0.0) dmod = pi;
    if (std::abs(d) >= pi) correction += dmod - d;
    out[i] = phase[i] + correction;
  }
  return out;
}

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double acc = 0.0;
  for (double v : x) acc += (v - m) * (v - m);
  return std::sqrt(acc / static_cast<double>(x.size() - 1));
}

double median(std::vector<double> x) {
  if (x.empty()) return 0.0;
  const std::size_t mid = x.size() / 2;
  std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(mid), x.end());
  const double upper = x[mid];
  if (x.size() % 2 == 1) return upper;
  const double lower = *std::max_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double median_absolute_deviation(std::span<const double> x) {
  const double m = median(std::vector<double>(x.begin(), x.end()));
  std::vector<double> dev(x.size());
  std::transform(x.begin(), x.end(), dev.begin(), [m](double v) { return std::abs(v - m); });
  return median(std::move(dev));
}

}  // namespace heartradar::dsp
