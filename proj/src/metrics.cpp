#include "heartradar/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "heartradar/dsp.hpp"
#include "heartradar/errors.hpp"
#include "heartradar/peaks.hpp"

namespace heartradar::metrics {

namespace {

struct Overlap {
  std::size_t first1 = 0;
  std::size_t first2 = 0;
  std::size_t count = 0;
};

Overlap overlap(const VelocitySeries& a, const VelocitySeries& b) {
  if (a.empty() || b.empty()) throw InvalidArgument("series comparison: empty series");
  if (std::abs(a.dt - b.dt) > 1e-9 * std::abs(a.dt)) throw InvalidArgument("series comparison: sample periods differ");
  const double lag = (b.t0 - a.t0) / a.dt;
  const double rounded = std::round(lag);
  if (std::abs(lag - rounded) > 1e-6) throw InvalidArgument("series comparison: grids are not aligned");
  const auto k = static_cast<long long>(rounded);
  Overlap o;
  if (k >= 0) o.first1 = static_cast<std::size_t>(k);
  else o.first2 = static_cast<std::size_t>(-k);
  if (o.first1 >= a.size() || o.first2 >= b.size()) throw InvalidArgument("series comparison: grids do not overlap");
  o.count = std::min(a.size() - o.first1, b.size() - o.first2);
  return o;
}

}  // namespace

std::vector<double> detect_downward_peaks(const VelocitySeries& v, const DownPeakParams& params) {
  std::vector<double> out;
  if (v.empty()) return out;
  std::vector<double> neg(v.values.size());
  std::transform(v.values.begin(), v.values.end(), neg.begin(), [](double x) { return -x; });
  dsp::PeakCriteria criteria;
  criteria.min_prominence = params.mad_factor * dsp::median_absolute_deviation(v.values);
  criteria.min_distance = params.min_separation_s / v.dt;
  for (const auto& p : dsp::find_peaks(neg, criteria)) {
    double shift = 0.0;
    if (params.refine && p.index > 0 && p.index + 1 < neg.size()) {
      const double y0 = neg[p.index - 1];
      const double y1 = neg[p.index];
      const double y2 = neg[p.index + 1];
      const double curvature = y0 - 2.0 * y1 + y2;
      if (curvature < 0.0) shift = std::clamp(0.5 * (y0 - y2) / curvature, -0.5, 0.5);
    }
    out.push_back(v.time(p.index) + shift * v.dt);
  }
  return out;
}

double point_distance(const VelocitySeries& v1, const VelocitySeries& v2) {
  const auto o = overlap(v1, v2);
  double sum = 0.0;
  for (std::size_t i = 0; i < o.count; ++i) sum += std::abs(v1.values[o.first1 + i] - v2.values[o.first2 + i]);
  return sum / static_cast<double>(o.count);
}

double snr_vs_clean(const VelocitySeries& noisy, const VelocitySeries& clean) {
  const auto o = overlap(noisy, clean);
  double signal = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i < o.count; ++i) {
    const double c = clean.values[o.first2 + i];
    const double e = noisy.values[o.first1 + i] - c;
    signal += c * c;
    error += e * e;
  }
  if (!(signal > 0.0)) throw UndefinedSnr("SNR is undefined for a clean series with zero power");
  if (error == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal / error);
}

IntervalReport rmse_intervals(std::span<const double> r_times, std::span<const double> peak_times, double offset,
                              double match_window) {
  IntervalReport report;
  std::vector<bool> used(peak_times.size(), false);
  for (double r : r_times) {
    const double target = r + offset;
    std::size_t best = peak_times.size();
    double best_gap = match_window;
    for (std::size_t k = 0; k < peak_times.size(); ++k) {
      const double gap = std::abs(peak_times[k] - target);
      if (!used[k] && gap <= best_gap) {
        if (best < peak_times.size() && gap == best_gap) continue;
        best = k;
        best_gap = gap;
      }
    }
    if (best < peak_times.size()) {
      used[best] = true;
      report.matches.emplace_back(r, peak_times[best]);
    } else {
      report.unmatched_r.push_back(r);
    }
  }
  for (std::size_t k = 0; k < peak_times.size(); ++k) {
    if (!used[k]) report.unmatched_radar.push_back(peak_times[k]);
  }
  if (report.matches.size() < 2) {
    throw InsufficientData("interval RMSE needs at least 2 matched beats, got " +
                           std::to_string(report.matches.size()));
  }
  double sum = 0.0;
  for (std::size_t k = 1; k < report.matches.size(); ++k) {
    IntervalRow row;
    row.r_start = report.matches[k - 1].first;
    row.rr_interval = report.matches[k].first - report.matches[k - 1].first;
    row.radar_interval = report.matches[k].second - report.matches[k - 1].second;
    const double e = row.rr_interval - row.radar_interval;
    sum += e * e;
    report.rows.push_back(row);
  }
  report.rmse_ms = 1000.0 * std::sqrt(sum / static_cast<double>(report.rows.size()));
  return report;
}

BenchReport run_bench(const radar::ReducedCube& clean, const BenchParams& params,
                      std::optional<std::span<const double>> r_times) {
  BenchReport report;
  const auto base = radar::process_capture(clean, params.processing);
  const auto lossy_cube = radar::inject_packet_loss(clean, params.loss_rate, params.loss_seed);
  report.lost_packets = static_cast<std::size_t>(
      std::count(lossy_cube.loss_mask.begin(), lossy_cube.loss_mask.end(), std::uint8_t{1}));

  // Score the lossy capture at the clean capture's range bin so the two
  // runs compare the same slow-time signal.
  const auto profiles = radar::range_fft(lossy_cube, params.processing.range_fft_size);
  const auto lossy_argmax = radar::extract_velocity_argmax(profiles, base.range_bin, params.processing.argmax);
  const auto lossy_phase = radar::extract_velocity_phase(profiles, base.range_bin, params.processing.phase);

  report.range_bin = base.range_bin;
  report.point_distance_mean = point_distance(base.velocity_phase, base.velocity);
  report.snr_argmax_db = snr_vs_clean(lossy_argmax, base.velocity);
  report.snr_phase_db = snr_vs_clean(lossy_phase, base.velocity_phase);
  report.snr_gap_db = report.snr_argmax_db - report.snr_phase_db;

  auto max_abs = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };
  report.max_phase_spike = max_abs(lossy_phase.values);
  const double clean_peak = max_abs(base.velocity_phase.values);
  report.phase_spike_ratio = clean_peak > 0.0 ? report.max_phase_spike / clean_peak : 0.0;

  if (r_times) {
    const auto peaks = detect_downward_peaks(base.velocity, params.peaks);
    report.intervals = rmse_intervals(*r_times, peaks);
  }
  return report;
}

}  // namespace heartradar::metrics
