#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "heartradar/radar.hpp"
#include "heartradar/series.hpp"

namespace heartradar::metrics {

struct DownPeakParams {
  double mad_factor = 3.0;
  double min_separation_s = 0.3;
  bool refine = true;  // parabolic sub-sample vertex
};

/// Times of local minima of v whose prominence exceeds mad_factor * MAD(v),
/// no two closer than min_separation_s; strictly increasing.
std::vector<double> detect_downward_peaks(const VelocitySeries& v, const DownPeakParams& params = {});

/// Mean |v1 - v2| over the overlap of two series on a common grid.
/// Throws InvalidArgument when the grids differ or do not overlap.
double point_distance(const VelocitySeries& v1, const VelocitySeries& v2);

/// 10 log10(meansq(clean) / meansq(noisy - clean)) over the overlap; +inf
/// when the two agree exactly. Throws UndefinedSnr for a silent clean series.
double snr_vs_clean(const VelocitySeries& noisy, const VelocitySeries& clean);

struct IntervalRow {
  double r_start = 0.0;
  double rr_interval = 0.0;     // s
  double radar_interval = 0.0;  // s
};

struct IntervalReport {
  double rmse_ms = 0.0;
  std::vector<std::pair<double, double>> matches;  // (R time, radar time)
  std::vector<double> unmatched_r;
  std::vector<double> unmatched_radar;
  std::vector<IntervalRow> rows;
};

/// Pairs each R (moved by `offset` onto the radar clock) with the nearest
/// unused radar peak within match_window, then compares intervals between
/// consecutive matched beats. Throws InsufficientData below 2 matches.
IntervalReport rmse_intervals(std::span<const double> r_times, std::span<const double> peak_times,
                              double offset = 0.0, double match_window = 0.2);

struct BenchParams {
  double loss_rate = 0.01;
  std::uint64_t loss_seed = 1;
  radar::RadarProcessing processing{};
  DownPeakParams peaks{};
};

struct BenchReport {
  std::size_t range_bin = 0;
  double point_distance_mean = 0.0;  // m/s, phase vs argmax on the clean capture
  double snr_argmax_db = 0.0;
  double snr_phase_db = 0.0;
  double snr_gap_db = 0.0;
  double phase_spike_ratio = 0.0;    // max |lossy phase v| / max |clean phase v|
  double max_phase_spike = 0.0;      // m/s
  std::size_t lost_packets = 0;
  std::optional<IntervalReport> intervals;
};

/// Both velocity methods on the capture as given and after zero-filling
/// loss_rate of its packets. When R times are supplied (radar clock), the
/// clean argmax velocity is also scored on intervals.
BenchReport run_bench(const radar::ReducedCube& clean, const BenchParams& params,
                      std::optional<std::span<const double>> r_times = std::nullopt);

}  // namespace heartradar::metrics
