#include "heartradar/sync.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "heartradar/dsp.hpp"
#include "heartradar/errors.hpp"

namespace heartradar::sync {

namespace {

constexpr double kCutoffExponent = 46.0;  // exp(-46) ~ 1e-20

double interval_cv(std::span<const double> times) {
  if (times.size() < 3) return 0.0;
  std::vector<double> iv;
  for (std::size_t k = 1; k < times.size(); ++k) iv.push_back(times[k] - times[k - 1]);
  const double m = dsp::mean(iv);
  return m != 0.0 ? dsp::stddev(iv) / std::abs(m) : 0.0;
}

}  // namespace

std::string method_name(SyncMethod m) {
  switch (m) {
    case SyncMethod::comb: return "comb";
    case SyncMethod::impulse: return "impulse";
    case SyncMethod::manual: return "manual";
  }
  return "?";
}

PseudoComb build_pseudo_comb(std::span<const double> event_times, double a, const CombGrid& grid,
                             CombShape shape) {
  if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("pseudo comb: a must be positive");
  if (!(grid.step > 0.0)) throw InvalidArgument("pseudo comb: grid step must be positive");
  PseudoComb comb;
  comb.grid = grid;
  comb.a = a;
  comb.values.assign(grid.n, 0.0);
  const double denom = shape == CombShape::literal ? a : a * a;
  const double norm = 1.0 / (std::abs(a) * std::sqrt(std::numbers::pi));
  const double reach = std::sqrt(kCutoffExponent * denom);
  for (double t : event_times) {
    const double lo = std::ceil((t - reach - grid.t0) / grid.step);
    const double hi = std::floor((t + reach - grid.t0) / grid.step);
    if (hi < 0.0 || lo > static_cast<double>(grid.n) - 1.0) continue;
    const auto first = static_cast<std::size_t>(std::max(lo, 0.0));
    const auto last = static_cast<std::size_t>(std::min(hi, static_cast<double>(grid.n) - 1.0));
    for (std::size_t i = first; i <= last; ++i) {
      const double x = grid.at(i) - t;
      comb.values[i] += norm * std::exp(-x * x / denom);
    }
  }
  return comb;
}

double comb_distance(const PseudoComb& c1, const PseudoComb& c2) {
  if (c1.grid.n != c2.grid.n || c1.grid.t0 != c2.grid.t0 || c1.grid.step != c2.grid.step ||
      c1.values.size() != c2.values.size()) {
    throw InvalidArgument("comb distance: combs are on different grids");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < c1.values.size(); ++i) d += std::abs(c1.values[i] - c2.values[i]);
  return d;
}

SyncResult find_offset(std::span<const double> ecg_event_times, std::span<const double> radar_event_times,
                       const SyncParams& params) {
  if (ecg_event_times.size() < params.min_events || radar_event_times.size() < params.min_events) {
    throw SyncFailed("comb sync needs at least " + std::to_string(params.min_events) +
                     " events per side, got " + std::to_string(ecg_event_times.size()) + " ECG and " +
                     std::to_string(radar_event_times.size()) + " radar");
  }
  if (!(params.step > 0.0) || !(params.half_range >= 0.0)) {
    throw InvalidArgument("comb sync: step must be positive and half_range non-negative");
  }

  SyncResult result;
  result.method = SyncMethod::comb;
  for (auto [name, times] : {std::pair{"ECG", ecg_event_times}, std::pair{"radar", radar_event_times}}) {
    if (interval_cv(times) < 1e-3) {
      result.warnings.push_back(std::string(name) +
                                " event intervals are nearly regular; the offset may be ambiguous");
    }
  }

  const auto [emin, emax] = std::minmax_element(ecg_event_times.begin(), ecg_event_times.end());
  const auto [rmin, rmax] = std::minmax_element(radar_event_times.begin(), radar_event_times.end());
  const double lo = std::min(*emin, *rmin) - params.grid_pad;
  const double hi = std::max(*emax, *rmax) + params.grid_pad;
  CombGrid grid;
  grid.t0 = lo;
  grid.step = params.step;
  grid.n = static_cast<std::size_t>(std::floor((hi - lo) / params.step)) + 1;
  const PseudoComb radar = build_pseudo_comb(radar_event_times, params.a, grid, params.shape);

  // Shifting the ECG events by k steps is the same as reading their comb k
  // grid points earlier, so one comb on a widened grid serves every shift.
  const auto k_max = static_cast<std::size_t>(std::llround(params.half_range / params.step));
  CombGrid wide = grid;
  wide.t0 = lo - static_cast<double>(k_max) * params.step;
  wide.n = grid.n + 2 * k_max;
  const PseudoComb ecg = build_pseudo_comb(ecg_event_times, params.a, wide, params.shape);

  const std::size_t n_shifts = 2 * k_max + 1;
  std::vector<double> distance(n_shifts, 0.0);
  for (std::size_t j = 0; j < n_shifts; ++j) {
    // Shift s = (j - k_max) * step; ECG comb value at x - s lives at wide index i + 2 k_max - j.
    const double* e = ecg.values.data() + (2 * k_max - j);
    double d = 0.0;
    for (std::size_t i = 0; i < grid.n; ++i) d += std::abs(e[i] - radar.values[i]);
    distance[j] = d;
  }
  result.curve.reserve(n_shifts);
  for (std::size_t j = 0; j < n_shifts; ++j) {
    const double s = (static_cast<double>(j) - static_cast<double>(k_max)) * params.step;
    result.curve.emplace_back(s, distance[j]);
  }

  // Visit shifts by growing |s| (negative first) so ties settle near zero.
  std::size_t best = k_max;
  for (std::size_t r = 1; r <= k_max; ++r) {
    for (std::size_t j : {k_max - r, k_max + r}) {
      if (distance[j] < distance[best]) best = j;
    }
  }
  result.best_offset = result.curve[best].first;

  const double d_max = *std::max_element(distance.begin(), distance.end());
  const double tolerance = 0.01 * (d_max - distance[best]);
  const double separation = 0.25;
  for (std::size_t j = 1; j + 1 < n_shifts; ++j) {
    if (j == best) continue;
    const bool local_min = distance[j] <= distance[j - 1] && distance[j] <= distance[j + 1];
    const double gap = std::abs(result.curve[j].first - result.best_offset);
    if (local_min && gap >= separation && distance[j] - distance[best] <= tolerance) {
      result.warnings.push_back("distance curve has a competing minimum at shift " +
                                std::to_string(result.curve[j].first) + " s");
      break;
    }
  }
  return result;
}

ecg::EcgRecord align_by_impulse(const ecg::EcgRecord& record, std::optional<double> impulse_time,
                                double trim_s) {
  if (!impulse_time) throw AlignmentFailed("no synchronization impulse was found in the ECG");
  const double t_end = record.t0 + record.duration();
  if (*impulse_time < record.t0 || *impulse_time >= t_end) {
    throw AlignmentFailed("impulse time " + std::to_string(*impulse_time) + " s lies outside the record");
  }
  const double start = *impulse_time + trim_s;
  const auto first = static_cast<std::size_t>(
      std::max(0.0, std::ceil((start - record.t0) * record.sample_rate - 1e-6)));
  if (first >= record.size()) throw AlignmentFailed("nothing remains of the ECG after the trim");
  ecg::EcgRecord out;
  out.sample_rate = record.sample_rate;
  out.t0 = record.time(first) - *impulse_time;
  for (const auto& [lead, v] : record.leads) {
    out.leads[lead] = std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(first), v.end());
  }
  return out;
}

}  // namespace heartradar::sync
