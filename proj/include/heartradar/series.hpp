#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace heartradar {

// Uniformly sampled real series: sample i sits at t0 + i * dt.
template <class Tag>
struct UniformSeries {
  double t0 = 0.0;
  double dt = 1.0;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  bool empty() const noexcept { return values.empty(); }
  double time(std::size_t i) const noexcept { return t0 + static_cast<double>(i) * dt; }
  double end_time() const noexcept { return empty() ? t0 : time(size() - 1); }
  double sample_rate() const noexcept { return 1.0 / dt; }
};

struct VelocityTag {};
struct DisplacementTag {};

/// Chest radial velocity in m/s; positive means moving toward the radar.
using VelocitySeries = UniformSeries<VelocityTag>;
/// Chest displacement in m relative to the first sample; positive toward the radar.
using DisplacementSeries = UniformSeries<DisplacementTag>;

// Keeps samples whose time lies in [from, to]; grid unchanged.
template <class Tag>
UniformSeries<Tag> crop(const UniformSeries<Tag>& s, double from, double to) {
  UniformSeries<Tag> out;
  out.dt = s.dt;
  const double eps = 1e-9 * s.dt;
  std::size_t first = s.size();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.time(i) >= from - eps) {
      first = i;
      break;
    }
  }
  out.t0 = s.time(first);
  for (std::size_t i = first; i < s.size() && s.time(i) <= to + eps; ++i) {
    out.values.push_back(s.values[i]);
  }
  return out;
}

}  // namespace heartradar
