#include "heartradar/peaks.hpp"

#include <algorithm>
#include <numeric>

namespace heartradar::dsp {

namespace {

std::vector<std::size_t> local_maxima(std::span<const double> x) {
  std::vector<std::size_t> out;
  const std::size_t n = x.size();
  std::size_t i = 1;
  while (n >= 3 && i + 1 < n) {
    if (x[i - 1] < x[i]) {
      std::size_t ahead = i + 1;
      while (ahead + 1 < n && x[ahead] == x[i]) ++ahead;
      if (x[ahead] < x[i]) {
        out.push_back((i + ahead - 1) / 2);
        i = ahead;
      }
    }
    ++i;
  }
  return out;
}

void measure(std::span<const double> x, Peak& p, double rel_height) {
  const double top = x[p.index];

  double left_min = top;
  p.left_base = p.index;
  for (std::size_t i = p.index + 1; i-- > 0;) {
    if (x[i] > top) break;
    if (x[i] < left_min) {
      left_min = x[i];
      p.left_base = i;
    }
  }
  double right_min = top;
  p.right_base = p.index;
  for (std::size_t i = p.index; i < x.size(); ++i) {
    if (x[i] > top) break;
    if (x[i] < right_min) {
      right_min = x[i];
      p.right_base = i;
    }
  }
  p.prominence = top - std::max(left_min, right_min);

  const double height = top - p.prominence * rel_height;
  p.width_height = height;
  std::size_t i = p.index;
  while (p.left_base < i && height < x[i]) --i;
  double left = static_cast<double>(i);
  if (x[i] < height) left += (height - x[i]) / (x[i + 1] - x[i]);
  i = p.index;
  while (i < p.right_base && height < x[i]) ++i;
  double right = static_cast<double>(i);
  if (x[i] < height) right -= (height - x[i]) / (x[i - 1] - x[i]);
  p.left_ips = left;
  p.right_ips = right;
  p.width = right - left;
}

}  // namespace

std::vector<Peak> find_peaks(std::span<const double> x, const PeakCriteria& criteria) {
  std::vector<Peak> kept;
  for (std::size_t idx : local_maxima(x)) {
    Peak p;
    p.index = idx;
    measure(x, p, criteria.rel_height);
    if (p.prominence > criteria.min_prominence && p.width < criteria.max_width) kept.push_back(p);
  }
  if (criteria.min_distance <= 1.0 || kept.size() < 2) return kept;

  // Highest peaks claim their neighbourhood first; equal heights resolve
  // toward the earlier peak.
  std::vector<std::size_t> order(kept.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[kept[a].index] > x[kept[b].index]; });
  std::vector<bool> keep(kept.size(), true);
  for (std::size_t k : order) {
    if (!keep[k]) continue;
    for (std::size_t j = k; j-- > 0;) {
      if (static_cast<double>(kept[k].index - kept[j].index) >= criteria.min_distance) break;
      keep[j] = false;
    }
    for (std::size_t j = k + 1; j < kept.size(); ++j) {
      if (static_cast<double>(kept[j].index - kept[k].index) >= criteria.min_distance) break;
      keep[j] = false;
    }
  }
  std::vector<Peak> out;
  for (std::size_t k = 0; k < kept.size(); ++k) {
    if (keep[k]) out.push_back(kept[k]);
  }
  return out;
}

}  // namespace heartradar::dsp
