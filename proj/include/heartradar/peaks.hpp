#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace heartradar::dsp {

// Selection criteria, all in samples / signal units. A peak is kept when
// prominence > min_prominence and width < max_width; min_distance then
// drops the lower of any two survivors closer than that many samples.
struct PeakCriteria {
  double min_prominence = 0.0;
  double max_width = std::numeric_limits<double>::infinity();
  double min_distance = 0.0;
  double rel_height = 0.5;
};

struct Peak {
  std::size_t index = 0;
  double prominence = 0.0;
  double width = 0.0;        // samples, at rel_height of the prominence
  double width_height = 0.0; // contour level the width was measured on
  double left_ips = 0.0;     // interpolated crossing positions
  double right_ips = 0.0;
  std::size_t left_base = 0;
  std::size_t right_base = 0;
};

/// Local maxima of x (flat tops resolve to their middle sample), in
/// increasing index order, with contour-line prominence and interpolated
/// width.
std::vector<Peak> find_peaks(std::span<const double> x, const PeakCriteria& criteria = {});

}  // namespace heartradar::dsp
