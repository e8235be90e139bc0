#pragma once

#include <string>
#include <vector>

#include "heartradar/metrics.hpp"
#include "heartradar/radar.hpp"
#include "heartradar/series.hpp"
#include "heartradar/sync.hpp"

// Deterministic SVG rendering: identical inputs give identical bytes.
namespace heartradar::svg {

struct Line {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  std::string label;
};

// Full-height vertical line; `kind` becomes the element class "marker-<kind>".
struct Marker {
  double x = 0.0;
  std::string kind;
  std::string color = "#d62728";
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 900;
  int height = 320;
  bool points = false;  // circles instead of polylines
  std::vector<Line> lines;
  std::vector<Marker> markers;
};

std::string render(const Plot& plot);

/// Velocity with one marker per R ("marker-r") and per T ("marker-t").
std::string velocity_plot(const VelocitySeries& v, const std::vector<double>& r_times,
                          const std::vector<double>& t_times);
std::string displacement_plot(const DisplacementSeries& d);
std::string distance_curve_plot(const sync::SyncResult& result);
/// RR interval against radar interval, one point per matched interval.
std::string interval_scatter_plot(const metrics::IntervalReport& report);
/// Modulus of one antenna's range profiles over time, in dB below the maximum.
std::string range_heatmap(const radar::RangeProfileSeries& profiles, std::size_t rx = 0,
                          std::size_t max_columns = 200, std::size_t max_bins = 96);

}  // namespace heartradar::svg
