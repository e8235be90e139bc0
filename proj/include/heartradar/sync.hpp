#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "heartradar/ecg.hpp"

namespace heartradar::sync {

// Uniform evaluation grid: point i sits at t0 + i * step.
struct CombGrid {
  double t0 = 0.0;
  double step = 0.004;
  std::size_t n = 0;

  double at(std::size_t i) const { return t0 + static_cast<double>(i) * step; }
};

enum class CombShape {
  literal,   // exp(-(x - T)^2 / a) / (|a| sqrt(pi))
  gaussian,  // exp(-(x - T)^2 / a^2) / (|a| sqrt(pi)), unit area
};

struct PseudoComb {
  CombGrid grid;
  double a = 0.1;
  std::vector<double> values;
};

/// Sum of one bump per event, evaluated exactly on the grid. Bumps are cut
/// where they fall below 1e-20 of their peak. Throws InvalidArgument for
/// a <= 0 or a zero grid step.
PseudoComb build_pseudo_comb(std::span<const double> event_times, double a, const CombGrid& grid,
                             CombShape shape = CombShape::literal);

/// L1 distance between two combs. Throws InvalidArgument on differing grids.
double comb_distance(const PseudoComb& c1, const PseudoComb& c2);

enum class SyncMethod { comb, impulse, manual };
std::string method_name(SyncMethod m);

struct SyncParams {
  double half_range = 2.0;  // s
  double step = 0.004;      // s, both shift step and grid step
  double a = 0.1;
  double grid_pad = 2.0;    // s around the union of event ranges
  CombShape shape = CombShape::literal;
  std::size_t min_events = 3;
};

struct SyncResult {
  SyncMethod method = SyncMethod::comb;
  double best_offset = 0.0;
  std::vector<std::pair<double, double>> curve;  // (shift s, distance)
  std::vector<std::string> warnings;
};

// Offset convention: offset = ECG start - radar start, so an event at radar
// time tau reads tau - offset on the ECG clock. Each candidate shift s moves
// the ECG events to T + s; the minimiser is the offset estimate.
SyncResult find_offset(std::span<const double> ecg_event_times, std::span<const double> radar_event_times,
                       const SyncParams& params = {});

/// Rebases the record on the impulse (t -> t - impulse_time) and keeps the
/// samples at rebased time >= trim_s. Throws AlignmentFailed when there is
/// no impulse or it lies outside the record.
ecg::EcgRecord align_by_impulse(const ecg::EcgRecord& record, std::optional<double> impulse_time,
                                double trim_s = 1.0);

}  // namespace heartradar::sync
