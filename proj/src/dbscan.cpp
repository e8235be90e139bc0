#include <cmath>
#include <vector>

#include "heartradar/ecg.hpp"
#include "heartradar/errors.hpp"

namespace heartradar::ecg {

namespace {

// Brute-force neighbourhood, the query point included. Peak counts stay in
// the low hundreds, so the quadratic scan is cheaper than any index.
std::vector<std::size_t> region(std::span<const std::array<double, 2>> pts, std::size_t q, double eps2) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double dx = pts[k][0] - pts[q][0];
    const double dy = pts[k][1] - pts[q][1];
    if (dx * dx + dy * dy <= eps2) out.push_back(k);
  }
  return out;
}

}  // namespace

Clustering dbscan(std::span<const std::array<double, 2>> points, const DbscanParams& params,
                  std::span<const std::size_t> visit_order) {
  if (!(params.eps > 0.0)) throw InvalidArgument("dbscan: eps must be positive");
  if (params.min_pts == 0) throw InvalidArgument("dbscan: min_pts must be >= 1");
  if (visit_order.size() != points.size()) throw InvalidArgument("dbscan: visit order must cover every point");

  constexpr int kUnvisited = -2;
  constexpr int kNoise = -1;
  Clustering result;
  result.labels.assign(points.size(), kUnvisited);
  const double eps2 = params.eps * params.eps;

  for (std::size_t p : visit_order) {
    if (result.labels[p] != kUnvisited) continue;
    const auto seeds = region(points, p, eps2);
    if (seeds.size() < params.min_pts) {
      result.labels[p] = kNoise;
      continue;
    }
    const int cluster = result.n_clusters++;
    result.labels[p] = cluster;
    std::vector<std::size_t> queue(seeds.begin(), seeds.end());
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t q = queue[head];
      if (result.labels[q] == kNoise) result.labels[q] = cluster;
      if (result.labels[q] != kUnvisited) continue;
      result.labels[q] = cluster;
      const auto more = region(points, q, eps2);
      if (more.size() >= params.min_pts) queue.insert(queue.end(), more.begin(), more.end());
    }
  }
  return result;
}

}  // namespace heartradar::ecg
