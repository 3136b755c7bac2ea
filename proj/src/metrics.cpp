#include "viewplan/metrics.hpp"

#include "viewplan/errors.hpp"
#include "viewplan/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace viewplan {

double directed_chamfer(const PointCloud& from, const PointCloud& to, ChamferVariant variant) {
  if (from.empty() || to.empty()) throw EmptyCloudError("chamfer distance of an empty cloud");
  const KdTree3 tree(to.points());
  double sum = 0.0;
  for (const auto& p : from) {
    const double d2 = tree.nearest(p).squared_distance;
    sum += variant == ChamferVariant::kSquared ? d2 : std::sqrt(d2);
  }
  return sum / static_cast<double>(from.size());
}

double chamfer_distance(const PointCloud& a, const PointCloud& b, ChamferVariant variant) {
  if (a.empty() || b.empty()) throw EmptyCloudError("chamfer distance of an empty cloud");
  // Summed in a fixed order so that swapping the arguments is bit-exact.
  const double ab = directed_chamfer(a, b, variant);
  const double ba = directed_chamfer(b, a, variant);
  return std::min(ab, ba) + std::max(ab, ba);
}

void DepthGridSpec::validate() const {
  if (resolution < 1) throw DomainError("depth grid resolution must be >= 1");
  if (!(x_min < x_max && y_min < y_max)) throw DomainError("depth grid bounds are degenerate");
}

std::vector<double> rasterize_heights(const PointCloud& cloud, const DepthGridSpec& grid) {
  grid.validate();
  const auto n = static_cast<std::size_t>(grid.resolution);
  std::vector<double> heights(n * n, grid.ground_height);
  std::vector<bool> filled(n * n, false);
  const double sx = grid.resolution / (grid.x_max - grid.x_min);
  const double sy = grid.resolution / (grid.y_max - grid.y_min);
  for (const auto& p : cloud) {
    if (p.x() < grid.x_min || p.x() > grid.x_max || p.y() < grid.y_min || p.y() > grid.y_max)
      continue;
    const auto ix = std::min<std::size_t>(n - 1, static_cast<std::size_t>((p.x() - grid.x_min) * sx));
    const auto iy = std::min<std::size_t>(n - 1, static_cast<std::size_t>((p.y() - grid.y_min) * sy));
    const std::size_t cell = iy * n + ix;
    if (!filled[cell] || p.z() > heights[cell]) {
      heights[cell] = p.z();
      filled[cell] = true;
    }
  }
  return heights;
}

double depth_mae(const PointCloud& a, const PointCloud& b, const DepthGridSpec& grid) {
  const auto ha = rasterize_heights(a, grid);
  const auto hb = rasterize_heights(b, grid);
  double sum = 0.0;
  for (std::size_t i = 0; i < ha.size(); ++i) sum += std::abs(ha[i] - hb[i]);
  return sum / static_cast<double>(ha.size());
}

std::vector<double> simple_regret_curve(std::span<const double> observations, double r_star) {
  if (observations.empty()) throw DomainError("simple regret of an empty trace");
  std::vector<double> curve;
  curve.reserve(observations.size());
  double best = observations.front();
  for (double y : observations) {
    best = std::max(best, y);
    curve.push_back(r_star - best);
  }
  if (best > r_star)
    std::clog << "viewplan: warning: observed value " << best << " exceeds r_star " << r_star
              << "; regret goes negative\n";
  return curve;
}

}  // namespace viewplan
