#pragma once

#include "viewplan/geometry.hpp"

#include <span>
#include <vector>

namespace viewplan {

enum class ChamferVariant {
  kEuclidean,  // mean nearest-neighbor distance, both directions summed
  kSquared,    // same with squared distances
};

// Symmetric chamfer distance. Throws EmptyCloudError if either cloud is empty.
double chamfer_distance(const PointCloud& a, const PointCloud& b,
                        ChamferVariant variant = ChamferVariant::kEuclidean);

// Mean nearest-neighbor distance from every point of `from` to `to`.
double directed_chamfer(const PointCloud& from, const PointCloud& to,
                        ChamferVariant variant = ChamferVariant::kEuclidean);

// Orthographic top-down height grid on the ground plane.
struct DepthGridSpec {
  int resolution = 64;
  double x_min = -2.0;
  double x_max = 2.0;
  double y_min = -2.0;
  double y_max = 2.0;
  double ground_height = 0.0;

  void validate() const;
};

// Height map: cell value is the highest point falling in the cell, empty
// cells hold ground_height. Points outside the grid bounds are ignored.
std::vector<double> rasterize_heights(const PointCloud& cloud, const DepthGridSpec& grid);

double depth_mae(const PointCloud& a, const PointCloud& b, const DepthGridSpec& grid);

// values[t] = r_star - max(y[0..t]). Throws DomainError on empty input.
std::vector<double> simple_regret_curve(std::span<const double> observations, double r_star = 0.0);

}  // namespace viewplan
