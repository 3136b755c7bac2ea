#pragma once

#include "viewplan/geometry.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace viewplan {

// Static 3-d tree over a point set for exact nearest-neighbor queries.
class KdTree3 {
 public:
  explicit KdTree3(const std::vector<Point3>& points, std::size_t leaf_size = 8);

  struct Neighbor {
    std::size_t index = 0;
    double squared_distance = std::numeric_limits<double>::infinity();
  };

  // Exact nearest neighbor of q. Ties resolve to an arbitrary but
  // deterministic index. Requires a non-empty tree.
  Neighbor nearest(const Point3& q) const;

  std::size_t size() const noexcept { return points_.size(); }

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = 0;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Point3& q, Neighbor& best) const;

  std::vector<Point3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::size_t leaf_size_;
};

}  // namespace viewplan
