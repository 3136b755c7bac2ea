#include "viewplan/geometry.hpp"

#include "viewplan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace viewplan {

namespace {

bool all_finite(const Point3& p) { return p.allFinite(); }

Point3 spherical_offset(double azimuth, double elevation, double radius) {
  const double ce = std::cos(elevation);
  return {radius * ce * std::cos(azimuth), radius * ce * std::sin(azimuth),
          radius * std::sin(elevation)};
}

Point3 direction_from_angles(double yaw, double pitch) {
  const double cp = std::cos(pitch);
  return {cp * std::cos(yaw), cp * std::sin(yaw), std::sin(pitch)};
}

}  // namespace

PointCloud::PointCloud(std::vector<Point3> points) : points_(std::move(points)) {
  for (const auto& p : points_) {
    if (!all_finite(p)) throw DomainError("point cloud contains a non-finite coordinate");
  }
}

Point3 PointCloud::centroid() const {
  if (points_.empty()) throw EmptyCloudError("centroid of an empty point cloud");
  Point3 sum = Point3::Zero();
  for (const auto& p : points_) sum += p;
  return sum / static_cast<double>(points_.size());
}

void PointCloud::bounding_box(Point3& lo, Point3& hi) const {
  if (points_.empty()) throw EmptyCloudError("bounding box of an empty point cloud");
  lo = hi = points_.front();
  for (const auto& p : points_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
}

void Intrinsics::validate() const {
  if (!(fov_half_angle > 0.0 && fov_half_angle < kPi / 2.0))
    throw DomainError("fov_half_angle must lie in (0, pi/2)");
  if (!(range_min >= 0.0 && range_min < range_max && std::isfinite(range_max)))
    throw DomainError("camera range must satisfy 0 <= range_min < range_max");
}

CameraPose::CameraPose(const Point3& position, const Point3& look_dir,
                       const Intrinsics& intrinsics)
    : position_(position), look_dir_(look_dir), intrinsics_(intrinsics) {
  if (!all_finite(position) || !all_finite(look_dir))
    throw DomainError("camera pose has non-finite components");
  if (std::abs(look_dir.norm() - 1.0) > 1e-9) throw DomainError("look_dir must be a unit vector");
  intrinsics_.validate();
}

ViewPlan::ViewPlan(std::vector<CameraPose> cameras) : cameras_(std::move(cameras)) {
  if (cameras_.empty()) throw DomainError("a view plan needs at least one camera");
}

Bounds::Bounds(Vector lower, Vector upper, std::vector<bool> periodic)
    : lower_(std::move(lower)), upper_(std::move(upper)), periodic_(std::move(periodic)) {
  if (lower_.size() != upper_.size()) throw DimensionError("bounds: lower/upper size mismatch");
  if (periodic_.empty()) periodic_.assign(static_cast<std::size_t>(lower_.size()), false);
  if (periodic_.size() != static_cast<std::size_t>(lower_.size()))
    throw DimensionError("bounds: periodic mask size mismatch");
  for (Eigen::Index d = 0; d < lower_.size(); ++d) {
    if (!(lower_[d] < upper_[d]) || !std::isfinite(lower_[d]) || !std::isfinite(upper_[d]))
      throw DomainError("bounds: lower < upper must hold in dimension " + std::to_string(d));
  }
}

std::vector<Eigen::Index> Bounds::periodic_dims() const {
  std::vector<Eigen::Index> dims;
  for (Eigen::Index d = 0; d < dim(); ++d)
    if (is_periodic(d)) dims.push_back(d);
  return dims;
}

double wrap_angle(double value, double lower, double period) {
  double shifted = std::fmod(value - lower, period);
  if (shifted < 0.0) shifted += period;
  // fmod can round up to exactly `period` for tiny negative inputs.
  if (shifted >= period) shifted = 0.0;
  return lower + shifted;
}

Vector Bounds::project(const Vector& theta) const {
  if (theta.size() != dim()) throw DimensionError("bounds: parameter vector has wrong dimension");
  Vector out(theta.size());
  for (Eigen::Index d = 0; d < dim(); ++d) {
    if (is_periodic(d))
      out[d] = wrap_angle(theta[d], lower_[d], upper_[d] - lower_[d]);
    else
      out[d] = std::clamp(theta[d], lower_[d], upper_[d]);
  }
  return out;
}

bool Bounds::contains(const Vector& theta, double tol) const {
  if (theta.size() != dim()) return false;
  for (Eigen::Index d = 0; d < dim(); ++d) {
    if (!std::isfinite(theta[d])) return false;
    if (is_periodic(d)) continue;
    if (theta[d] < lower_[d] - tol || theta[d] > upper_[d] + tol) return false;
  }
  return true;
}

SearchSpace::SearchSpace(SpaceMode mode, std::size_t n, const Point3& center,
                         const Intrinsics& intrinsics, Bounds bounds)
    : mode_(mode), n_cameras_(n), center_(center), intrinsics_(intrinsics),
      bounds_(std::move(bounds)) {
  if (n == 0) throw DomainError("search space needs at least one camera");
  if (!center.allFinite()) throw DomainError("scene center must be finite");
  intrinsics_.validate();
}

SearchSpace SearchSpace::look_at_center(std::size_t n_cameras, const Point3& center,
                                        const Intrinsics& intrinsics,
                                        const LookAtCenterLimits& limits) {
  if (!(limits.elevation_min > -kPi / 2 && limits.elevation_max < kPi / 2))
    throw DomainError("elevation limits must lie strictly inside (-pi/2, pi/2)");
  if (!(limits.radius_min > 0.0)) throw DomainError("radius_min must be positive");
  const auto dim = static_cast<Eigen::Index>(3 * n_cameras);
  Vector lo(dim), hi(dim);
  std::vector<bool> periodic(static_cast<std::size_t>(dim), false);
  for (std::size_t i = 0; i < n_cameras; ++i) {
    const auto b = static_cast<Eigen::Index>(3 * i);
    lo[b] = 0.0;
    hi[b] = kTwoPi;
    periodic[static_cast<std::size_t>(b)] = true;
    lo[b + 1] = limits.elevation_min;
    hi[b + 1] = limits.elevation_max;
    lo[b + 2] = limits.radius_min;
    hi[b + 2] = limits.radius_max;
  }
  return SearchSpace(SpaceMode::kLookAtCenter, n_cameras, center, intrinsics,
                     Bounds(std::move(lo), std::move(hi), std::move(periodic)));
}

SearchSpace SearchSpace::free_pose(std::size_t n_cameras, const Point3& center,
                                   const Intrinsics& intrinsics, const FreePoseLimits& limits) {
  if (!(limits.pitch_min > -kPi / 2 && limits.pitch_max < kPi / 2))
    throw DomainError("pitch limits must lie strictly inside (-pi/2, pi/2)");
  const auto dim = static_cast<Eigen::Index>(5 * n_cameras);
  Vector lo(dim), hi(dim);
  std::vector<bool> periodic(static_cast<std::size_t>(dim), false);
  for (std::size_t i = 0; i < n_cameras; ++i) {
    const auto b = static_cast<Eigen::Index>(5 * i);
    for (int k = 0; k < 3; ++k) {
      lo[b + k] = limits.position_min[k];
      hi[b + k] = limits.position_max[k];
    }
    lo[b + 3] = 0.0;
    hi[b + 3] = kTwoPi;
    periodic[static_cast<std::size_t>(b + 3)] = true;
    lo[b + 4] = limits.pitch_min;
    hi[b + 4] = limits.pitch_max;
  }
  return SearchSpace(SpaceMode::kFreePose, n_cameras, center, intrinsics,
                     Bounds(std::move(lo), std::move(hi), std::move(periodic)));
}

ViewPlan decode_plan(const Vector& theta, const SearchSpace& space) {
  if (theta.size() != space.dim())
    throw DimensionError("decode_plan: expected " + std::to_string(space.dim()) +
                         " parameters, got " + std::to_string(theta.size()));
  if (!theta.allFinite()) throw DomainError("decode_plan: non-finite parameter");
  if (!space.bounds().contains(theta, 1e-9))
    throw DomainError("decode_plan: parameter vector outside the search space bounds");

  const Vector t = space.bounds().project(theta);
  std::vector<CameraPose> cameras;
  cameras.reserve(space.n_cameras());
  for (std::size_t i = 0; i < space.n_cameras(); ++i) {
    if (space.mode() == SpaceMode::kLookAtCenter) {
      const auto b = static_cast<Eigen::Index>(3 * i);
      const Point3 offset = spherical_offset(t[b], t[b + 1], t[b + 2]);
      cameras.emplace_back(space.center() + offset, (-offset).normalized(), space.intrinsics());
    } else {
      const auto b = static_cast<Eigen::Index>(5 * i);
      cameras.emplace_back(Point3(t[b], t[b + 1], t[b + 2]),
                           direction_from_angles(t[b + 3], t[b + 4]).normalized(),
                           space.intrinsics());
    }
  }
  return ViewPlan(std::move(cameras));
}

Vector encode_plan(const ViewPlan& plan, const SearchSpace& space) {
  if (plan.size() != space.n_cameras())
    throw DimensionError("encode_plan: plan has " + std::to_string(plan.size()) +
                         " cameras, space expects " + std::to_string(space.n_cameras()));
  const Bounds& bounds = space.bounds();
  Vector theta(space.dim());
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const CameraPose& cam = plan[i];
    if (space.mode() == SpaceMode::kLookAtCenter) {
      const auto b = static_cast<Eigen::Index>(3 * i);
      const Point3 offset = cam.position() - space.center();
      const double radius = offset.norm();
      if (radius == 0.0) throw DomainError("encode_plan: camera sits on the scene center");
      if ((cam.look_dir() + offset / radius).norm() > 1e-6)
        throw DomainError("encode_plan: camera " + std::to_string(i) +
                          " does not look at the scene center");
      theta[b] = wrap_angle(std::atan2(offset.y(), offset.x()), bounds.lower()[b],
                            bounds.upper()[b] - bounds.lower()[b]);
      theta[b + 1] = std::asin(std::clamp(offset.z() / radius, -1.0, 1.0));
      theta[b + 2] = radius;
    } else {
      const auto b = static_cast<Eigen::Index>(5 * i);
      const Point3& v = cam.look_dir();
      theta[b] = cam.position().x();
      theta[b + 1] = cam.position().y();
      theta[b + 2] = cam.position().z();
      theta[b + 3] = wrap_angle(std::atan2(v.y(), v.x()), bounds.lower()[b + 3],
                                bounds.upper()[b + 3] - bounds.lower()[b + 3]);
      theta[b + 4] = std::asin(std::clamp(v.z(), -1.0, 1.0));
    }
  }
  return theta;
}

bool is_visible(const CameraPose& pose, const Point3& p) {
  const Point3 d = p - pose.position();
  const double dist = d.norm();
  if (dist < pose.range_min() || dist > pose.range_max()) return false;
  if (dist == 0.0) return true;  // only reachable when range_min == 0
  const double cos_angle = std::clamp(pose.look_dir().dot(d) / dist, -1.0, 1.0);
  return std::acos(cos_angle) <= pose.fov_half_angle();
}

double parallax_angle(const Point3& c1, const Point3& c2, const Point3& p) {
  const Point3 a = c1 - p;
  const Point3 b = c2 - p;
  if (a.squaredNorm() == 0.0 || b.squaredNorm() == 0.0)
    throw DomainError("parallax_angle: point coincides with a camera position");
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

}  // namespace viewplan
