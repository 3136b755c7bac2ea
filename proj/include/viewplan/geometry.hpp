#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstddef>
#include <span>
#include <vector>

namespace viewplan {

using Point3 = Eigen::Vector3d;
using Vector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Finite set of 3-D points in meters. Order carries no meaning.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::vector<Point3> points);

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const Point3& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<Point3>& points() const noexcept { return points_; }
  auto begin() const noexcept { return points_.begin(); }
  auto end() const noexcept { return points_.end(); }

  Point3 centroid() const;
  void bounding_box(Point3& lo, Point3& hi) const;

 private:
  std::vector<Point3> points_;
};

// Shared camera optics: a rotationally symmetric viewing cone with a depth range.
struct Intrinsics {
  double fov_half_angle = 0.5;
  double range_min = 0.3;
  double range_max = 3.0;

  void validate() const;
  bool operator==(const Intrinsics&) const = default;
};

class CameraPose {
 public:
  // Throws DomainError unless look_dir is unit length within 1e-9 and the
  // intrinsics are valid.
  CameraPose(const Point3& position, const Point3& look_dir, const Intrinsics& intrinsics);

  const Point3& position() const noexcept { return position_; }
  const Point3& look_dir() const noexcept { return look_dir_; }
  const Intrinsics& intrinsics() const noexcept { return intrinsics_; }
  double fov_half_angle() const noexcept { return intrinsics_.fov_half_angle; }
  double range_min() const noexcept { return intrinsics_.range_min; }
  double range_max() const noexcept { return intrinsics_.range_max; }

 private:
  Point3 position_;
  Point3 look_dir_;
  Intrinsics intrinsics_;
};

// Placement of all N cameras.
class ViewPlan {
 public:
  explicit ViewPlan(std::vector<CameraPose> cameras);

  std::size_t size() const noexcept { return cameras_.size(); }
  const CameraPose& operator[](std::size_t i) const { return cameras_[i]; }
  const std::vector<CameraPose>& cameras() const noexcept { return cameras_; }
  auto begin() const noexcept { return cameras_.begin(); }
  auto end() const noexcept { return cameras_.end(); }

 private:
  std::vector<CameraPose> cameras_;
};

// Axis-aligned box over parameter vectors. Periodic dimensions wrap modulo
// (upper - lower) instead of clamping.
class Bounds {
 public:
  Bounds(Vector lower, Vector upper, std::vector<bool> periodic = {});

  Eigen::Index dim() const noexcept { return lower_.size(); }
  const Vector& lower() const noexcept { return lower_; }
  const Vector& upper() const noexcept { return upper_; }
  Vector range() const { return upper_ - lower_; }
  bool is_periodic(Eigen::Index d) const { return periodic_[static_cast<std::size_t>(d)]; }
  const std::vector<bool>& periodic() const noexcept { return periodic_; }
  std::vector<Eigen::Index> periodic_dims() const;

  // Wraps periodic coordinates into [lower, upper) and clamps the rest.
  Vector project(const Vector& theta) const;
  // True when non-periodic coordinates lie inside [lower, upper] (tolerance
  // `tol`) and every coordinate is finite.
  bool contains(const Vector& theta, double tol = 1e-12) const;

 private:
  Vector lower_;
  Vector upper_;
  std::vector<bool> periodic_;
};

double wrap_angle(double value, double lower, double period);

enum class SpaceMode { kLookAtCenter, kFreePose };

struct LookAtCenterLimits {
  double elevation_min = 0.0;
  double elevation_max = 1.3;
  double radius_min = 1.0;
  double radius_max = 4.0;
};
struct FreePoseLimits {
  Point3 position_min{-4.0, -4.0, 0.2};
  Point3 position_max{4.0, 4.0, 4.0};
  double pitch_min = -1.4;
  double pitch_max = 0.2;
};

// Parameterization of feasible camera placements.
//
// Look-at-center: (azimuth, elevation, radius) per camera, every camera aimed
// at `center`. Free-pose: (x, y, z, yaw, pitch) per camera.
class SearchSpace {
 public:
  static SearchSpace look_at_center(std::size_t n_cameras, const Point3& center,
                                    const Intrinsics& intrinsics,
                                    const LookAtCenterLimits& limits = LookAtCenterLimits{});
  static SearchSpace free_pose(std::size_t n_cameras, const Point3& center,
                               const Intrinsics& intrinsics, const FreePoseLimits& limits = FreePoseLimits{});

  SpaceMode mode() const noexcept { return mode_; }
  std::size_t n_cameras() const noexcept { return n_cameras_; }
  std::size_t dims_per_camera() const noexcept { return mode_ == SpaceMode::kLookAtCenter ? 3 : 5; }
  Eigen::Index dim() const noexcept { return bounds_.dim(); }
  const Bounds& bounds() const noexcept { return bounds_; }
  const Point3& center() const noexcept { return center_; }
  const Intrinsics& intrinsics() const noexcept { return intrinsics_; }

 private:
  SearchSpace(SpaceMode mode, std::size_t n, const Point3& center, const Intrinsics& intrinsics,
              Bounds bounds);

  SpaceMode mode_;
  std::size_t n_cameras_;
  Point3 center_;
  Intrinsics intrinsics_;
  Bounds bounds_;
};

ViewPlan decode_plan(const Vector& theta, const SearchSpace& space);
Vector encode_plan(const ViewPlan& plan, const SearchSpace& space);

// Cone-and-range test. No occlusion.
bool is_visible(const CameraPose& pose, const Point3& p);

// Angle at p between the rays towards c1 and c2, in [0, pi].
double parallax_angle(const Point3& c1, const Point3& c2, const Point3& p);

}  // namespace viewplan
