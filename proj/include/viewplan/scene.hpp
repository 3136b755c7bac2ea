#pragma once

#include "viewplan/geometry.hpp"
#include "viewplan/metrics.hpp"

#include <cstdint>
#include <set>
#include <vector>

namespace viewplan {

struct PlantSpec {
  double x = 0.0;
  double y = 0.0;
  // Transform applied on top of the randomized per-plant scale/rotation.
  double extra_scale = 1.0;
  double extra_rotation = 0.0;
  // Identifies the plant's random stream; stable under removal of others.
  std::uint64_t stream_id = 0;
};

struct SceneSpec {
  std::vector<PlantSpec> plants;
  double stem_height_min = 0.5;
  double stem_height_max = 1.2;
  double canopy_radius_min = 0.25;
  double canopy_radius_max = 0.45;
  int points_per_plant = 500;
  int ground_points = 1000;
  double plot_half_size = 2.0;
  std::uint64_t rng_seed = 0;

  std::size_t plant_count() const noexcept { return plants.size(); }
  void validate() const;
};

// Preset layouts with 3, 5 or 6 plants on a 4 m plot. Other counts are laid
// out on a ring.
SceneSpec default_scene_spec(int plant_count, std::uint64_t seed);

class Scene {
 public:
  Scene(SceneSpec spec, PointCloud reference);

  const SceneSpec& spec() const noexcept { return spec_; }
  const PointCloud& reference() const noexcept { return reference_; }
  const Point3& center() const noexcept { return center_; }
  const Point3& box_min() const noexcept { return box_min_; }
  const Point3& box_max() const noexcept { return box_max_; }

 private:
  SceneSpec spec_;
  PointCloud reference_;
  Point3 center_;
  Point3 box_min_;
  Point3 box_max_;
};

// Plants are a vertical stem segment plus an ellipsoidal canopy shell, each
// scaled uniformly in [0.9, 1.1] and rotated about the vertical axis.
Scene generate_scene(const SceneSpec& spec);

Scene transform_scene(const Scene& scene, double scale_jitter, bool rotate,
                      const std::set<std::size_t>& remove_indices, std::uint64_t seed);

struct NoiseSpec {
  double sigma_input = 0.0;  // relative to each dimension's range
  double sigma_image = 0.0;
  double sigma_obs = 0.0;
  double dropout_scale = 1.0;  // drop probability per unit sigma_image
  double jitter_scale = 0.05;  // meters per unit sigma_image

  void validate() const;
  bool is_zero() const noexcept { return sigma_input == 0 && sigma_image == 0 && sigma_obs == 0; }
};

struct OracleSettings {
  double parallax_min = 5.0 * kPi / 180.0;
  double worst_case_reward = -10.0;
  // Rays passing within this distance of another scene point are blocked.
  // Zero disables occlusion.
  double occlusion_radius = 0.0;
  ChamferVariant chamfer = ChamferVariant::kEuclidean;
};

// Simulated reconstruction: a reference point is recovered when at least two
// cameras see it with pairwise parallax >= parallax_min. Image noise drops
// each (camera, point) sighting with probability min(1, dropout_scale *
// sigma_image) and jitters recovered points by N(0, (jitter_scale *
// sigma_image)^2 I).
PointCloud reconstruct(const Scene& scene, const ViewPlan& plan, const NoiseSpec& noise,
                       std::uint64_t eval_seed, const OracleSettings& settings = {});

// Indices of reference points recovered with noise off.
std::vector<std::size_t> reconstructed_indices(const Scene& scene, const ViewPlan& plan,
                                               const OracleSettings& settings = {});

// -chamfer(reference, reconstruction) + observation noise for an already
// decoded plan. Input noise is not applied here.
double plan_reward(const Scene& scene, const ViewPlan& plan, const NoiseSpec& noise,
                   std::uint64_t eval_seed, const OracleSettings& settings = {});

// Black-box reward of a parameter vector, with input noise applied to theta.
double reward(const Scene& scene, const Vector& theta, const SearchSpace& space,
              const NoiseSpec& noise, std::uint64_t eval_seed,
              const OracleSettings& settings = {});

// Fraction of reference points recoverable with noise off.
double geometric_coverage(const Scene& scene, const ViewPlan& plan,
                          const OracleSettings& settings = {});

}  // namespace viewplan
