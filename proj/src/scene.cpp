#include "viewplan/scene.hpp"

#include "viewplan/errors.hpp"
#include "viewplan/seed.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace viewplan {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

void append_plant(const SceneSpec& spec, const PlantSpec& plant, std::vector<Point3>& out) {
  std::mt19937_64 rng(derive_seed(spec.rng_seed, "plant", plant.stream_id));
  const double scale = uniform(rng, 0.9, 1.1) * plant.extra_scale;
  const double rotation = uniform(rng, 0.0, kTwoPi) + plant.extra_rotation;
  const double stem_height = uniform(rng, spec.stem_height_min, spec.stem_height_max);
  const double canopy = uniform(rng, spec.canopy_radius_min, spec.canopy_radius_max);
  // Elongated canopy so that rotation about the stem is observable.
  const Point3 radii(canopy, 0.6 * canopy, 0.5 * canopy);

  const double c = std::cos(rotation), s = std::sin(rotation);
  auto place = [&](const Point3& local) {
    const Point3 scaled = scale * local;
    return Point3(plant.x + c * scaled.x() - s * scaled.y(), plant.y + s * scaled.x() + c * scaled.y(),
                  scaled.z());
  };

  const int n_stem = spec.points_per_plant / 5;
  const int n_canopy = spec.points_per_plant - n_stem;
  for (int i = 0; i < n_stem; ++i) out.push_back(place({0.0, 0.0, uniform(rng, 0.0, stem_height)}));
  std::normal_distribution<double> normal;
  for (int i = 0; i < n_canopy; ++i) {
    Point3 dir(normal(rng), normal(rng), normal(rng));
    const double norm = dir.norm();
    dir = norm > 0.0 ? Point3(dir / norm) : Point3(0.0, 0.0, 1.0);
    out.push_back(place(Point3(0.0, 0.0, stem_height) + radii.cwiseProduct(dir)));
  }
}

// Ball occlusion: some other scene point lies within `radius` of the open
// segment from the camera to p, away from p's own neighborhood.
bool occluded(const Point3& camera, const Point3& p, const PointCloud& cloud, double radius) {
  const Point3 seg = p - camera;
  const double len2 = seg.squaredNorm();
  if (len2 == 0.0) return false;
  const double r2 = radius * radius;
  for (const auto& q : cloud) {
    if ((q - p).squaredNorm() < 4.0 * r2) continue;
    const double t = (q - camera).dot(seg) / len2;
    if (t <= 0.0 || t >= 1.0) continue;
    if ((camera + t * seg - q).squaredNorm() < r2) return true;
  }
  return false;
}

bool has_parallax_pair(const std::vector<const CameraPose*>& seen, const Point3& p,
                       double parallax_min) {
  for (std::size_t a = 0; a < seen.size(); ++a)
    for (std::size_t b = a + 1; b < seen.size(); ++b)
      if (seen[a]->position() != p && seen[b]->position() != p &&
          parallax_angle(seen[a]->position(), seen[b]->position(), p) >= parallax_min)
        return true;
  return false;
}

}  // namespace

void SceneSpec::validate() const {
  if (points_per_plant < 1) throw DomainError("points_per_plant must be >= 1");
  if (ground_points < 0) throw DomainError("ground_points must be >= 0");
  if (!(plot_half_size > 0.0)) throw DomainError("plot_half_size must be positive");
  if (!(stem_height_min > 0.0 && stem_height_min <= stem_height_max))
    throw DomainError("stem height range is invalid");
  if (!(canopy_radius_min > 0.0 && canopy_radius_min <= canopy_radius_max))
    throw DomainError("canopy radius range is invalid");
  for (const auto& p : plants)
    if (!(p.extra_scale > 0.0) || !std::isfinite(p.x) || !std::isfinite(p.y))
      throw DomainError("plant placement is invalid");
}

SceneSpec default_scene_spec(int plant_count, std::uint64_t seed) {
  if (plant_count < 0) throw DomainError("plant_count must be >= 0");
  std::vector<std::pair<double, double>> xy;
  switch (plant_count) {
    case 3:
      xy = {{-0.9, -0.6}, {0.9, -0.5}, {0.0, 0.9}};
      break;
    case 5:
      xy = {{-1.0, -0.9}, {1.0, -0.9}, {0.0, 0.0}, {-1.0, 0.9}, {1.0, 0.9}};
      break;
    case 6:
      xy = {{-1.1, -0.7}, {0.0, -0.9}, {1.1, -0.7}, {-1.1, 0.7}, {0.0, 0.9}, {1.1, 0.7}};
      break;
    default:
      for (int i = 0; i < plant_count; ++i) {
        const double a = kTwoPi * i / plant_count;
        xy.emplace_back(std::cos(a), std::sin(a));
      }
  }
  SceneSpec spec;
  spec.rng_seed = seed;
  for (std::size_t i = 0; i < xy.size(); ++i)
    spec.plants.push_back(PlantSpec{xy[i].first, xy[i].second, 1.0, 0.0, i});
  return spec;
}

Scene::Scene(SceneSpec spec, PointCloud reference)
    : spec_(std::move(spec)), reference_(std::move(reference)) {
  if (reference_.empty()) throw EmptyCloudError("scene reference cloud is empty");
  center_ = reference_.centroid();
  reference_.bounding_box(box_min_, box_max_);
}

Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  std::vector<Point3> points;
  points.reserve(spec.plants.size() * static_cast<std::size_t>(spec.points_per_plant) +
                 static_cast<std::size_t>(spec.ground_points));
  for (const auto& plant : spec.plants) append_plant(spec, plant, points);
  std::mt19937_64 ground(derive_seed(spec.rng_seed, "ground"));
  const double h = spec.plot_half_size;
  for (int i = 0; i < spec.ground_points; ++i) {
    const double x = uniform(ground, -h, h);
    const double y = uniform(ground, -h, h);
    points.emplace_back(x, y, 0.0);
  }
  return Scene(spec, PointCloud(std::move(points)));
}

Scene transform_scene(const Scene& scene, double scale_jitter, bool rotate,
                      const std::set<std::size_t>& remove_indices, std::uint64_t seed) {
  if (!(scale_jitter >= 0.0 && scale_jitter < 1.0))
    throw DomainError("scale_jitter must lie in [0, 1)");
  SceneSpec spec = scene.spec();
  for (std::size_t idx : remove_indices)
    if (idx >= spec.plants.size())
      throw DomainError("remove index " + std::to_string(idx) + " is not a plant index");

  std::vector<PlantSpec> kept;
  for (std::size_t i = 0; i < spec.plants.size(); ++i) {
    if (remove_indices.count(i)) continue;
    PlantSpec plant = spec.plants[i];
    std::mt19937_64 rng(derive_seed(seed, "transform", plant.stream_id));
    const double scale_draw = uniform(rng, -1.0, 1.0);
    const double rotation_draw = uniform(rng, 0.0, kTwoPi);
    plant.extra_scale *= 1.0 + scale_jitter * scale_draw;
    if (rotate) plant.extra_rotation += rotation_draw;
    kept.push_back(plant);
  }
  spec.plants = std::move(kept);
  return generate_scene(spec);
}

void NoiseSpec::validate() const {
  for (double v : {sigma_input, sigma_image, sigma_obs, dropout_scale, jitter_scale})
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("noise parameters must be finite and >= 0");
}

PointCloud reconstruct(const Scene& scene, const ViewPlan& plan, const NoiseSpec& noise,
                       std::uint64_t eval_seed, const OracleSettings& settings) {
  noise.validate();
  const PointCloud& ref = scene.reference();
  const double drop_p = std::min(1.0, noise.dropout_scale * noise.sigma_image);
  const double jitter = noise.jitter_scale * noise.sigma_image;
  std::mt19937_64 rng(derive_seed(eval_seed, "image"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal;

  std::vector<Point3> out;
  std::vector<const CameraPose*> seen;
  seen.reserve(plan.size());
  for (const auto& p : ref) {
    seen.clear();
    for (const auto& cam : plan) {
      if (!is_visible(cam, p)) continue;
      if (settings.occlusion_radius > 0.0 &&
          occluded(cam.position(), p, ref, settings.occlusion_radius))
        continue;
      if (drop_p > 0.0 && unit(rng) < drop_p) continue;
      seen.push_back(&cam);
    }
    if (seen.size() < 2) continue;
    const bool ok = has_parallax_pair(seen, p, settings.parallax_min);
    if (!ok) continue;
    if (jitter > 0.0) {
      const double jx = normal(rng), jy = normal(rng), jz = normal(rng);
      out.push_back(p + jitter * Point3(jx, jy, jz));
    } else {
      out.push_back(p);
    }
  }
  return PointCloud(std::move(out));
}

std::vector<std::size_t> reconstructed_indices(const Scene& scene, const ViewPlan& plan,
                                               const OracleSettings& settings) {
  const PointCloud& ref = scene.reference();
  std::vector<std::size_t> idx;
  std::vector<const CameraPose*> seen;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const Point3& p = ref[i];
    seen.clear();
    for (const auto& cam : plan)
      if (is_visible(cam, p) && !(settings.occlusion_radius > 0.0 &&
                                  occluded(cam.position(), p, ref, settings.occlusion_radius)))
        seen.push_back(&cam);
    const bool ok = has_parallax_pair(seen, p, settings.parallax_min);
    if (ok) idx.push_back(i);
  }
  return idx;
}

double plan_reward(const Scene& scene, const ViewPlan& plan, const NoiseSpec& noise,
                   std::uint64_t eval_seed, const OracleSettings& settings) {
  const PointCloud recon = reconstruct(scene, plan, noise, eval_seed, settings);
  if (recon.empty()) return settings.worst_case_reward;
  double y = -chamfer_distance(scene.reference(), recon, settings.chamfer);
  if (noise.sigma_obs > 0.0) {
    std::mt19937_64 rng(derive_seed(eval_seed, "observation"));
    y += noise.sigma_obs * std::normal_distribution<double>()(rng);
  }
  return y;
}

double reward(const Scene& scene, const Vector& theta, const SearchSpace& space,
              const NoiseSpec& noise, std::uint64_t eval_seed, const OracleSettings& settings) {
  if (theta.size() != space.dim()) throw DimensionError("reward: parameter vector has wrong dimension");
  if (!space.bounds().contains(theta, 1e-9))
    throw DomainError("reward: parameter vector outside the search space bounds");
  noise.validate();
  Vector perturbed = theta;
  if (noise.sigma_input > 0.0) {
    std::mt19937_64 rng(derive_seed(eval_seed, "input"));
    std::normal_distribution<double> normal;
    const Vector range = space.bounds().range();
    for (Eigen::Index d = 0; d < perturbed.size(); ++d)
      perturbed[d] += noise.sigma_input * range[d] * normal(rng);
  }
  perturbed = space.bounds().project(perturbed);
  return plan_reward(scene, decode_plan(perturbed, space), noise, eval_seed, settings);
}

double geometric_coverage(const Scene& scene, const ViewPlan& plan, const OracleSettings& settings) {
  const auto idx = reconstructed_indices(scene, plan, settings);
  return static_cast<double>(idx.size()) / static_cast<double>(scene.reference().size());
}

}  // namespace viewplan
