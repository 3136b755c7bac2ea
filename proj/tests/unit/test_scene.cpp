#include "viewplan/baselines.hpp"
#include "viewplan/errors.hpp"
#include "viewplan/scene.hpp"

#include <doctest.h>

#include <algorithm>

using namespace viewplan;

namespace {

const Scene& three_plants() {
  static const Scene scene = generate_scene(default_scene_spec(3, 1));
  return scene;
}

// Independent statement of the reconstruction rule without occlusion.
std::vector<std::size_t> expected_indices(const Scene& scene, const ViewPlan& plan, double parallax_min) {
  std::vector<std::size_t> out;
  const auto& ref = scene.reference();
  for (std::size_t i = 0; i < ref.size(); ++i) {
    bool ok = false;
    for (std::size_t a = 0; a < plan.size() && !ok; ++a)
      for (std::size_t b = a + 1; b < plan.size() && !ok; ++b)
        ok = is_visible(plan[a], ref[i]) && is_visible(plan[b], ref[i]) &&
             parallax_angle(plan[a].position(), plan[b].position(), ref[i]) >= parallax_min;
    if (ok) out.push_back(i);
  }
  return out;
}

}  // namespace

TEST_SUITE("scene") {

TEST_CASE("generation is deterministic and sized as specified") {
  const SceneSpec spec = default_scene_spec(3, 1);
  const Scene a = generate_scene(spec);
  const Scene b = generate_scene(spec);
  CHECK(a.reference().points() == b.reference().points());
  CHECK(a.reference().size() == 3 * 500 + 1000);
  const Scene other = generate_scene(default_scene_spec(3, 2));
  CHECK(other.reference().points() != a.reference().points());
  for (int n : {1, 3, 4, 5, 6, 8}) CHECK(default_scene_spec(n, 0).plant_count() == static_cast<std::size_t>(n));
  SceneSpec bad = spec;
  bad.points_per_plant = 0;
  CHECK_THROWS_AS(generate_scene(bad), DomainError);
}

TEST_CASE("points stay on the plot and above the ground") {
  const Scene& s = three_plants();
  for (const auto& p : s.reference()) {
    CHECK(p.z() >= 0.0);
    CHECK(std::abs(p.x()) <= 2.0 + 1e-12);
    CHECK(std::abs(p.y()) <= 2.0 + 1e-12);
  }
}

TEST_CASE("removing a plant keeps the others unchanged") {
  const Scene& s = three_plants();
  const Scene removed = transform_scene(s, 0.0, false, {1}, 5);
  CHECK(removed.spec().plant_count() == 2);
  CHECK(removed.reference().size() == s.reference().size() - 500);
  const auto& all = s.reference().points();
  for (const auto& p : removed.reference()) CHECK(std::find(all.begin(), all.end(), p) != all.end());
  CHECK_THROWS_AS(transform_scene(s, 0.0, false, {7}, 5), DomainError);
  CHECK_THROWS_AS(transform_scene(s, 1.5, false, {}, 5), DomainError);
  const Scene moved = transform_scene(s, 0.1, true, {}, 5);
  CHECK(moved.reference().size() == s.reference().size());
  CHECK(moved.reference().points() != s.reference().points());
}

TEST_CASE("reconstruction rule matches the direct two-view parallax test") {
  const Scene& s = three_plants();
  const OracleSettings settings;
  for (double r : {1.5, 2.5}) {
    for (double alt : {0.5, 1.5}) {
      const ViewPlan plan = circle_plan(6, r, alt, s.center());
      CHECK(reconstructed_indices(s, plan, settings) == expected_indices(s, plan, settings.parallax_min));
    }
  }
}

TEST_CASE("noise-free reward equals minus chamfer of the recovered subset") {
  const Scene& s = three_plants();
  const ViewPlan plan = circle_plan(8, 2.0, 1.0, s.center());
  const auto idx = reconstructed_indices(s, plan);
  REQUIRE_FALSE(idx.empty());
  std::vector<Point3> sub;
  for (auto i : idx) sub.push_back(s.reference()[i]);
  CHECK(plan_reward(s, plan, NoiseSpec{}, 0) == -chamfer_distance(s.reference(), PointCloud(sub)));
  CHECK(geometric_coverage(s, plan) == doctest::Approx(static_cast<double>(idx.size()) / s.reference().size()));
}

TEST_CASE("single camera reconstructs nothing and scores the worst case") {
  const Scene& s = three_plants();
  const ViewPlan one = circle_plan(1, 2.0, 1.0, s.center());
  CHECK(reconstruct(s, one, NoiseSpec{}, 0).empty());
  CHECK(plan_reward(s, one, NoiseSpec{}, 0) == -10.0);
  OracleSettings settings;
  settings.worst_case_reward = -3.0;
  CHECK(plan_reward(s, one, NoiseSpec{}, 0, settings) == -3.0);
}

TEST_CASE("full image-noise dropout empties the reconstruction") {
  const Scene& s = three_plants();
  const ViewPlan plan = circle_plan(8, 2.0, 1.0, s.center());
  NoiseSpec noise;
  noise.sigma_image = 1.0;
  CHECK(reconstruct(s, plan, noise, 3).empty());
  CHECK(plan_reward(s, plan, noise, 3) == -10.0);
}

TEST_CASE("noisy rewards are reproducible per seed") {
  const Scene& s = three_plants();
  const auto space = SearchSpace::look_at_center(5, s.center(), Intrinsics{});
  Vector theta(15);
  for (int c = 0; c < 5; ++c) theta.segment(3 * c, 3) << 1.2 * c, 0.4, 2.0;
  NoiseSpec noise;
  noise.sigma_input = 0.05;
  noise.sigma_image = 0.1;
  noise.sigma_obs = 0.01;
  const double a = reward(s, theta, space, noise, 42);
  CHECK(reward(s, theta, space, noise, 42) == a);
  CHECK(reward(s, theta, space, noise, 43) != a);
  CHECK(reward(s, theta, space, NoiseSpec{}, 42) == reward(s, theta, space, NoiseSpec{}, 43));
  NoiseSpec bad;
  bad.sigma_input = -1.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("reward rejects parameters outside the bounds") {
  const Scene& s = three_plants();
  const auto space = SearchSpace::look_at_center(2, s.center(), Intrinsics{});
  const Vector theta = (Vector(6) << 0, 0.5, 9.0, 1, 0.5, 2).finished();
  CHECK_THROWS_AS(reward(s, theta, space, NoiseSpec{}, 0), DomainError);
}

TEST_CASE("occlusion blocks points hidden behind others") {
  SceneSpec spec;
  const Scene s(spec, PointCloud({Point3(0, 0, 0), Point3(1, 0, 0), Point3(0, 0, 5)}));
  const ViewPlan plan({CameraPose(Point3(2, 0, 0), Point3(-1, 0, 0), Intrinsics{0.5, 0.1, 3.0}),
                       CameraPose(Point3(2, 0.5, 0), (Point3(0, 0, 0) - Point3(2, 0.5, 0)).normalized(),
                                  Intrinsics{0.5, 0.1, 3.0})});
  OracleSettings open;
  OracleSettings blocked;
  blocked.occlusion_radius = 0.05;
  const auto a = reconstructed_indices(s, plan, open);
  const auto b = reconstructed_indices(s, plan, blocked);
  CHECK(std::find(a.begin(), a.end(), 0u) != a.end());
  CHECK(std::find(b.begin(), b.end(), 0u) == b.end());
}

}
