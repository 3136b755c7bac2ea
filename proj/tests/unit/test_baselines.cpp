#include "viewplan/baselines.hpp"
#include "viewplan/errors.hpp"

#include <doctest.h>

#include <random>

using namespace viewplan;

namespace {

std::size_t union_size(const CandidateViewSet& c, const std::vector<std::size_t>& pick) {
  std::vector<bool> hit(c.universe, false);
  std::size_t n = 0;
  for (auto i : pick)
    for (auto p : c.covered[i])
      if (!hit[p]) hit[p] = true, ++n;
  return n;
}

CandidateViewSet random_instance(std::mt19937_64& rng, std::size_t candidates, std::size_t points, double p) {
  CandidateViewSet c;
  c.universe = points;
  std::bernoulli_distribution coin(p);
  for (std::size_t i = 0; i < candidates; ++i) {
    std::vector<std::size_t> cov;
    for (std::size_t q = 0; q < points; ++q)
      if (coin(rng)) cov.push_back(q);
    c.covered.push_back(cov);
    c.poses.emplace_back(Point3(static_cast<double>(i) + 1.0, 0, 0), Point3(-1, 0, 0), Intrinsics{});
  }
  return c;
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("circle plan geometry") {
  const Point3 c(0.5, -0.5, 0.4);
  const ViewPlan plan = circle_plan(4, 2.0, 1.0, c);
  REQUIRE(plan.size() == 4);
  CHECK(plan[0].position().x() == doctest::Approx(2.5));
  CHECK(plan[1].position().y() == doctest::Approx(1.5));
  for (const auto& cam : plan) {
    CHECK(cam.position().z() == 1.0);
    CHECK(std::hypot(cam.position().x() - c.x(), cam.position().y() - c.y()) == doctest::Approx(2.0));
    CHECK((cam.look_dir() - (c - cam.position()).normalized()).norm() < 1e-15);
  }
  CHECK_THROWS_AS(circle_plan(0, 1.0, 1.0, c), DomainError);
  CHECK_THROWS_AS(circle_plan(3, -1.0, 1.0, c), DomainError);
}

TEST_CASE("tune_circle is an exhaustive argmax with first-wins ties") {
  std::vector<std::pair<double, double>> seen;
  const PlanScorer score = [&](const ViewPlan& p) {
    seen.emplace_back(std::hypot(p[0].position().x(), p[0].position().y()), p[0].position().z());
    return -std::abs(p[0].position().z() - 1.0);  // altitude 1 best, every radius ties
  };
  const auto t = tune_circle(3, Point3::Zero(), Intrinsics{}, {1.5, 2.0, 2.5}, {0.5, 1.0, 1.5}, score);
  CHECK(seen.size() == 9);
  CHECK(t.radius == 1.5);
  CHECK(t.altitude == 1.0);
  CHECK(t.reward == 0.0);
  const auto one = tune_circle(3, Point3::Zero(), Intrinsics{}, {2.0}, {0.7}, score);
  CHECK(one.radius == 2.0);
  CHECK_THROWS_AS(tune_circle(3, Point3::Zero(), Intrinsics{}, {}, {1.0}, score), DomainError);
}

TEST_CASE("greedy coverage reaches (1 - 1/e) of the exhaustive optimum") {
  std::mt19937_64 rng(21);
  for (int inst = 0; inst < 30; ++inst) {
    const auto c = random_instance(rng, 7, 30, 0.25);
    const auto g = mcp_greedy(c, 3);
    CHECK(g.covered == union_size(c, g.selected));
    std::size_t best = 0;
    for (std::size_t a = 0; a < 7; ++a)
      for (std::size_t b = a + 1; b < 7; ++b)
        for (std::size_t d = b + 1; d < 7; ++d) best = std::max(best, union_size(c, {a, b, d}));
    CHECK(static_cast<double>(g.covered) >= (1.0 - 1.0 / std::exp(1.0)) * static_cast<double>(best));
  }
}

TEST_CASE("greedy picks the largest gain, lowest index on ties, and stops when nothing is left") {
  CandidateViewSet c;
  c.universe = 4;
  c.covered = {{0, 1}, {2, 3}, {0, 1, 2}, {0}};
  for (int i = 0; i < 4; ++i) c.poses.emplace_back(Point3(1, 0, 0), Point3(-1, 0, 0), Intrinsics{});
  const auto g = mcp_greedy(c, 4);
  CHECK(g.selected == std::vector<std::size_t>{2, 1});
  CHECK(g.gains == std::vector<std::size_t>{3, 1});
  CHECK(g.covered == 4);
  CHECK(mcp_plan(c, 4).size() == 4);
  CHECK(mcp_plan(c, 10).size() == 4);
}

TEST_CASE("candidate grid and coverage on a scene") {
  const Scene s = generate_scene(default_scene_spec(3, 1));
  CandidateGrid grid;
  grid.azimuths = 8;
  grid.elevations = {0.5};
  grid.radii = {2.0};
  const auto c = build_candidates(s, grid, Intrinsics{});
  REQUIRE(c.poses.size() == 8);
  CHECK(c.universe == s.reference().size());
  for (std::size_t i = 0; i < c.poses.size(); ++i)
    for (auto p : c.covered[i]) CHECK(is_visible(c.poses[i], s.reference()[p]));
  const ViewPlan plan = mcp_plan(c, 5);
  CHECK(plan.size() == 5);
  CandidateGrid single;
  single.azimuths = 1;
  single.elevations = {0.3};
  single.radii = {2.0};
  CHECK(build_candidates(s, single, Intrinsics{}).poses.size() == 1);
}

TEST_CASE("geometric BO runs on coverage") {
  const Scene s = generate_scene(default_scene_spec(3, 1));
  const auto space = SearchSpace::look_at_center(3, s.center(), Intrinsics{});
  BoConfig cfg;
  cfg.t_init = 5;
  cfg.t = 3;
  cfg.acquisition.n_random_candidates = 64;
  cfg.fit_starts = 1;
  cfg.fit_budget = 20;
  const Trace t = run_geometric_bo(s, space, cfg);
  CHECK(t.size() == 8);
  for (const auto& r : t.records) {
    CHECK(r.y >= 0.0);
    CHECK(r.y <= 1.0);
  }
}

}
