#include "viewplan/errors.hpp"
#include "viewplan/kdtree.hpp"
#include "viewplan/metrics.hpp"

#include <doctest.h>

#include <random>

using namespace viewplan;

namespace {

PointCloud random_cloud(std::mt19937_64& rng, std::size_t n, double spread = 1.0) {
  std::normal_distribution<double> g(0.0, spread);
  std::vector<Point3> pts;
  for (std::size_t i = 0; i < n; ++i) pts.emplace_back(g(rng), g(rng), g(rng));
  return PointCloud(std::move(pts));
}

double brute_directed(const PointCloud& a, const PointCloud& b, bool squared) {
  double sum = 0.0;
  for (const auto& p : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : b) best = std::min(best, (p - q).squaredNorm());
    sum += squared ? best : std::sqrt(best);
  }
  return sum / static_cast<double>(a.size());
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("kd-tree nearest matches brute force") {
  std::mt19937_64 rng(11);
  const PointCloud cloud = random_cloud(rng, 500);
  const KdTree3 tree(cloud.points(), 4);
  const PointCloud queries = random_cloud(rng, 200, 1.5);
  for (const auto& q : queries) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < cloud.size(); ++i)
      if ((cloud[i] - q).squaredNorm() < (cloud[arg] - q).squaredNorm()) arg = i;
    const auto hit = tree.nearest(q);
    CHECK(hit.index == arg);
    CHECK(hit.squared_distance == (cloud[arg] - q).squaredNorm());
  }
  const KdTree3 dup(std::vector<Point3>{Point3(1, 0, 0), Point3(0, 0, 0), Point3(0, 0, 0)});
  CHECK(dup.nearest(Point3(0, 0, 0)).squared_distance == 0.0);
  CHECK(dup.nearest(Point3(0, 0, 0)).index != 0);
}

TEST_CASE("chamfer hand examples") {
  const PointCloud a({Point3(0, 0, 0)});
  const PointCloud b({Point3(3, 4, 0)});
  CHECK(chamfer_distance(a, b) == 10.0);
  CHECK(chamfer_distance(a, b, ChamferVariant::kSquared) == 50.0);
  CHECK(chamfer_distance(a, a) == 0.0);
  const PointCloud two({Point3(0, 0, 0), Point3(2, 0, 0)});
  // a->two: 0; two->a: (0 + 2) / 2
  CHECK(chamfer_distance(a, two) == 1.0);
  CHECK_THROWS_AS(chamfer_distance(a, PointCloud()), EmptyCloudError);
  CHECK_THROWS_AS(directed_chamfer(PointCloud(), a), EmptyCloudError);
}

TEST_CASE("chamfer matches brute force and is exactly symmetric") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 10; ++k) {
    const PointCloud a = random_cloud(rng, 50 + 30 * k);
    const PointCloud b = random_cloud(rng, 300 - 20 * k, 0.7);
    for (bool sq : {false, true}) {
      const auto v = sq ? ChamferVariant::kSquared : ChamferVariant::kEuclidean;
      const double brute = brute_directed(a, b, sq) + brute_directed(b, a, sq);
      CHECK(chamfer_distance(a, b, v) == doctest::Approx(brute).epsilon(1e-12));
      CHECK(chamfer_distance(a, b, v) == chamfer_distance(b, a, v));
      CHECK(directed_chamfer(a, b, v) == doctest::Approx(brute_directed(a, b, sq)).epsilon(1e-12));
    }
  }
}

TEST_CASE("chamfer is non-negative and zero on permutations") {
  std::mt19937_64 rng(9);
  const PointCloud a = random_cloud(rng, 100);
  auto pts = a.points();
  std::shuffle(pts.begin(), pts.end(), rng);
  CHECK(chamfer_distance(a, PointCloud(pts)) == 0.0);
}

TEST_CASE("depth MAE examples") {
  DepthGridSpec one{1, -1, 1, -1, 1, 0.0};
  const PointCloud a({Point3(0, 0, 1)});
  CHECK(depth_mae(a, PointCloud(), one) == 1.0);
  CHECK(depth_mae(a, a, one) == 0.0);
  DepthGridSpec g{2, 0, 2, 0, 2, 0.0};
  const PointCloud tall({Point3(0.5, 0.5, 2.0), Point3(0.5, 0.5, 1.0), Point3(1.5, 1.5, 4.0)});
  const auto h = rasterize_heights(tall, g);
  REQUIRE(h.size() == 4);
  CHECK(h[0] == 2.0);
  CHECK(h[3] == 4.0);
  CHECK(h[1] == 0.0);
  // Differences 2 and 4 over four cells.
  CHECK(depth_mae(tall, PointCloud(), g) == doctest::Approx(1.5));
  CHECK_THROWS_AS((DepthGridSpec{0, 0, 1, 0, 1, 0}.validate()), DomainError);
}

TEST_CASE("simple regret curve") {
  const std::vector<double> y{-3, -1, -2, -0.5};
  const auto r = simple_regret_curve(y, 0.0);
  CHECK(r == std::vector<double>{3, 1, 1, 0.5});
  CHECK_THROWS_AS(simple_regret_curve(std::vector<double>{}, 0.0), DomainError);
}

}
