#include "viewplan/bo.hpp"
#include "viewplan/errors.hpp"

#include <doctest.h>

#include <set>

using namespace viewplan;

namespace {

BoConfig small_config(std::uint64_t seed) {
  BoConfig cfg;
  cfg.t_init = 8;
  cfg.t = 12;
  cfg.acquisition.n_random_candidates = 256;
  cfg.acquisition.n_local_candidates = 64;
  cfg.fit_starts = 2;
  cfg.fit_budget = 60;
  cfg.rng_seed = seed;
  return cfg;
}

double bowl(const Vector& z, std::uint64_t) { return -(z.array() - 0.3).square().sum(); }

}  // namespace

TEST_SUITE("bo") {

TEST_CASE("latin hypercube puts one sample in each stratum") {
  const Bounds b((Vector(3) << 0, -1, 10).finished(), (Vector(3) << 1, 1, 20).finished());
  const auto design = init_design(b, 16, 5);
  REQUIRE(design.size() == 16);
  for (Eigen::Index d = 0; d < 3; ++d) {
    std::set<int> strata;
    for (const auto& x : design) {
      const double u = (x[d] - b.lower()[d]) / (b.upper()[d] - b.lower()[d]);
      strata.insert(static_cast<int>(u * 16));
    }
    CHECK(strata.size() == 16);
  }
  CHECK(init_design(b, 16, 5) == design);
  CHECK(init_design(b, 16, 6) != design);
}

TEST_CASE("trace layout, monotone best and determinism") {
  const Bounds b(Vector::Zero(2), Vector::Ones(2));
  const Trace t = run_bosfm(bowl, b, small_config(3));
  REQUIRE(t.size() == 20);
  CHECK(t.kernels.size() == 3);
  CHECK(t.records.front().iteration == -7);
  CHECK(t.records[7].iteration == 0);
  CHECK(t.records.back().iteration == 12);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& r = t.records[i];
    CHECK(r.model_index.has_value() == (r.iteration > 0));
    CHECK(r.weights.size() == 3);
    CHECK(r.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
    if (i > 0) CHECK(r.best_y >= t.records[i - 1].best_y);
    CHECK(b.contains(r.theta));
  }
  const auto regret = simple_regret_curve(t, 0.0);
  for (std::size_t i = 1; i < regret.size(); ++i) CHECK(regret[i] <= regret[i - 1]);
  const Trace again = run_bosfm(bowl, b, small_config(3));
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(again.records[i].theta == t.records[i].theta);
    CHECK(again.records[i].y == t.records[i].y);
  }
}

TEST_CASE("BO improves on its initial design for a smooth bowl") {
  const Bounds b(Vector::Zero(3), Vector::Ones(3));
  int better = 0;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    const Trace t = run_bosfm(bowl, b, small_config(s));
    if (t.records.back().best_y > t.records[7].best_y) ++better;
    CHECK(t.records.back().best_y > -0.1);
  }
  CHECK(better >= 2);
}

TEST_CASE("T = 0 returns just the design") {
  auto cfg = small_config(1);
  cfg.t = 0;
  const Trace t = run_bosfm(bowl, Bounds(Vector::Zero(2), Vector::Ones(2)), cfg);
  CHECK(t.size() == 8);
}

TEST_CASE("oracle failure aborts with the partial trace") {
  int calls = 0;
  const Oracle flaky = [&](const Vector& z, std::uint64_t s) {
    if (++calls == 11) throw std::runtime_error("oracle down");
    return bowl(z, s);
  };
  try {
    run_bosfm(flaky, Bounds(Vector::Zero(2), Vector::Ones(2)), small_config(2));
    FAIL("expected BoAborted");
  } catch (const BoAborted& e) {
    CHECK(e.partial().size() == 10);
    CHECK(std::string(e.what()).find("oracle down") != std::string::npos);
  }
}

TEST_CASE("non-finite oracle values abort") {
  const Oracle bad = [](const Vector&, std::uint64_t) { return std::nan(""); };
  CHECK_THROWS_AS(run_bosfm(bad, Bounds(Vector::Zero(1), Vector::Ones(1)), small_config(1)), BoAborted);
}

TEST_CASE("config validation") {
  auto cfg = small_config(1);
  cfg.kernels.clear();
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = small_config(1);
  cfg.t_init = 0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("best record is the first maximum") {
  Trace t;
  for (double y : {-3.0, -1.0, -1.0, -2.0}) {
    TraceRecord r;
    r.y = y;
    r.theta = Vector::Constant(1, y);
    t.records.push_back(r);
  }
  CHECK(best_record(t).index == 1);
  CHECK_THROWS_AS(best_record(Trace{}), DomainError);
}

}
