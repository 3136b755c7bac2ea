#include "viewplan/baselines.hpp"

#include "viewplan/errors.hpp"

#include <algorithm>
#include <cmath>

namespace viewplan {

ViewPlan circle_plan(std::size_t n, double radius, double altitude, const Point3& center,
                     const Intrinsics& intrinsics) {
  if (n < 1) throw DomainError("circle_plan needs at least one camera");
  if (!(radius > 0.0)) throw DomainError("circle radius must be positive");
  std::vector<CameraPose> cams;
  cams.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double az = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
    const Point3 pos(center.x() + radius * std::cos(az), center.y() + radius * std::sin(az), altitude);
    cams.emplace_back(pos, (center - pos).normalized(), intrinsics);
  }
  return ViewPlan(std::move(cams));
}

CircleTuning tune_circle(std::size_t n, const Point3& center, const Intrinsics& intrinsics,
                         const std::vector<double>& radius_grid,
                         const std::vector<double>& altitude_grid, const PlanScorer& score) {
  if (radius_grid.empty() || altitude_grid.empty()) throw DomainError("circle grids must be non-empty");
  std::optional<CircleTuning> best;
  for (double r : radius_grid) {
    for (double a : altitude_grid) {
      ViewPlan plan = circle_plan(n, r, a, center, intrinsics);
      const double value = score(plan);
      if (!best || value > best->reward) best = CircleTuning{std::move(plan), value, r, a};
    }
  }
  return *best;
}

PlanScorer noise_free_scorer(const Scene& scene, const OracleSettings& settings) {
  return [&scene, settings](const ViewPlan& plan) {
    return plan_reward(scene, plan, NoiseSpec{}, 0, settings);
  };
}

CandidateViewSet build_candidates(const Scene& scene, const CandidateGrid& grid,
                                  const Intrinsics& intrinsics) {
  if (grid.azimuths < 1 || grid.elevations.empty() || grid.radii.empty())
    throw DomainError("candidate grid must be non-empty");
  CandidateViewSet set;
  set.universe = scene.reference().size();
  for (double radius : grid.radii) {
    for (double elevation : grid.elevations) {
      for (int k = 0; k < grid.azimuths; ++k) {
        const double az = kTwoPi * k / grid.azimuths;
        const double ce = std::cos(elevation);
        const Point3 offset(radius * ce * std::cos(az), radius * ce * std::sin(az),
                            radius * std::sin(elevation));
        CameraPose pose(scene.center() + offset, (-offset).normalized(), intrinsics);
        std::vector<std::size_t> covered;
        for (std::size_t i = 0; i < scene.reference().size(); ++i)
          if (is_visible(pose, scene.reference()[i])) covered.push_back(i);
        set.poses.push_back(std::move(pose));
        set.covered.push_back(std::move(covered));
      }
    }
  }
  return set;
}

namespace {

// One greedy pass over `available` candidates with a fresh coverage state.
GreedySelection greedy_pass(const CandidateViewSet& c, std::size_t n, std::vector<bool>& used) {
  GreedySelection sel;
  std::vector<bool> covered(c.universe, false);
  while (sel.selected.size() < n) {
    std::size_t best = c.poses.size(), best_gain = 0;
    for (std::size_t j = 0; j < c.poses.size(); ++j) {
      if (used[j]) continue;
      std::size_t gain = 0;
      for (std::size_t p : c.covered[j]) gain += covered[p] ? 0 : 1;
      if (gain > best_gain) {
        best_gain = gain;
        best = j;
      }
    }
    if (best == c.poses.size()) break;
    used[best] = true;
    for (std::size_t p : c.covered[best]) covered[p] = true;
    sel.selected.push_back(best);
    sel.gains.push_back(best_gain);
    sel.covered += best_gain;
  }
  return sel;
}

}  // namespace

GreedySelection mcp_greedy(const CandidateViewSet& candidates, std::size_t n) {
  if (candidates.poses.empty()) throw DomainError("mcp_greedy: empty candidate set");
  if (n < 1) throw DomainError("mcp_greedy: n must be >= 1");
  if (candidates.covered.size() != candidates.poses.size())
    throw DimensionError("mcp_greedy: coverage lists do not match candidates");
  std::vector<bool> used(candidates.poses.size(), false);
  return greedy_pass(candidates, n, used);
}

ViewPlan mcp_plan(const CandidateViewSet& candidates, std::size_t n) {
  if (candidates.poses.empty()) throw DomainError("mcp_plan: empty candidate set");
  std::vector<bool> used(candidates.poses.size(), false);
  std::vector<std::size_t> picks;
  const std::size_t target = std::min(n, candidates.poses.size());
  while (picks.size() < target) {
    const auto pass = greedy_pass(candidates, target - picks.size(), used);
    if (pass.selected.empty()) {
      // Nothing left adds coverage: take unused candidates in index order.
      for (std::size_t j = 0; j < used.size() && picks.size() < target; ++j)
        if (!used[j]) {
          used[j] = true;
          picks.push_back(j);
        }
      break;
    }
    picks.insert(picks.end(), pass.selected.begin(), pass.selected.end());
  }
  std::vector<CameraPose> cams;
  for (std::size_t j : picks) cams.push_back(candidates.poses[j]);
  return ViewPlan(std::move(cams));
}

Trace run_geometric_bo(const Scene& scene, const SearchSpace& space, const BoConfig& config,
                       const OracleSettings& settings) {
  const Oracle coverage = [&](const Vector& theta, std::uint64_t) {
    return geometric_coverage(scene, decode_plan(theta, space), settings);
  };
  return run_bosfm(coverage, space.bounds(), config);
}

}  // namespace viewplan
