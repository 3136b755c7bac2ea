#pragma once

#include "viewplan/bo.hpp"
#include "viewplan/geometry.hpp"
#include "viewplan/scene.hpp"

#include <functional>
#include <vector>

namespace viewplan {

// N cameras equally spaced in azimuth on a horizontal circle at height
// `altitude` (absolute z), the first at azimuth 0, all aimed at `center`.
ViewPlan circle_plan(std::size_t n, double radius, double altitude, const Point3& center,
                     const Intrinsics& intrinsics = {});

struct CircleTuning {
  ViewPlan plan;
  double reward = 0.0;
  double radius = 0.0;
  double altitude = 0.0;
};

using PlanScorer = std::function<double(const ViewPlan&)>;

// Exhaustive search over radius x altitude (radius-major order); the first
// maximizer wins ties.
CircleTuning tune_circle(std::size_t n, const Point3& center, const Intrinsics& intrinsics,
                         const std::vector<double>& radius_grid,
                         const std::vector<double>& altitude_grid, const PlanScorer& score);

// Noise-free chamfer reward of a plan on a scene.
PlanScorer noise_free_scorer(const Scene& scene, const OracleSettings& settings = {});

struct CandidateViewSet {
  std::vector<CameraPose> poses;
  std::vector<std::vector<std::size_t>> covered;  // sorted point indices per candidate
  std::size_t universe = 0;                        // number of scene points
};

struct CandidateGrid {
  int azimuths = 16;
  std::vector<double> elevations{0.3, 0.6, 0.9, 1.2};
  std::vector<double> radii{1.5, 2.5, 3.5, 4.5};
};

// Candidate poses on an azimuth x elevation x radius shell grid around the
// scene center, aimed at it. A point is covered by a candidate when it is
// visible from it (single view).
CandidateViewSet build_candidates(const Scene& scene, const CandidateGrid& grid,
                                  const Intrinsics& intrinsics = {});

struct GreedySelection {
  std::vector<std::size_t> selected;
  std::vector<std::size_t> gains;  // newly covered points per pick
  std::size_t covered = 0;
};

// Classic greedy maximum coverage: picks the candidate with the largest
// number of uncovered points (lowest index on ties), n times or until no
// candidate adds coverage.
GreedySelection mcp_greedy(const CandidateViewSet& candidates, std::size_t n);

// Fills an n-camera plan with greedy maximum coverage. Once everything
// coverable is covered, coverage is reset and the greedy continues over the
// unused candidates, so the plan always has min(n, |candidates|) cameras.
ViewPlan mcp_plan(const CandidateViewSet& candidates, std::size_t n);

// Bayesian optimization of the noise-free geometric coverage instead of the
// reconstruction reward.
Trace run_geometric_bo(const Scene& scene, const SearchSpace& space, const BoConfig& config,
                       const OracleSettings& settings = {});

}  // namespace viewplan
