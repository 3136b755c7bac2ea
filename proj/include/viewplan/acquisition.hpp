#pragma once

#include "viewplan/geometry.hpp"
#include "viewplan/gp.hpp"

#include <cstdint>

namespace viewplan {

double normal_pdf(double x);
double normal_cdf(double x);

// E[max(0, r - r_max)] for r ~ N(mu, sigma^2). `sigma` is a standard
// deviation; at or below 1e-12 the degenerate value max(0, mu - r_max) is
// returned.
double expected_improvement(double mu, double sigma, double r_max);

struct AcquisitionBudget {
  int n_random_candidates = 2048;
  // Extra candidates perturbing the best training inputs, with standard
  // deviation local_scale * range (halved cyclically down to 1/8).
  int n_local_candidates = 1024;
  double local_scale = 0.1;
  int n_refine_starts = 8;
  // Pattern-search evaluations per refine start.
  int refine_steps = 100;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct AcquisitionResult {
  Vector theta;
  double ei = 0.0;
  // Best EI among the random candidates, before refinement.
  double best_candidate_ei = 0.0;
};

// Maximizes EI of `model` over `bounds`: uniform random candidates, then a
// coordinate pattern search from the best few (wrapping periodic
// dimensions, clamping the others).
AcquisitionResult maximize_af(const GpModel& model, double r_max, const Bounds& bounds,
                              const AcquisitionBudget& budget);

}  // namespace viewplan
