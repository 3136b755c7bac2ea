#pragma once

#include "viewplan/acquisition.hpp"
#include "viewplan/ensemble.hpp"
#include "viewplan/geometry.hpp"
#include "viewplan/gp.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace viewplan {

struct TraceRecord {
  // Initialization records carry t in {-T_init+1, ..., 0}; loop records 1..T.
  int iteration = 0;
  Vector theta;
  double y = 0.0;
  // Model used for the acquisition; nullopt for initialization records.
  std::optional<std::size_t> model_index;
  Eigen::VectorXd weights;
  double best_y = 0.0;
  double wall_ms = 0.0;
};

struct Trace {
  std::vector<TraceRecord> records;
  std::vector<KernelFamily> kernels;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }
  std::vector<double> observations() const;
};

std::vector<double> simple_regret_curve(const Trace& trace, double r_star = 0.0);

// Black-box objective. Receives the intended parameter vector and a
// per-evaluation seed.
using Oracle = std::function<double(const Vector& theta, std::uint64_t eval_seed)>;

struct BoConfig {
  int t_init = 50;
  int t = 100;
  std::vector<KernelFamily> kernels{KernelFamily::kPeriodic, KernelFamily::kRbfArd,
                                    KernelFamily::kMatern52};
  AcquisitionBudget acquisition{};
  int refit_every = 1;
  // Hyperparameter search for the initial fit.
  int fit_starts = 8;
  int fit_budget = 200;
  // Warm-started search used for refits inside the loop.
  int refit_starts = 2;
  int refit_budget = 100;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

// Latin-hypercube design: every coordinate has exactly one sample in each of
// the n equal-width strata of its range.
std::vector<Vector> init_design(const Bounds& bounds, int n, std::uint64_t seed);

// Thrown when the oracle fails; carries every record collected so far.
class BoAborted : public std::runtime_error {
 public:
  BoAborted(const std::string& what, Trace partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const Trace& partial() const noexcept { return partial_; }

 private:
  Trace partial_;
};

// Ensemble-GP Bayesian optimization with adaptive EI: after the initial
// design, each iteration refits every model, reweights the ensemble by
// marginal likelihood, samples one model from the weights and maximizes its
// EI to choose the next query.
Trace run_bosfm(const Oracle& oracle, const Bounds& bounds, const BoConfig& config);

struct BestRecord {
  std::size_t index = 0;
  Vector theta;
  double y = 0.0;
};

// First record attaining the maximum observation.
BestRecord best_record(const Trace& trace);

struct BestPlan {
  Vector theta;
  ViewPlan plan;
  double y = 0.0;
};

BestPlan best_plan(const Trace& trace, const SearchSpace& space);

// Default starting hyperparameters for a family given the input bounds.
KernelSpec default_kernel(KernelFamily family, const Bounds& bounds);

}  // namespace viewplan
