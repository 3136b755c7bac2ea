#include "viewplan/acquisition.hpp"

#include "viewplan/errors.hpp"
#include "viewplan/seed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace viewplan {

double normal_pdf(double x) { return 0.39894228040143267794 * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

double expected_improvement(double mu, double sigma, double r_max) {
  const double delta = mu - r_max;
  if (!(sigma > 1e-12)) return std::max(0.0, delta);
  const double u = delta / sigma;
  return std::max(0.0, delta * normal_cdf(u) + sigma * normal_pdf(u));
}

void AcquisitionBudget::validate() const {
  if (n_random_candidates < 1 || n_refine_starts < 1 || refine_steps < 1)
    throw DomainError("acquisition budget entries must be positive");
}

namespace {

double ei_at(const GpModel& model, double r_max, const Vector& theta) {
  const Prediction p = model.predict(theta);
  return expected_improvement(p.mean, std::sqrt(p.variance), r_max);
}

}  // namespace

AcquisitionResult maximize_af(const GpModel& model, double r_max, const Bounds& bounds,
                              const AcquisitionBudget& budget) {
  budget.validate();
  const Eigen::Index dim = bounds.dim();
  if (model.size() > 0 && model.inputs().cols() != dim)
    throw DimensionError("maximize_af: model and bounds dimensions differ");

  std::mt19937_64 rng(derive_seed(budget.rng_seed, "acquisition"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Vector range = bounds.range();

  const auto n = static_cast<Eigen::Index>(budget.n_random_candidates);
  Eigen::MatrixXd candidates(n, dim);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index d = 0; d < dim; ++d)
      candidates(i, d) = bounds.lower()[d] + unit(rng) * range[d];
  // Local candidates: perturb a random subset of coordinates of the best
  // training inputs.
  const int n_local = budget.n_local_candidates;
  if (n_local > 0 && model.size() > 0) {
    std::vector<Eigen::Index> by_target(static_cast<std::size_t>(model.size()));
    std::iota(by_target.begin(), by_target.end(), Eigen::Index{0});
    std::stable_sort(by_target.begin(), by_target.end(), [&](Eigen::Index a, Eigen::Index b) {
      return model.targets()[a] > model.targets()[b];
    });
    const std::size_t n_anchor = std::min<std::size_t>(by_target.size(), 5);
    std::normal_distribution<double> normal;
    const double p_move = std::min(1.0, 20.0 / static_cast<double>(dim));
    Eigen::MatrixXd local(n_local, dim);
    for (int i = 0; i < n_local; ++i) {
      const Eigen::Index anchor = by_target[static_cast<std::size_t>(i) % n_anchor];
      Vector x = model.inputs().row(anchor).transpose();
      const double scale = budget.local_scale * std::pow(0.5, i % 4);
      bool moved = false;
      for (Eigen::Index d = 0; d < dim; ++d) {
        if (unit(rng) < p_move) {
          x[d] += scale * range[d] * normal(rng);
          moved = true;
        }
      }
      if (!moved) {
        const auto d = static_cast<Eigen::Index>(unit(rng) * static_cast<double>(dim)) % dim;
        x[d] += scale * range[d] * normal(rng);
      }
      local.row(i) = x.transpose();
    }
    Eigen::MatrixXd all(n + n_local, dim);
    all << candidates, local;
    candidates = std::move(all);
  }
  // Uniform draws can land on the open upper end of a periodic dimension.
  for (Eigen::Index i = 0; i < candidates.rows(); ++i) candidates.row(i) = bounds.project(candidates.row(i).transpose());

  const auto preds = model.predict_batch(candidates);
  std::vector<double> ei(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i)
    ei[i] = expected_improvement(preds[i].mean, std::sqrt(preds[i].variance), r_max);

  std::vector<std::size_t> order(ei.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ei[a] > ei[b]; });

  AcquisitionResult result;
  result.theta = candidates.row(static_cast<Eigen::Index>(order.front())).transpose();
  result.ei = ei[order.front()];
  result.best_candidate_ei = result.ei;

  const std::size_t starts = std::min<std::size_t>(order.size(), static_cast<std::size_t>(budget.n_refine_starts));
  for (std::size_t s = 0; s < starts; ++s) {
    Vector x = candidates.row(static_cast<Eigen::Index>(order[s])).transpose();
    double fx = ei[order[s]];
    Vector step = 0.1 * range;
    int evals = 0;
    while (evals < budget.refine_steps && step.maxCoeff() > 1e-9 * range.maxCoeff()) {
      bool improved = false;
      for (Eigen::Index d = 0; d < dim && evals < budget.refine_steps; ++d) {
        for (double dir : {1.0, -1.0}) {
          if (evals >= budget.refine_steps) break;
          Vector trial = x;
          trial[d] += dir * step[d];
          trial = bounds.project(trial);
          if (trial[d] == x[d]) continue;
          const double ft = ei_at(model, r_max, trial);
          ++evals;
          if (ft > fx) {
            x = std::move(trial);
            fx = ft;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (fx > result.ei) {
      result.ei = fx;
      result.theta = x;
    }
  }
  return result;
}

}  // namespace viewplan
