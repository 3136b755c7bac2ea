#include "viewplan/errors.hpp"
#include "viewplan/gp.hpp"
#include "viewplan/seed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace viewplan {

namespace {

// Log-space parameterization of (kernel, noise).
struct Layout {
  KernelFamily family;
  Eigen::Index n_lengthscales;
  bool has_period;
  bool has_noise;

  Eigen::Index size() const { return n_lengthscales + 1 + (has_period ? 1 : 0) + (has_noise ? 1 : 0); }
  Eigen::Index sf2_index() const { return n_lengthscales; }
  Eigen::Index period_index() const { return n_lengthscales + 1; }
  Eigen::Index noise_index() const { return size() - 1; }

  Eigen::VectorXd pack(const KernelSpec& k, double noise) const {
    Eigen::VectorXd x(size());
    for (Eigen::Index i = 0; i < n_lengthscales; ++i)
      x[i] = std::log(k.lengthscales[static_cast<std::size_t>(i)]);
    x[sf2_index()] = std::log(k.signal_variance);
    if (has_period) x[period_index()] = std::log(k.period);
    if (has_noise) x[noise_index()] = std::log(std::max(noise, 1e-300));
    return x;
  }

  void unpack(const Eigen::VectorXd& x, KernelSpec& k, double& noise) const {
    k.family = family;
    k.lengthscales.resize(static_cast<std::size_t>(n_lengthscales));
    for (Eigen::Index i = 0; i < n_lengthscales; ++i)
      k.lengthscales[static_cast<std::size_t>(i)] = std::exp(x[i]);
    k.signal_variance = std::exp(x[sf2_index()]);
    if (has_period) k.period = std::exp(x[period_index()]);
    if (has_noise) noise = std::exp(x[noise_index()]);
  }
};

}  // namespace

HyperFitResult fit_hyperparameters(const KernelSpec& initial, double initial_noise,
                                   const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                                   const HyperFitOptions& options) {
  initial.validate();
  if (inputs.rows() != targets.size()) throw DimensionError("fit_hyperparameters: size mismatch");
  if (inputs.rows() < 2) throw DomainError("fit_hyperparameters needs at least two observations");
  if (options.starts < 1 || options.budget < 1)
    throw DomainError("fit_hyperparameters: starts and budget must be >= 1");
  const Eigen::Index dim = inputs.cols();
  if (initial.required_dim() != 0 && initial.required_dim() != dim)
    throw DimensionError("fit_hyperparameters: kernel dimension does not match the inputs");

  const Eigen::VectorXd range = inputs.colwise().maxCoeff() - inputs.colwise().minCoeff();
  if (range.maxCoeff() <= 0.0)
    throw DomainError("fit_hyperparameters: all training inputs are identical");
  const double mean_y = targets.mean();
  double var_y = (targets.array() - mean_y).square().mean();
  if (!(var_y > 0.0)) var_y = 1.0;

  const Layout layout{initial.family,
                      initial.family == KernelFamily::kRbfArd ? dim : Eigen::Index{1},
                      initial.family == KernelFamily::kPeriodic, options.fit_noise};
  Eigen::VectorXd lo(layout.size()), hi(layout.size());
  for (Eigen::Index i = 0; i < layout.n_lengthscales; ++i) {
    double r = layout.family == KernelFamily::kRbfArd ? range[i] : range.maxCoeff();
    if (!(r > 0.0)) r = 1.0;
    lo[i] = std::log(1e-2 * r);
    hi[i] = std::log(1e2 * r);
  }
  lo[layout.sf2_index()] = std::log(1e-3 * var_y);
  hi[layout.sf2_index()] = std::log(1e3 * var_y);
  if (layout.has_period) {
    lo[layout.period_index()] = std::log(options.period_min);
    hi[layout.period_index()] = std::log(options.period_max);
  }
  if (layout.has_noise) {
    lo[layout.noise_index()] = std::log(options.noise_min);
    hi[layout.noise_index()] = std::log(options.noise_max);
  }

  HyperFitResult best;
  best.kernel = initial;
  best.noise_variance = initial_noise;
  best.log_marginal_likelihood = -std::numeric_limits<double>::infinity();

  KernelSpec scratch = initial;
  double scratch_noise = initial_noise;
  auto objective = [&](const Eigen::VectorXd& x) {
    layout.unpack(x, scratch, scratch_noise);
    ++best.evaluations;
    return log_marginal_likelihood(scratch, scratch_noise, inputs, targets);
  };

  std::mt19937_64 rng(derive_seed(options.seed, "hyperfit"));
  for (int start = 0; start < options.starts; ++start) {
    Eigen::VectorXd x;
    if (start == 0) {
      x = layout.pack(initial, initial_noise);
    } else {
      x.resize(layout.size());
      for (Eigen::Index i = 0; i < x.size(); ++i)
        x[i] = std::uniform_real_distribution<double>(lo[i], hi[i])(rng);
    }
    double fx = objective(x);
    int evals = 1;
    double step = 1.0;
    while (evals < options.budget && step > 1e-3) {
      bool improved = false;
      for (Eigen::Index i = 0; i < x.size() && evals < options.budget; ++i) {
        for (double dir : {1.0, -1.0}) {
          if (evals >= options.budget) break;
          Eigen::VectorXd trial = x;
          trial[i] = std::clamp(x[i] + dir * step, lo[i], hi[i]);
          if (trial[i] == x[i]) continue;
          const double ft = objective(trial);
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
    if (fx > best.log_marginal_likelihood) {
      best.log_marginal_likelihood = fx;
      layout.unpack(x, best.kernel, best.noise_variance);
    }
  }
  if (!options.fit_noise) best.noise_variance = initial_noise;
  return best;
}

}  // namespace viewplan
