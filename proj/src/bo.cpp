#include "viewplan/bo.hpp"

#include "viewplan/errors.hpp"
#include "viewplan/metrics.hpp"
#include "viewplan/seed.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

namespace viewplan {

std::vector<double> Trace::observations() const {
  std::vector<double> ys;
  ys.reserve(records.size());
  for (const auto& r : records) ys.push_back(r.y);
  return ys;
}

std::vector<double> simple_regret_curve(const Trace& trace, double r_star) {
  const auto ys = trace.observations();
  return simple_regret_curve(std::span<const double>(ys), r_star);
}

void BoConfig::validate() const {
  if (t_init < 2) throw DomainError("t_init must be >= 2");
  if (t < 0) throw DomainError("t must be >= 0");
  if (kernels.empty()) throw DomainError("the ensemble needs at least one kernel");
  if (refit_every < 1) throw DomainError("refit_every must be >= 1");
  if (fit_starts < 1 || fit_budget < 1 || refit_starts < 1 || refit_budget < 1)
    throw DomainError("hyperparameter search starts and budgets must be >= 1");
  acquisition.validate();
}

std::vector<Vector> init_design(const Bounds& bounds, int n, std::uint64_t seed) {
  if (n < 1) throw DomainError("init_design needs at least one point");
  std::mt19937_64 rng(derive_seed(seed, "latin-hypercube"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Eigen::Index dim = bounds.dim();
  std::vector<Vector> design(static_cast<std::size_t>(n), Vector(dim));
  std::vector<int> strata(static_cast<std::size_t>(n));
  for (Eigen::Index d = 0; d < dim; ++d) {
    std::iota(strata.begin(), strata.end(), 0);
    std::shuffle(strata.begin(), strata.end(), rng);
    const double lo = bounds.lower()[d], width = bounds.upper()[d] - lo;
    const double top = std::nextafter(bounds.upper()[d], lo);
    for (int i = 0; i < n; ++i) {
      const double u = (strata[static_cast<std::size_t>(i)] + unit(rng)) / n;
      design[static_cast<std::size_t>(i)][d] = std::min(lo + u * width, top);
    }
  }
  return design;
}

KernelSpec default_kernel(KernelFamily family, const Bounds& bounds) {
  const Vector range = bounds.range();
  switch (family) {
    case KernelFamily::kRbfArd: {
      std::vector<double> ls(static_cast<std::size_t>(range.size()));
      for (Eigen::Index d = 0; d < range.size(); ++d) ls[static_cast<std::size_t>(d)] = 0.5 * range[d];
      return KernelSpec::rbf_ard(std::move(ls));
    }
    case KernelFamily::kMatern52:
      return KernelSpec::matern52(0.5 * range.norm());
    case KernelFamily::kPeriodic:
      return KernelSpec::periodic(1.0, kTwoPi);
  }
  throw DomainError("unknown kernel family");
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

struct Hyper {
  KernelSpec kernel;
  double noise = 1e-3;
};

}  // namespace

Trace run_bosfm(const Oracle& oracle, const Bounds& bounds, const BoConfig& config) {
  config.validate();
  Trace trace;
  trace.kernels = config.kernels;
  const auto n_models = static_cast<Eigen::Index>(config.kernels.size());
  const Eigen::VectorXd prior = Eigen::VectorXd::Constant(n_models, 1.0 / static_cast<double>(n_models));

  std::vector<Vector> inputs;
  std::vector<double> ys;
  double best = -std::numeric_limits<double>::infinity();

  auto evaluate = [&](const Vector& theta, int iteration, std::optional<std::size_t> model,
                      const Eigen::VectorXd& weights, Clock::time_point started) {
    double y = 0.0;
    try {
      y = oracle(theta, derive_seed(config.rng_seed, "oracle", inputs.size()));
    } catch (const std::exception& e) {
      throw BoAborted(std::string("oracle failed at iteration ") + std::to_string(iteration) + ": " +
                          e.what(),
                      trace);
    }
    if (!std::isfinite(y))
      throw BoAborted("oracle returned a non-finite value at iteration " + std::to_string(iteration),
                      trace);
    inputs.push_back(theta);
    ys.push_back(y);
    best = std::max(best, y);
    trace.records.push_back({iteration, theta, y, model, weights, best, elapsed_ms(started)});
  };

  const auto design = init_design(bounds, config.t_init, derive_seed(config.rng_seed, "design"));
  for (int i = 0; i < config.t_init; ++i)
    evaluate(design[static_cast<std::size_t>(i)], i - config.t_init + 1, std::nullopt, prior, Clock::now());

  std::vector<Hyper> hyper;
  for (KernelFamily family : config.kernels) hyper.push_back({default_kernel(family, bounds)});

  for (int t = 1; t <= config.t; ++t) {
    const auto started = Clock::now();
    const auto n = static_cast<Eigen::Index>(ys.size());
    Eigen::MatrixXd z(n, bounds.dim());
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      z.row(i) = inputs[static_cast<std::size_t>(i)].transpose();
      y[i] = ys[static_cast<std::size_t>(i)];
    }
    // Standardized targets; the affine map shifts every model's evidence by
    // the same constant, so the weights are unaffected.
    const double mean_y = y.mean();
    double sd_y = std::sqrt((y.array() - mean_y).square().mean());
    if (!(sd_y > 0.0)) sd_y = 1.0;
    const Eigen::VectorXd y_std = (y.array() - mean_y) / sd_y;
    const double r_max = (best - mean_y) / sd_y;

    std::vector<GpModel> models;
    try {
      const bool full = t == 1;
      if (full || (t - 1) % config.refit_every == 0) {
        for (std::size_t m = 0; m < hyper.size(); ++m) {
          HyperFitOptions opts;
          opts.starts = full ? config.fit_starts : config.refit_starts;
          opts.budget = full ? config.fit_budget : config.refit_budget;
          opts.seed = derive_seed(config.rng_seed, "fit", static_cast<std::uint64_t>(t) * 64 + m);
          const auto fitted = fit_hyperparameters(hyper[m].kernel, hyper[m].noise, z, y_std, opts);
          hyper[m] = {fitted.kernel, fitted.noise_variance};
        }
      }
      for (const auto& h : hyper) models.push_back(GpModel::fit(h.kernel, h.noise, z, y_std));
    } catch (const Error& e) {
      throw BoAborted(std::string("surrogate fit failed at iteration ") + std::to_string(t) + ": " +
                          e.what(),
                      trace);
    }

    const Ensemble ensemble = Ensemble(std::move(models), prior).with_updated_weights();
    const std::size_t chosen = sample_model(ensemble.weights(), derive_seed(config.rng_seed, "sample", t));

    AcquisitionBudget budget = config.acquisition;
    budget.rng_seed = derive_seed(config.acquisition.rng_seed ^ config.rng_seed, "acquire", t);
    const auto next = maximize_af(ensemble.model(chosen), r_max, bounds, budget);
    evaluate(next.theta, t, chosen, ensemble.weights(), started);
  }
  return trace;
}

BestRecord best_record(const Trace& trace) {
  if (trace.empty()) throw DomainError("best record of an empty trace");
  std::size_t arg = 0;
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (trace.records[i].y > trace.records[arg].y) arg = i;
  return {arg, trace.records[arg].theta, trace.records[arg].y};
}

BestPlan best_plan(const Trace& trace, const SearchSpace& space) {
  const auto best = best_record(trace);
  return {best.theta, decode_plan(best.theta, space), best.y};
}

}  // namespace viewplan
