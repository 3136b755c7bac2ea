#include "viewplan/ensemble.hpp"

#include "viewplan/errors.hpp"
#include "viewplan/seed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace viewplan {

void validate_weights(const Eigen::VectorXd& weights, double tol) {
  if (weights.size() == 0) throw DomainError("weight vector is empty");
  for (Eigen::Index i = 0; i < weights.size(); ++i)
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i]))
      throw DomainError("weights must be finite and non-negative");
  if (std::abs(weights.sum() - 1.0) > tol) throw DomainError("weights must sum to one");
}

Eigen::VectorXd bayes_weights(std::span<const double> log_evidence,
                              const Eigen::VectorXd& prior_weights) {
  const auto m = static_cast<Eigen::Index>(log_evidence.size());
  if (m == 0 || prior_weights.size() != m)
    throw DimensionError("bayes_weights: evidence and prior sizes differ");
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd logw(m);
  double top = kNegInf;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double e = log_evidence[static_cast<std::size_t>(i)];
    logw[i] = (prior_weights[i] > 0.0 && !std::isnan(e)) ? e + std::log(prior_weights[i]) : kNegInf;
    top = std::max(top, logw[i]);
  }
  if (!std::isfinite(top))
    throw DomainError("bayes_weights: every model has zero posterior mass");
  Eigen::VectorXd w(m);
  for (Eigen::Index i = 0; i < m; ++i) w[i] = std::exp(logw[i] - top);
  return w / w.sum();
}

double MixturePrediction::mean() const {
  double mu = 0.0;
  for (const auto& c : components) mu += c.weight * c.prediction.mean;
  return mu;
}

double MixturePrediction::variance() const {
  double second = 0.0;
  for (const auto& c : components)
    second += c.weight * (c.prediction.variance + c.prediction.mean * c.prediction.mean);
  const double mu = mean();
  return std::max(0.0, second - mu * mu);
}

Ensemble::Ensemble(std::vector<GpModel> models, Eigen::VectorXd prior_weights)
    : models_(std::move(models)), prior_(std::move(prior_weights)) {
  if (models_.empty()) throw DomainError("an ensemble needs at least one model");
  const auto m = static_cast<Eigen::Index>(models_.size());
  if (prior_.size() == 0) prior_ = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  if (prior_.size() != m) throw DimensionError("ensemble: prior weight count differs from model count");
  validate_weights(prior_);
  weights_ = prior_;
}

Eigen::VectorXd update_weights(const Ensemble& ensemble) {
  std::vector<double> evidence;
  evidence.reserve(ensemble.size());
  for (const auto& model : ensemble.models()) evidence.push_back(model.log_marginal_likelihood());
  return bayes_weights(evidence, ensemble.prior_weights());
}

Ensemble Ensemble::with_updated_weights() const { return with_weights(update_weights(*this)); }

Ensemble Ensemble::with_weights(Eigen::VectorXd weights) const {
  if (weights.size() != prior_.size()) throw DimensionError("ensemble: weight count mismatch");
  validate_weights(weights);
  Ensemble out = *this;
  out.weights_ = std::move(weights);
  return out;
}

MixturePrediction Ensemble::posterior(const Eigen::Ref<const Eigen::VectorXd>& z) const {
  MixturePrediction mix;
  mix.components.reserve(models_.size());
  for (std::size_t m = 0; m < models_.size(); ++m)
    mix.components.push_back({models_[m].predict(z), weights_[static_cast<Eigen::Index>(m)]});
  return mix;
}

std::size_t sample_model(const Eigen::VectorXd& weights, std::uint64_t seed) {
  validate_weights(weights, 1e-9);
  std::mt19937_64 rng(derive_seed(seed, "categorical"));
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * weights.sum();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = static_cast<std::size_t>(i);
    cumulative += weights[i];
    if (u < cumulative) return last_positive;
  }
  return last_positive;
}

}  // namespace viewplan
