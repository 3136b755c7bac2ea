#pragma once

#include "viewplan/gp.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace viewplan {

// Posterior weights w_m proportional to exp(log_evidence_m) * prior_m,
// normalized in log space. Zero prior mass stays zero. Throws DomainError
// when no model has finite evidence and positive prior mass.
Eigen::VectorXd bayes_weights(std::span<const double> log_evidence,
                              const Eigen::VectorXd& prior_weights);

struct MixtureComponent {
  Prediction prediction;
  double weight = 0.0;
};

// Gaussian mixture predictive distribution.
struct MixturePrediction {
  std::vector<MixtureComponent> components;

  double mean() const;
  // sum_m w_m (var_m + mu_m^2) - mean^2, floored at zero.
  double variance() const;
};

// A set of GP models with distinct kernels and their posterior weights.
class Ensemble {
 public:
  // Uniform prior weights when `prior_weights` is empty.
  explicit Ensemble(std::vector<GpModel> models, Eigen::VectorXd prior_weights = {});

  std::size_t size() const noexcept { return models_.size(); }
  const std::vector<GpModel>& models() const noexcept { return models_; }
  const GpModel& model(std::size_t m) const { return models_.at(m); }
  const Eigen::VectorXd& prior_weights() const noexcept { return prior_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }

  // Recomputes the weights from each model's marginal likelihood on its own
  // training data (the full dataset, batch form).
  Ensemble with_updated_weights() const;
  Ensemble with_weights(Eigen::VectorXd weights) const;

  MixturePrediction posterior(const Eigen::Ref<const Eigen::VectorXd>& z) const;

 private:
  std::vector<GpModel> models_;
  Eigen::VectorXd prior_;
  Eigen::VectorXd weights_;
};

// Weights after the Bayes update for models already fitted on the dataset.
Eigen::VectorXd update_weights(const Ensemble& ensemble);

// Draws a model index from the categorical distribution over `weights`.
std::size_t sample_model(const Eigen::VectorXd& weights, std::uint64_t seed);

void validate_weights(const Eigen::VectorXd& weights, double tol = 1e-12);

}  // namespace viewplan
