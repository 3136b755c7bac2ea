#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace viewplan {

enum class KernelFamily { kRbfArd, kMatern52, kPeriodic };

std::string_view to_string(KernelFamily family);
KernelFamily kernel_family_from_string(std::string_view name);

// Hyperparameters of one covariance function.
//
//   rbf-ard:     sf2 * exp(-1/2 sum_d (dz_d / l_d)^2)
//   matern-2.5:  sf2 * (1 + sqrt5 r/l + 5 r^2 / (3 l^2)) * exp(-sqrt5 r/l)
//   periodic:    sf2 * exp(-2 sum_d sin^2(pi dz_d / p) / l^2)
//
// rbf-ard carries one lengthscale per input dimension, the other families a
// single shared one.
struct KernelSpec {
  KernelFamily family = KernelFamily::kRbfArd;
  double signal_variance = 1.0;
  std::vector<double> lengthscales{1.0};
  double period = 6.283185307179586;

  static KernelSpec rbf_ard(std::vector<double> lengthscales, double signal_variance = 1.0);
  static KernelSpec matern52(double lengthscale, double signal_variance = 1.0);
  static KernelSpec periodic(double lengthscale, double period, double signal_variance = 1.0);

  // Throws DomainError on non-positive or non-finite hyperparameters.
  void validate() const;
  // Input dimension required by the spec, or 0 when any dimension works.
  Eigen::Index required_dim() const;
};

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& z,
                   const Eigen::Ref<const Eigen::VectorXd>& z2);

// Cross-covariance between the rows of A and the rows of B.
Eigen::MatrixXd cross_covariance(const KernelSpec& spec, const Eigen::MatrixXd& a,
                                 const Eigen::MatrixXd& b);

// Gram matrix over the rows of Z. Symmetric with exact sf2 on the diagonal.
Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& z);

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
  // Amount by which a negative roundoff variance was lifted to zero.
  double clamped = 0.0;
};

// Exact zero-mean GP regression model with a cached Cholesky factor of
// K + noise_variance * I. Instances are immutable.
class GpModel {
 public:
  // Model with no data: predictions are the prior.
  GpModel(KernelSpec kernel, double noise_variance);

  // Factorizes K + noise * I for the rows of `inputs`. If the factorization
  // fails, diagonal jitter starting at 1e-9 * sf2 is added and escalated by
  // x10 up to 1e-3 * sf2; throws FactorizationError beyond that.
  static GpModel fit(KernelSpec kernel, double noise_variance, Eigen::MatrixXd inputs,
                     Eigen::VectorXd targets);

  const KernelSpec& kernel() const noexcept { return kernel_; }
  double noise_variance() const noexcept { return noise_variance_; }
  double jitter() const noexcept { return jitter_; }
  Eigen::Index size() const noexcept { return inputs_.rows(); }
  const Eigen::MatrixXd& inputs() const noexcept { return inputs_; }
  const Eigen::VectorXd& targets() const noexcept { return targets_; }
  // Lower Cholesky factor of K + (noise + jitter) I.
  Eigen::MatrixXd cholesky_factor() const;

  Prediction predict(const Eigen::Ref<const Eigen::VectorXd>& z) const;
  // Row-wise prediction over a batch of inputs.
  std::vector<Prediction> predict_batch(const Eigen::MatrixXd& z) const;

  // log N(y; 0, K + noise * I).
  double log_marginal_likelihood() const;

 private:
  KernelSpec kernel_;
  double noise_variance_ = 0.0;
  double jitter_ = 0.0;
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd targets_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  double log_det_ = 0.0;
};

// Convenience for callers that only need the likelihood; returns -inf when
// the factorization is impossible.
double log_marginal_likelihood(const KernelSpec& kernel, double noise_variance,
                               const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets);

struct HyperFitOptions {
  int starts = 8;
  int budget = 200;  // likelihood evaluations per start
  bool fit_noise = true;
  double noise_min = 1e-8;
  double noise_max = 1.0;
  // Optional period range override; defaults to [0.1, 4] * 2pi.
  double period_min = 0.1 * 6.283185307179586;
  double period_max = 4.0 * 6.283185307179586;
  std::uint64_t seed = 0;
};

struct HyperFitResult {
  KernelSpec kernel;
  double noise_variance = 0.0;
  double log_marginal_likelihood = 0.0;
  int evaluations = 0;
};

// Maximizes the log marginal likelihood over log-hyperparameters with a
// multi-start coordinate pattern search. The first start is the supplied
// (kernel, noise) pair, so the result never has lower likelihood than the
// input. Search ranges: lengthscale in [1e-2, 1e2] * input range, sf2 in
// [1e-3, 1e3] * var(y), period in [period_min, period_max], noise in
// [noise_min, noise_max].
HyperFitResult fit_hyperparameters(const KernelSpec& initial, double initial_noise,
                                   const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                                   const HyperFitOptions& options = {});

}  // namespace viewplan
