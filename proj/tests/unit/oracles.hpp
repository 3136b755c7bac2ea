#pragma once

// Reference implementations written directly from the textbook formulas,
// used to check the library.

#include "viewplan/gp.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace oracle {

inline double kernel(const viewplan::KernelSpec& k, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  using viewplan::KernelFamily;
  switch (k.family) {
    case KernelFamily::kRbfArd: {
      double s = 0.0;
      for (Eigen::Index d = 0; d < a.size(); ++d) {
        const double l = k.lengthscales.size() == 1 ? k.lengthscales[0] : k.lengthscales[static_cast<std::size_t>(d)];
        s += (a[d] - b[d]) * (a[d] - b[d]) / (l * l);
      }
      return k.signal_variance * std::exp(-0.5 * s);
    }
    case KernelFamily::kMatern52: {
      const double r = (a - b).norm() / k.lengthscales[0];
      return k.signal_variance * (1 + std::sqrt(5.0) * r + 5.0 * r * r / 3.0) * std::exp(-std::sqrt(5.0) * r);
    }
    case KernelFamily::kPeriodic: {
      double s = 0.0;
      for (Eigen::Index d = 0; d < a.size(); ++d) {
        const double v = std::sin(M_PI * (a[d] - b[d]) / k.period);
        s += v * v;
      }
      const double l = k.lengthscales[0];
      return k.signal_variance * std::exp(-2.0 * s / (l * l));
    }
  }
  return 0.0;
}

inline Eigen::MatrixXd gram(const viewplan::KernelSpec& k, const Eigen::MatrixXd& z) {
  Eigen::MatrixXd g(z.rows(), z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.rows(); ++j) g(i, j) = kernel(k, z.row(i).transpose(), z.row(j).transpose());
  return g;
}

struct Posterior {
  double mean;
  double variance;
};

// Dense solve with a full-pivot LU instead of a Cholesky factor.
inline Posterior predict(const viewplan::KernelSpec& k, double noise, const Eigen::MatrixXd& z,
                         const Eigen::VectorXd& y, const Eigen::VectorXd& q) {
  const Eigen::MatrixXd K = oracle::gram(k, z) + noise * Eigen::MatrixXd::Identity(z.rows(), z.rows());
  Eigen::VectorXd ks(z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) ks[i] = kernel(k, z.row(i).transpose(), q);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  return {ks.dot(lu.solve(y)), kernel(k, q, q) - ks.dot(lu.solve(ks))};
}

inline double log_marginal_likelihood(const viewplan::KernelSpec& k, double noise, const Eigen::MatrixXd& z,
                                      const Eigen::VectorXd& y) {
  const Eigen::MatrixXd K = oracle::gram(k, z) + noise * Eigen::MatrixXd::Identity(z.rows(), z.rows());
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  const double logdet = std::log(std::abs(lu.determinant()));
  return -0.5 * y.dot(lu.solve(y)) - 0.5 * logdet - 0.5 * static_cast<double>(z.rows()) * std::log(2 * M_PI);
}

}  // namespace oracle
