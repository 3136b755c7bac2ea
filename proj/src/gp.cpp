#include "viewplan/gp.hpp"

#include "viewplan/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace viewplan {

namespace {

constexpr double kSqrt5 = 2.23606797749978969641;

double matern52(double sf2, double r, double l) {
  const double s = kSqrt5 * r / l;
  return sf2 * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

void check_dim(const KernelSpec& spec, Eigen::Index dim) {
  const Eigen::Index need = spec.required_dim();
  if (need != 0 && need != dim)
    throw DimensionError("kernel expects inputs of dimension " + std::to_string(need) + ", got " +
                         std::to_string(dim));
}

// Fills out(i, j) = k(a_i, b_j). When `symmetric`, a and b are the same
// matrix and only the lower triangle is computed.
void covariance_into(const KernelSpec& spec, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                     bool symmetric, Eigen::MatrixXd& out) {
  const Eigen::Index n = a.rows(), m = b.rows(), dim = a.cols();
  out.resize(n, m);
  const double sf2 = spec.signal_variance;
  switch (spec.family) {
    case KernelFamily::kRbfArd: {
      Eigen::VectorXd inv(dim);
      for (Eigen::Index d = 0; d < dim; ++d) inv[d] = 1.0 / spec.lengthscales[static_cast<std::size_t>(d)];
      const Eigen::MatrixXd as = a * inv.asDiagonal();
      const Eigen::MatrixXd bs = symmetric ? as : Eigen::MatrixXd(b * inv.asDiagonal());
      const Eigen::MatrixXd at = as.transpose(), bt = bs.transpose();
      for (Eigen::Index j = 0; j < m; ++j) {
        const Eigen::Index i0 = symmetric ? j : 0;
        for (Eigen::Index i = i0; i < n; ++i) {
          const double sq = (at.col(i) - bt.col(j)).squaredNorm();
          out(i, j) = sf2 * std::exp(-0.5 * sq);
        }
      }
      break;
    }
    case KernelFamily::kMatern52: {
      const double l = spec.lengthscales.front();
      const Eigen::MatrixXd at = a.transpose(), bt = b.transpose();
      for (Eigen::Index j = 0; j < m; ++j) {
        const Eigen::Index i0 = symmetric ? j : 0;
        for (Eigen::Index i = i0; i < n; ++i)
          out(i, j) = matern52(sf2, (at.col(i) - bt.col(j)).norm(), l);
      }
      break;
    }
    case KernelFamily::kPeriodic: {
      // sin(x - y) = sin x cos y - cos x sin y, with x = pi z / p.
      const double l2 = spec.lengthscales.front() * spec.lengthscales.front();
      const double w = std::numbers::pi / spec.period;
      const Eigen::MatrixXd sa = (w * a.transpose()).array().sin(), ca = (w * a.transpose()).array().cos();
      const Eigen::MatrixXd sb = symmetric ? sa : Eigen::MatrixXd((w * b.transpose()).array().sin());
      const Eigen::MatrixXd cb = symmetric ? ca : Eigen::MatrixXd((w * b.transpose()).array().cos());
      for (Eigen::Index j = 0; j < m; ++j) {
        const Eigen::Index i0 = symmetric ? j : 0;
        for (Eigen::Index i = i0; i < n; ++i) {
          const double s = (sa.col(i).cwiseProduct(cb.col(j)) - ca.col(i).cwiseProduct(sb.col(j)))
                               .squaredNorm();
          out(i, j) = sf2 * std::exp(-2.0 * s / l2);
        }
      }
      break;
    }
  }
  if (symmetric) {
    for (Eigen::Index j = 0; j < m; ++j) {
      out(j, j) = sf2;
      for (Eigen::Index i = j + 1; i < n; ++i) out(j, i) = out(i, j);
    }
  }
}

struct Factor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
  double log_det = 0.0;
};

bool factor_ok(const Eigen::LLT<Eigen::MatrixXd>& llt, double floor) {
  if (llt.info() != Eigen::Success) return false;
  const auto diag = llt.matrixLLT().diagonal();
  for (Eigen::Index i = 0; i < diag.size(); ++i)
    if (!(diag[i] * diag[i] > floor)) return false;
  return true;
}

// Cholesky of K + noise * I with escalating jitter.
Factor factorize(Eigen::MatrixXd k, double sf2, double noise) {
  const Eigen::Index n = k.rows();
  k.diagonal().array() += noise;
  const double floor = static_cast<double>(n) * std::numeric_limits<double>::epsilon() *
                       k.diagonal().cwiseAbs().maxCoeff();
  Factor f;
  f.llt.compute(k);
  if (!factor_ok(f.llt, floor)) {
    bool ok = false;
    for (double j = 1e-9 * sf2; j <= 1e-3 * sf2 * (1.0 + 1e-12); j *= 10.0) {
      Eigen::MatrixXd kj = k;
      kj.diagonal().array() += j;
      f.llt.compute(kj);
      if (factor_ok(f.llt, floor)) {
        f.jitter = j;
        ok = true;
        break;
      }
    }
    if (!ok) throw FactorizationError("covariance matrix is not positive definite even with 1e-3 jitter");
  }
  f.log_det = 2.0 * f.llt.matrixLLT().diagonal().array().log().sum();
  return f;
}

constexpr double kLog2Pi = 1.83787706640934548356;

}  // namespace

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::kRbfArd: return "rbf-ard";
    case KernelFamily::kMatern52: return "matern-2.5";
    case KernelFamily::kPeriodic: return "periodic";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(std::string_view name) {
  if (name == "rbf-ard") return KernelFamily::kRbfArd;
  if (name == "matern-2.5") return KernelFamily::kMatern52;
  if (name == "periodic") return KernelFamily::kPeriodic;
  throw DomainError("unknown kernel family '" + std::string(name) + "'");
}

KernelSpec KernelSpec::rbf_ard(std::vector<double> lengthscales, double signal_variance) {
  KernelSpec s{KernelFamily::kRbfArd, signal_variance, std::move(lengthscales)};
  s.validate();
  return s;
}

KernelSpec KernelSpec::matern52(double lengthscale, double signal_variance) {
  KernelSpec s{KernelFamily::kMatern52, signal_variance, {lengthscale}};
  s.validate();
  return s;
}

KernelSpec KernelSpec::periodic(double lengthscale, double period, double signal_variance) {
  KernelSpec s{KernelFamily::kPeriodic, signal_variance, {lengthscale}, period};
  s.validate();
  return s;
}

void KernelSpec::validate() const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(signal_variance)) throw DomainError("signal variance must be positive and finite");
  if (lengthscales.empty()) throw DomainError("kernel needs at least one lengthscale");
  if (family != KernelFamily::kRbfArd && lengthscales.size() != 1)
    throw DomainError(std::string(to_string(family)) + " kernel takes a single shared lengthscale");
  for (double l : lengthscales)
    if (!positive(l)) throw DomainError("lengthscales must be positive and finite");
  if (family == KernelFamily::kPeriodic && !positive(period))
    throw DomainError("period must be positive and finite");
}

Eigen::Index KernelSpec::required_dim() const {
  return family == KernelFamily::kRbfArd ? static_cast<Eigen::Index>(lengthscales.size()) : 0;
}

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& z,
                   const Eigen::Ref<const Eigen::VectorXd>& z2) {
  if (z.size() != z2.size()) throw DimensionError("kernel_eval: input dimensions differ");
  check_dim(spec, z.size());
  const double sf2 = spec.signal_variance;
  switch (spec.family) {
    case KernelFamily::kRbfArd: {
      double sq = 0.0;
      for (Eigen::Index d = 0; d < z.size(); ++d) {
        const double u = (z[d] - z2[d]) / spec.lengthscales[static_cast<std::size_t>(d)];
        sq += u * u;
      }
      return sf2 * std::exp(-0.5 * sq);
    }
    case KernelFamily::kMatern52:
      return matern52(sf2, (z - z2).norm(), spec.lengthscales.front());
    case KernelFamily::kPeriodic: {
      double s = 0.0;
      for (Eigen::Index d = 0; d < z.size(); ++d) {
        const double v = std::sin(std::numbers::pi * (z[d] - z2[d]) / spec.period);
        s += v * v;
      }
      const double l = spec.lengthscales.front();
      return sf2 * std::exp(-2.0 * s / (l * l));
    }
  }
  return 0.0;
}

Eigen::MatrixXd cross_covariance(const KernelSpec& spec, const Eigen::MatrixXd& a,
                                 const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) throw DimensionError("cross_covariance: input dimensions differ");
  check_dim(spec, a.cols());
  Eigen::MatrixXd out;
  covariance_into(spec, a, b, false, out);
  return out;
}

Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& z) {
  check_dim(spec, z.cols());
  Eigen::MatrixXd out;
  covariance_into(spec, z, z, true, out);
  return out;
}

GpModel::GpModel(KernelSpec kernel, double noise_variance)
    : kernel_(std::move(kernel)), noise_variance_(noise_variance) {
  kernel_.validate();
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance))
    throw DomainError("noise variance must be finite and >= 0");
}

GpModel GpModel::fit(KernelSpec kernel, double noise_variance, Eigen::MatrixXd inputs,
                     Eigen::VectorXd targets) {
  GpModel model(std::move(kernel), noise_variance);
  if (inputs.rows() != targets.size())
    throw DimensionError("fit: number of inputs and targets differ");
  if (inputs.rows() == 0) return model;
  if (!inputs.allFinite() || !targets.allFinite()) throw DomainError("fit: non-finite training data");
  Factor f = factorize(gram(model.kernel_, inputs), model.kernel_.signal_variance, noise_variance);
  model.inputs_ = std::move(inputs);
  model.targets_ = std::move(targets);
  model.jitter_ = f.jitter;
  model.log_det_ = f.log_det;
  model.llt_ = std::move(f.llt);
  model.alpha_ = model.llt_.solve(model.targets_);
  return model;
}

Eigen::MatrixXd GpModel::cholesky_factor() const {
  if (size() == 0) return {};
  return llt_.matrixL();
}

Prediction GpModel::predict(const Eigen::Ref<const Eigen::VectorXd>& z) const {
  Eigen::MatrixXd row = z.transpose();
  return predict_batch(row).front();
}

std::vector<Prediction> GpModel::predict_batch(const Eigen::MatrixXd& z) const {
  const double prior = kernel_.signal_variance;
  std::vector<Prediction> out(static_cast<std::size_t>(z.rows()));
  if (size() == 0) {
    check_dim(kernel_, z.cols());
    for (auto& p : out) p = {0.0, prior, 0.0};
    return out;
  }
  if (z.cols() != inputs_.cols()) throw DimensionError("predict: input dimension mismatch");
  const Eigen::MatrixXd ks = cross_covariance(kernel_, inputs_, z);  // t x n
  const Eigen::VectorXd mean = ks.transpose() * alpha_;
  const Eigen::MatrixXd v = llt_.matrixL().solve(ks);
  const Eigen::VectorXd reduction = v.colwise().squaredNorm().transpose();
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    double var = prior - reduction[i];
    double clamped = 0.0;
    if (var < 0.0) {
      clamped = -var;
      var = 0.0;
    }
    out[static_cast<std::size_t>(i)] = {mean[i], var, clamped};
  }
  return out;
}

double GpModel::log_marginal_likelihood() const {
  const auto t = static_cast<double>(size());
  if (size() == 0) return 0.0;
  return -0.5 * targets_.dot(alpha_) - 0.5 * log_det_ - 0.5 * t * kLog2Pi;
}

double log_marginal_likelihood(const KernelSpec& kernel, double noise_variance,
                               const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets) {
  try {
    Factor f = factorize(gram(kernel, inputs), kernel.signal_variance, noise_variance);
    const Eigen::VectorXd alpha = f.llt.solve(targets);
    const double v = -0.5 * targets.dot(alpha) - 0.5 * f.log_det -
                     0.5 * static_cast<double>(targets.size()) * kLog2Pi;
    return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
  } catch (const FactorizationError&) {
    return -std::numeric_limits<double>::infinity();
  }
}

}  // namespace viewplan
