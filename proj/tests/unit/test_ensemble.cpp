#include "viewplan/ensemble.hpp"
#include "viewplan/errors.hpp"

#include <doctest.h>

#include <random>

using namespace viewplan;

TEST_SUITE("ensemble") {

TEST_CASE("bayes weights equal direct normalization") {
  const std::vector<double> lml{-10.0, -12.5, -9.0};
  const Eigen::VectorXd prior = (Eigen::VectorXd(3) << 0.2, 0.3, 0.5).finished();
  const Eigen::VectorXd w = bayes_weights(lml, prior);
  double z = 0.0;
  for (int i = 0; i < 3; ++i) z += std::exp(lml[i]) * prior[i];
  for (int i = 0; i < 3; ++i) CHECK(w[i] == doctest::Approx(std::exp(lml[i]) * prior[i] / z).epsilon(1e-14));
  CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("bayes weights survive huge log evidences") {
  const std::vector<double> lml{-1e6, -1e6 + 1.0};
  const Eigen::VectorXd w = bayes_weights(lml, Eigen::VectorXd::Constant(2, 0.5));
  CHECK(w[1] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-14));
}

TEST_CASE("zero prior mass and -inf evidence") {
  const double ninf = -std::numeric_limits<double>::infinity();
  const Eigen::VectorXd w = bayes_weights(std::vector<double>{0.0, ninf, 5.0}, (Eigen::VectorXd(3) << 0.5, 0.5, 0.0).finished());
  CHECK(w[0] == 1.0);
  CHECK(w[1] == 0.0);
  CHECK(w[2] == 0.0);
  CHECK_THROWS_AS(bayes_weights(std::vector<double>{ninf, ninf}, Eigen::VectorXd::Constant(2, 0.5)), DomainError);
  CHECK_THROWS_AS(bayes_weights(std::vector<double>{0.0}, Eigen::VectorXd::Constant(2, 0.5)), DimensionError);
}

TEST_CASE("identical models get identical weights") {
  Eigen::MatrixXd z(4, 1);
  z << 0.1, 0.4, 0.6, 0.9;
  const Eigen::VectorXd y = (Eigen::VectorXd(4) << 1, -1, 0.5, 0.2).finished();
  const GpModel gp = GpModel::fit(KernelSpec::matern52(0.3), 0.01, z, y);
  const Ensemble e = Ensemble({gp, gp, gp}).with_updated_weights();
  for (int i = 0; i < 3; ++i) CHECK(e.weights()[i] == 1.0 / 3.0);
}

TEST_CASE("mixture moments match Monte Carlo") {
  Eigen::MatrixXd z(5, 1);
  z << 0.0, 0.25, 0.5, 0.75, 1.0;
  const Eigen::VectorXd y = (Eigen::VectorXd(5) << 0, 1, 0, -1, 0).finished();
  const Ensemble e({GpModel::fit(KernelSpec::matern52(0.2), 0.01, z, y),
                    GpModel::fit(KernelSpec::rbf_ard({0.6}), 0.01, z, y)},
                   (Eigen::VectorXd(2) << 0.3, 0.7).finished());
  const Ensemble w = e.with_weights((Eigen::VectorXd(2) << 0.3, 0.7).finished());
  const Eigen::VectorXd q = Eigen::VectorXd::Constant(1, 0.4);
  const MixturePrediction mix = w.posterior(q);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  std::normal_distribution<double> g;
  double s1 = 0, s2 = 0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) {
    const auto& c = mix.components[u(rng) < 0.3 ? 0 : 1].prediction;
    const double x = c.mean + std::sqrt(c.variance) * g(rng);
    s1 += x;
    s2 += x * x;
  }
  const double mean = s1 / n, var = s2 / n - mean * mean;
  CHECK(mix.mean() == doctest::Approx(mean).epsilon(0.02).scale(1.0));
  CHECK(mix.variance() == doctest::Approx(var).epsilon(0.02));
  CHECK(mix.mean() == doctest::Approx(0.3 * mix.components[0].prediction.mean + 0.7 * mix.components[1].prediction.mean));
}

TEST_CASE("sample_model frequencies follow the weights") {
  const Eigen::VectorXd w = (Eigen::VectorXd(3) << 0.2, 0.0, 0.8).finished();
  int counts[3] = {0, 0, 0};
  for (std::uint64_t s = 0; s < 20000; ++s) ++counts[sample_model(w, s)];
  CHECK(counts[1] == 0);
  CHECK(counts[0] / 20000.0 == doctest::Approx(0.2).epsilon(0.1));
  CHECK(sample_model(w, 77) == sample_model(w, 77));
  CHECK(sample_model((Eigen::VectorXd(2) << 0.0, 1.0).finished(), 3) == 1);
  CHECK_THROWS_AS(validate_weights((Eigen::VectorXd(2) << 0.5, 0.6).finished()), DomainError);
  CHECK_THROWS_AS(validate_weights((Eigen::VectorXd(2) << -0.5, 1.5).finished()), DomainError);
}

}
