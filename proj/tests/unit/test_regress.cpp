#include <doctest.h>

#include "ofter/error.hpp"
#include "ofter/regress.hpp"
#include "oracles.hpp"

using namespace ofter;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

regress::FeatureWeights weights(const VectorXd& v) { return {v, false}; }

}  // namespace

TEST_CASE("weighted distance") {
  CHECK(regress::weighted_distance(VectorXd::Zero(2), (VectorXd(2) << 3, 4).finished(),
                                   weights((VectorXd(2) << 1, 0).finished())) == 3.0);
  std::mt19937_64 gen(1);
  const VectorXd a = oracle::random_vector(6, gen), b = oracle::random_vector(6, gen), c = oracle::random_vector(6, gen);
  const auto u = regress::FeatureWeights::uniform(6);
  CHECK(regress::weighted_distance(a, b, u) == doctest::Approx((a - b).norm() / std::sqrt(6.0)));
  CHECK(regress::weighted_distance(a, a, u) == 0.0);
  CHECK(regress::weighted_distance(a, b, u) == regress::weighted_distance(b, a, u));
  CHECK(regress::weighted_distance(a, c, u) <= regress::weighted_distance(a, b, u) + regress::weighted_distance(b, c, u) + 1e-15);
  CHECK_THROWS_AS(regress::weighted_distance(a, VectorXd::Zero(5), u), Error);
}

TEST_CASE("kNN") {
  const MatrixXd h = (MatrixXd(2, 1) << 1, 9).finished();
  const VectorXd y = (VectorXd(2) << 5, 7).finished();
  const auto w = regress::FeatureWeights::uniform(1);
  CHECK(regress::knn_forecast(h, y, VectorXd::Zero(1), 1, w) == 5.0);
  CHECK(regress::knn_forecast(h, y, VectorXd::Zero(1), 2, w) == 6.0);
  CHECK_THROWS_AS(regress::knn_forecast(h, y, VectorXd::Zero(1), 3, w), Error);
  CHECK_THROWS_AS(regress::knn_forecast(MatrixXd(0, 1), VectorXd(0), VectorXd::Zero(1), 1, w), Error);

  std::mt19937_64 gen(2);
  for (int rep = 0; rep < 200; ++rep) {
    const MatrixXd x = oracle::random_matrix(40, 4, gen);
    const VectorXd t = oracle::random_vector(40, gen);
    const VectorXd q = oracle::random_vector(4, gen);
    VectorXd v = oracle::random_vector(4, gen).cwiseAbs();
    v /= v.sum();
    CHECK(regress::knn_forecast(x, t, q, 5, weights(v)) == doctest::Approx(oracle::brute_knn(x, t, q, v, 5)).epsilon(1e-14));
  }

  // Ties resolve towards the earlier row.
  const MatrixXd tied = (MatrixXd(3, 1) << 1, -1, 1).finished();
  CHECK(regress::knn_forecast(tied, (VectorXd(3) << 10, 20, 30).finished(), VectorXd::Zero(1), 1, w) == 10.0);
}

TEST_CASE("GRNN") {
  const auto w = regress::FeatureWeights::uniform(1);
  const MatrixXd h = (MatrixXd(2, 1) << -1, 1).finished();
  const VectorXd y = (VectorXd(2) << 0, 2).finished();
  for (double s : {0.001, 1.0, 100.0}) CHECK(regress::grnn_forecast(h, y, VectorXd::Zero(1), s, w) == doctest::Approx(1.0));
  CHECK(regress::grnn_forecast(MatrixXd::Constant(1, 1, 4.0), VectorXd::Constant(1, 3.0), VectorXd::Zero(1), 1.0, w) == 3.0);

  std::mt19937_64 gen(3);
  for (int rep = 0; rep < 50; ++rep) {
    const MatrixXd x = oracle::random_matrix(60, 3, gen);
    const VectorXd t = oracle::random_vector(60, gen);
    const VectorXd q = oracle::random_vector(3, gen);
    const auto u = regress::FeatureWeights::uniform(3);
    const VectorXd d = regress::weighted_distances(x, q, u);
    const VectorXd wts = regress::grnn_weights(d, 0.5);
    CHECK((wts.array() >= 0.0).all());
    CHECK(std::abs(wts.sum() - 1.0) < 1e-12);
    const double f = regress::grnn_forecast(x, t, q, 0.5, u);
    CHECK(f >= t.minCoeff());
    CHECK(f <= t.maxCoeff());
    CHECK(std::abs(regress::grnn_forecast(x, t, q, 1e-6, u) - t.mean()) < 1e-6);
    CHECK(regress::grnn_forecast(x, t, q, 1e6, u) == doctest::Approx(oracle::brute_knn(x, t, q, u.v, 1)).epsilon(1e-12));
  }

  const MatrixXd same = MatrixXd::Zero(4, 2);
  const VectorXd targets = (VectorXd(4) << 1, 2, 3, 6).finished();
  CHECK(regress::grnn_forecast(same, targets, VectorXd::Zero(2), 1.0, regress::FeatureWeights::uniform(2)) == 3.0);
  CHECK_THROWS_AS(regress::grnn_forecast(same, targets, VectorXd::Zero(2), 0.0, regress::FeatureWeights::uniform(2)), Error);
}

TEST_CASE("OLS") {
  const MatrixXd x = VectorXd::LinSpaced(20, 0, 1);
  const VectorXd y = 3.0 + 2.0 * x.col(0).array();
  const auto m = regress::ols_fit(x, y);
  CHECK(m.beta0 == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(m.beta(0) == doctest::Approx(2.0).epsilon(1e-10));

  const auto flat = regress::ols_fit(x, VectorXd::Constant(20, 4.0));
  CHECK(std::abs(flat.beta(0)) < 1e-12);
  CHECK(flat.beta0 == doctest::Approx(4.0));

  std::mt19937_64 gen(4);
  for (int rep = 0; rep < 20; ++rep) {
    const MatrixXd a = oracle::random_matrix(80, 5, gen);
    const VectorXd b = oracle::random_vector(80, gen);
    const auto fit = regress::ols_fit(a, b);
    const VectorXd ref = oracle::normal_equations(a, b);
    CHECK(std::abs(fit.beta0 - ref(0)) < 1e-9);
    CHECK((fit.beta - ref.tail(5)).cwiseAbs().maxCoeff() < 1e-9);
    const VectorXd q = oracle::random_vector(5, gen);
    CHECK(regress::ols_predict(fit, q) == doctest::Approx(ref(0) + ref.tail(5).dot(q)));
  }

  MatrixXd collinear(30, 2);
  collinear.col(0) = oracle::random_vector(30, gen);
  collinear.col(1) = 2.0 * collinear.col(0);
  const auto ridge = regress::ols_fit(collinear, collinear.col(0));
  CHECK(ridge.beta.allFinite());
}
