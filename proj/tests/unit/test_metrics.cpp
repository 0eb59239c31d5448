#include <doctest.h>

#include <limits>

#include "ofter/error.hpp"
#include "ofter/metrics.hpp"
#include "oracles.hpp"

using namespace ofter;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("return transforms") {
  CHECK(metrics::simple_returns((VectorXd(2) << 100, 110).finished())(0) == doctest::Approx(0.10));
  CHECK(metrics::simple_returns((VectorXd(4) << 100, 110, 121, 100).finished(), 2)(0) == doctest::Approx(0.21));
  CHECK(metrics::excess_returns(VectorXd::Constant(1, 0.02), VectorXd::Constant(1, 0.005))(0) == doctest::Approx(0.015));
  CHECK(metrics::log_volume_returns((VectorXd(2) << std::exp(1.0), std::exp(2.0)).finished())(0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(metrics::simple_returns((VectorXd(2) << 0, 1).finished()), Error);
  CHECK_THROWS_AS(metrics::excess_returns(VectorXd::Zero(2), VectorXd::Zero(3)), Error);
  CHECK_THROWS_AS(metrics::log_volume_returns((VectorXd(2) << -1, 1).finished()), Error);
}

TEST_CASE("forecast quality") {
  std::mt19937_64 gen(1);
  const VectorXd y = oracle::random_vector(100, gen);
  const auto same = metrics::forecast_quality(y, y);
  CHECK(same.pearson == doctest::Approx(1.0));
  CHECK(same.mse == 0.0);
  CHECK(same.mae == 0.0);
  const auto neg = metrics::forecast_quality(-y, y);
  CHECK(neg.pearson == doctest::Approx(-1.0));
  CHECK(neg.mse == doctest::Approx(4.0 * y.squaredNorm() / 100.0));
  const VectorXd f = oracle::random_vector(100, gen);
  const auto q = metrics::forecast_quality(f, y);
  CHECK(std::abs(q.pearson - oracle::textbook_pearson(f, y)) < 1e-12);
  CHECK(std::abs(q.mse - (f - y).squaredNorm() / 100.0) < 1e-12);
  CHECK(std::abs(q.mae - (f - y).cwiseAbs().sum() / 100.0) < 1e-12);
  CHECK_THROWS_AS(metrics::forecast_quality(f, VectorXd::Ones(100)), Error);
  CHECK_THROWS_AS(metrics::forecast_quality(f.head(3), y), Error);
}

TEST_CASE("daily P&L arithmetic") {
  const MatrixXd s = (MatrixXd(1, 2) << 0.5, 0.3).finished();
  const MatrixXd r = (MatrixXd(1, 2) << 0.01, -0.02).finished();
  CHECK(metrics::evaluate_strategy(s, r, 1).pnl(0) == doctest::Approx(-0.005));

  VectorXd alternating(10);
  for (int i = 0; i < 10; ++i) alternating(i) = i % 2 ? -0.01 : 0.01;
  CHECK(metrics::sharpe_ratio(alternating) == 0.0);

  std::mt19937_64 gen(2);
  const VectorXd pnl = oracle::random_vector(250, gen, 0.01).array() + 0.001;
  const double sd = std::sqrt((pnl.array() - pnl.mean()).square().sum() / 249.0);
  CHECK(metrics::sharpe_ratio(pnl) == doctest::Approx(pnl.mean() * std::sqrt(252.0) / sd).epsilon(1e-12));
  CHECK(metrics::sharpe_ratio(3.0 * pnl) == doctest::Approx(metrics::sharpe_ratio(pnl)).epsilon(1e-12));
  const double p = metrics::sharpe_p_value(pnl);
  CHECK(p > 0.0);
  CHECK(p < 0.5);
  CHECK(metrics::sharpe_p_value(-pnl) > 0.5);
}

TEST_CASE("quintile portfolios match a per-day sort oracle") {
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> coin(0, 9);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::Index days = 20, names = 3 + rep % 17;
    MatrixXd s = oracle::random_matrix(days, names, gen);
    for (Eigen::Index d = 0; d < days; ++d)
      for (Eigen::Index i = 0; i < names; ++i) {
        if (coin(gen) == 0) s(d, i) = std::numeric_limits<double>::quiet_NaN();
        else if (coin(gen) == 1) s(d, i) = std::round(s(d, i));
      }
    const MatrixXd r = oracle::random_matrix(days, names, gen, 0.01);
    for (int q = 1; q <= 5; ++q) {
      const auto res = metrics::evaluate_strategy(s, r, q);
      for (Eigen::Index d = 0; d < days; ++d) {
        const auto members = metrics::quantile_members(s.row(d).transpose(), q);
        CHECK(members == oracle::sorted_members(s.row(d).transpose(), q));
        double expect = 0.0;
        for (auto i : members) expect += (s(d, i) > 0 ? 1.0 : s(d, i) < 0 ? -1.0 : 0.0) * r(d, i);
        if (!members.empty()) expect /= static_cast<double>(members.size());
        CHECK(res.pnl(d) == doctest::Approx(expect).epsilon(1e-14));
        if (q > 1) {
          const auto wider = metrics::quantile_members(s.row(d).transpose(), q - 1);
          for (auto i : members) CHECK(std::find(wider.begin(), wider.end(), i) != wider.end());
        }
      }
      CHECK(res.ppd == doctest::Approx(res.pnl.mean()));
      const auto scaled = metrics::evaluate_strategy(4.0 * s, r, q);
      CHECK(scaled.pnl == res.pnl);
    }
  }
}

TEST_CASE("empty days are flagged") {
  MatrixXd s(2, 2);
  s << std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(), 1.0, 0.0;
  const MatrixXd r = MatrixXd::Constant(2, 2, 0.01);
  const auto res = metrics::evaluate_strategy(s, r, 1);
  CHECK(res.empty_days == std::vector<Eigen::Index>{0});
  CHECK(res.pnl(0) == 0.0);
  CHECK(res.pnl(1) == doctest::Approx(0.005));
  CHECK_THROWS_AS(metrics::evaluate_strategy(s, r.leftCols(1), 1), Error);
  CHECK_THROWS_AS(metrics::quantile_members(VectorXd::Ones(3), 6), Error);
}
