#include <doctest.h>

#include "ofter/error.hpp"
#include "ofter/maxcorr.hpp"
#include "ofter/stats.hpp"
#include "oracles.hpp"

using namespace ofter;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd grid(Eigen::Index n) { return VectorXd::LinSpaced(n, 0.0, 1.0); }

double sample_var(const VectorXd& x) {
  return (x.array() - x.mean()).square().sum() / static_cast<double>(x.size() - 1);
}

}  // namespace

TEST_CASE("Bernstein basis") {
  maxcorr::BernsteinBasis b;
  b.degree = 2;
  b.domain = {0.0, 1.0};
  CHECK(b.evaluate(0.5)(1) == doctest::Approx(0.5));
  const MatrixXd d = b.design(grid(50));
  CHECK((d.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-14);
  CHECK((d.array() >= 0.0).all());
  const MatrixXd centred = maxcorr::bernstein_design(grid(50), 2);
  CHECK(centred.colwise().mean().cwiseAbs().maxCoeff() < 1e-14);
  CHECK(b.evaluate(5.0)(2) == doctest::Approx(1.0));
  CHECK_THROWS_AS(maxcorr::bernstein_design(VectorXd::Ones(10), 2), Error);
  CHECK_THROWS_AS(maxcorr::bernstein_design(grid(3), 3), Error);
}

TEST_CASE("OSMC examples") {
  const VectorXd v1 = grid(200);
  CHECK(maxcorr::osmc(v1, 2.0 * v1.array() + 1.0, 3) == doctest::Approx(1.0).epsilon(1e-8));
  const VectorXd quad = (v1.array() - 0.5).square();
  const double pearson = stats::pearson({v1.data(), 200}, {quad.data(), 200});
  CHECK(std::abs(pearson) < 0.05);
  CHECK(maxcorr::osmc(v1, quad, 3) > 0.99);

  std::mt19937_64 gen(3);
  const VectorXd noise1 = oracle::random_vector(10000, gen), noise2 = oracle::random_vector(10000, gen);
  CHECK(maxcorr::osmc(noise1, noise2, 3) < 0.05);

  const VectorXd r = oracle::random_vector(300, gen);
  CHECK(maxcorr::osmc(r, r, 2) == doctest::Approx(1.0).epsilon(1e-8));
  const VectorXd s = oracle::random_vector(300, gen) + r;
  CHECK(maxcorr::osmc(3.0 * r.array() - 7.0, s) == doctest::Approx(maxcorr::osmc(r, s)).epsilon(1e-10));
}

TEST_CASE("OSMC constraints, self-consistency, dominance and nesting") {
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> kind(0, 2);
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::Index n = 60 + rep;
    VectorXd v1 = oracle::random_vector(n, gen);
    if (kind(gen) == 0) v1 = v1.array().exp();
    const VectorXd v2 = 0.3 * v1.array().square() + oracle::random_vector(n, gen).array();
    const auto fit = maxcorr::osmc_fit(v1, v2, 4);
    const VectorXd phi_c = maxcorr::bernstein_design(v1, 3) * fit.c;
    CHECK(std::abs(phi_c.mean()) < 1e-8);
    CHECK(std::abs(sample_var(phi_c) - 1.0) < 1e-8);
    CHECK(fit.value == doctest::Approx(oracle::textbook_pearson(phi_c, v2)).epsilon(1e-10));
    CHECK(fit.value >= 0.0);
    CHECK(fit.value <= 1.0 + 1e-10);
    CHECK(fit.value >= std::abs(oracle::textbook_pearson(v1, v2)) - 1e-8);
    CHECK(maxcorr::osmc(v1, v2, 5) >= fit.value - 1e-8);
    CHECK((fit.transform(v1) - phi_c).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("OSMC errors") {
  const VectorXd v = grid(20);
  CHECK_THROWS_AS(maxcorr::osmc(VectorXd::Ones(20), v), Error);
  CHECK_THROWS_AS(maxcorr::osmc(v, VectorXd::Ones(20)), Error);
  CHECK_THROWS_AS(maxcorr::osmc(v, grid(21)), Error);
  CHECK_THROWS_AS(maxcorr::osmc(grid(4), grid(4), 4), Error);
}
