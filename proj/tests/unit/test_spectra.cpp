#include <doctest.h>

#include "ofter/error.hpp"
#include "ofter/spectra.hpp"
#include "oracles.hpp"

using namespace ofter;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double orthogonality_error(const MatrixXd& u) {
  return (u.transpose() * u - MatrixXd::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

spectra::EigenSystem random_system(Eigen::Index d, std::mt19937_64& gen) {
  return spectra::full_eig(oracle::random_symmetric(d, gen));
}

}  // namespace

TEST_CASE("full_eig small cases") {
  auto id = spectra::full_eig(MatrixXd::Identity(3, 3));
  CHECK(id.values.isApprox(VectorXd::Ones(3)));

  auto diag = spectra::full_eig((MatrixXd(2, 2) << 1, 0, 0, 2).finished());
  CHECK(diag.values(0) == doctest::Approx(2.0));
  CHECK(diag.values(1) == doctest::Approx(1.0));
  CHECK(std::abs(diag.vectors(1, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(diag.vectors(0, 1)) == doctest::Approx(1.0));

  CHECK_THROWS_AS(spectra::full_eig((MatrixXd(2, 2) << 1, 2, 0, 1).finished()), Error);
  MatrixXd bad = MatrixXd::Identity(2, 2);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(spectra::full_eig(bad), Error);
}

TEST_CASE("full_eig agrees with a Jacobi oracle") {
  std::mt19937_64 gen(17);
  for (int rep = 0; rep < 10; ++rep) {
    const MatrixXd a = oracle::random_symmetric(10, gen);
    const auto sys = spectra::full_eig(a);
    const auto [values, vectors] = oracle::jacobi_eigen(a);
    CHECK((sys.values - values).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((sys.reconstruct() - a).norm() < 1e-10 * a.norm());
    CHECK(orthogonality_error(sys.vectors) < 1e-10);
    for (Eigen::Index k = 0; k < 10; ++k) CHECK(std::abs(sys.vectors.col(k).dot(vectors.col(k))) > 1 - 1e-8);
    for (Eigen::Index k = 0; k < 10; ++k) {
      Eigen::Index arg;
      sys.vectors.col(k).cwiseAbs().maxCoeff(&arg);
      CHECK(sys.vectors(arg, k) > 0.0);
    }
  }
}

TEST_CASE("secular roots closed forms") {
  const VectorXd lam = (VectorXd(2) << 2, 1).finished();
  const VectorXd z = VectorXd::Constant(2, 1.0 / std::sqrt(2.0));
  const VectorXd r = spectra::secular_roots(lam, z, 1.0);
  // Eigenvalues of diag(2,1) + 0.5 * ones: 2 +- sqrt(0.5).
  const MatrixXd direct = (MatrixXd(2, 2) << 2.5, 0.5, 0.5, 1.5).finished();
  const auto [values, vectors] = oracle::jacobi_eigen(direct);
  CHECK(r(0) == doctest::Approx(values(0)).epsilon(1e-14));
  CHECK(r(1) == doctest::Approx(values(1)).epsilon(1e-14));
  CHECK(r(0) == doctest::Approx(2.0 + std::sqrt(0.5)));

  const VectorXd decoupled = spectra::secular_roots((VectorXd(2) << 3, 1).finished(), (VectorXd(2) << 1, 0).finished(), 1.0);
  CHECK(decoupled(0) == doctest::Approx(4.0));
  CHECK(decoupled(1) == 1.0);
}

TEST_CASE("secular roots match full re-decomposition at d = 20") {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int rep = 0; rep < 20; ++rep) {
    VectorXd lam(20);
    for (int i = 0; i < 20; ++i) lam(i) = unif(gen);
    std::sort(lam.data(), lam.data() + 20, std::greater<>());
    VectorXd z = oracle::random_vector(20, gen).normalized();
    const double rho = unif(gen);
    const VectorXd roots = spectra::secular_roots(lam, z, rho);
    const MatrixXd m = MatrixXd(lam.asDiagonal()) + rho * z * z.transpose();
    const auto [values, vectors] = oracle::jacobi_eigen(m);
    CHECK((roots - values).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("Newton iterates on the convexified function are monotone") {
  std::mt19937_64 gen(29);
  for (int rep = 0; rep < 50; ++rep) {
    VectorXd lam = oracle::random_vector(12, gen);
    std::sort(lam.data(), lam.data() + 12, std::greater<>());
    const VectorXd z = oracle::random_vector(12, gen).normalized();
    std::vector<spectra::NewtonTrace> traces;
    spectra::secular_roots(lam, z, 0.5 + std::abs(lam(0)), {}, &traces);
    for (const auto& t : traces) {
      if (t.bisection_fallback) continue;
      for (std::size_t i = 1; i < t.residuals.size(); ++i)
        CHECK(t.residuals[i] <= t.residuals[i - 1] * (1 + 1e-9) + 1e-15);
    }
  }
}

TEST_CASE("truncated secular roots") {
  std::mt19937_64 gen(31);
  const VectorXd lam = (VectorXd(4) << 5.0, 3.0, 1.0, 1.0 - 1e-3).finished();
  const VectorXd z = oracle::random_vector(4, gen).normalized();
  const VectorXd full = spectra::secular_roots(lam, z, 0.7);
  const VectorXd same = spectra::truncated_secular_roots(lam, z, 0.7, 0.0, 4);
  CHECK((same - full).cwiseAbs().maxCoeff() < 1e-12);

  const double mu = 0.5 * (lam(2) + lam(3));
  const VectorXd top = spectra::truncated_secular_roots(lam.head(2), z.head(2), 0.7, mu, 2);
  CHECK((top - full.head(2)).cwiseAbs().maxCoeff() <= 2 * std::abs(lam(2) - lam(3)));

  VectorXd head_only = VectorXd::Zero(4);
  head_only.head(2) = oracle::random_vector(2, gen).normalized();
  const VectorXd exact = spectra::secular_roots(lam, head_only, 0.7);
  const VectorXd trunc = spectra::truncated_secular_roots(lam.head(2), head_only.head(2), 0.7, 0.3, 2);
  CHECK((trunc - exact.head(2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rank-one update matches direct decomposition") {
  const spectra::EigenSystem sys{(VectorXd(2) << 2, 1).finished(), MatrixXd::Identity(2, 2)};
  const VectorXd v = VectorXd::Constant(2, 1.0 / std::sqrt(2.0));
  auto up = spectra::rank_one_update(sys, {1.0, v});
  const MatrixXd direct = sys.reconstruct() + v * v.transpose();
  const auto [values, vectors] = oracle::jacobi_eigen(direct);
  CHECK((up.values - values).cwiseAbs().maxCoeff() < 1e-13);
  for (int k = 0; k < 2; ++k) CHECK(std::abs(up.vectors.col(k).dot(vectors.col(k))) == doctest::Approx(1.0));

  auto null = spectra::rank_one_update(sys, {0.0, v});
  CHECK(null.values == sys.values);
  CHECK(null.vectors == sys.vectors);
}

TEST_CASE("rank-one updates on random systems: residuals, interlacing, trace") {
  std::mt19937_64 gen(37);
  for (int rep = 0; rep < 50; ++rep) {
    const auto sys = random_system(20, gen);
    const VectorXd v = oracle::random_vector(20, gen);
    const double rho = std::uniform_real_distribution<double>(0.01, 3.0)(gen);
    const auto up = spectra::rank_one_update(sys, {rho, v});
    const MatrixXd a = sys.reconstruct() + rho * v * v.transpose();
    for (Eigen::Index k = 0; k < 20; ++k)
      CHECK((a * up.vectors.col(k) - up.values(k) * up.vectors.col(k)).norm() < 1e-7);
    CHECK(orthogonality_error(up.vectors) < 1e-8);
    const double shift = rho * v.squaredNorm();
    CHECK(up.values(0) <= sys.values(0) + shift + 1e-9);
    for (Eigen::Index k = 0; k < 20; ++k) {
      CHECK(up.values(k) >= sys.values(k) - 1e-9);
      if (k > 0) CHECK(up.values(k) <= sys.values(k - 1) + 1e-9);
    }
    CHECK(std::abs(up.values.sum() - (sys.values.sum() + shift)) < 1e-9 * (1 + std::abs(sys.values.sum()) + shift));
  }
}

TEST_CASE("deflation: tied eigenvalues and zero components") {
  std::mt19937_64 gen(41);
  MatrixXd q = oracle::random_matrix(6, 6, gen).householderQr().householderQ();
  const VectorXd lam = (VectorXd(6) << 4, 2, 2, 2, 1, 0.5).finished();
  const spectra::EigenSystem sys{lam, q};
  const VectorXd v = oracle::random_vector(6, gen);
  const auto up = spectra::rank_one_update(sys, {0.8, v});
  const MatrixXd a = sys.reconstruct() + 0.8 * v * v.transpose();
  const auto [values, vectors] = oracle::jacobi_eigen(a);
  CHECK((up.values - values).cwiseAbs().maxCoeff() < 1e-10);
  for (Eigen::Index k = 0; k < 6; ++k) CHECK((a * up.vectors.col(k) - up.values(k) * up.vectors.col(k)).norm() < 1e-9);
  CHECK(orthogonality_error(up.vectors) < 1e-10);

  const VectorXd axis = q.col(0) + q.col(4);
  const auto partial = spectra::rank_one_update(sys, {1.0, axis});
  const MatrixXd b = sys.reconstruct() + axis * axis.transpose();
  for (Eigen::Index k = 0; k < 6; ++k)
    CHECK((b * partial.vectors.col(k) - partial.values(k) * partial.vectors.col(k)).norm() < 1e-9);
}

TEST_CASE("a chain of 100 updates tracks the accumulated matrix") {
  std::mt19937_64 gen(43);
  const MatrixXd a0 = oracle::random_symmetric(15, gen);
  auto sys = spectra::full_eig(a0);
  MatrixXd acc = a0;
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  for (int i = 0; i < 100; ++i) {
    const VectorXd v = oracle::random_vector(15, gen);
    const double rho = unif(gen);
    sys = spectra::rank_one_update(sys, {rho, v});
    acc += rho * v * v.transpose();
  }
  const auto [values, vectors] = oracle::jacobi_eigen(acc);
  CHECK((sys.values - values).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((sys.reconstruct() - acc).norm() < 1e-6 * acc.norm());
}

TEST_CASE("truncated update keeps the retained count and reports the released root") {
  std::mt19937_64 gen(47);
  const auto full = random_system(10, gen);
  spectra::EigenSystem head{full.values.head(4), full.vectors.leftCols(4)};
  const VectorXd v = oracle::random_vector(10, gen);
  const double mu = 0.0;
  const auto t = spectra::truncated_rank_one_update(head, mu, {0.4, v});
  CHECK(t.retained.size() == 4);
  CHECK(orthogonality_error(t.retained.vectors) < 1e-10);
  CHECK(t.released <= t.retained.values(3) + 1e-12);

  // With the complement exactly at mu the truncated model is exact.
  MatrixXd complement = MatrixXd::Identity(10, 10) - head.vectors * head.vectors.transpose();
  const MatrixXd model = head.reconstruct() + mu * complement + 0.4 * v * v.transpose();
  const auto [values, vectors] = oracle::jacobi_eigen(model);
  CHECK((t.retained.values - values.head(4)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(t.released == doctest::Approx(values(4)).epsilon(1e-10));
}
