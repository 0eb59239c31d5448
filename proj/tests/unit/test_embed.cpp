#include <doctest.h>

#include "ofter/datagen.hpp"
#include "ofter/embed.hpp"
#include "ofter/error.hpp"
#include "oracles.hpp"

using namespace ofter;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd standardized_lagged(datagen::Model model, std::uint64_t seed, Eigen::Index t_len) {
  datagen::SyntheticSpec spec;
  spec.model = model;
  spec.t_len = t_len;
  spec.seed = seed;
  const auto lagged = frame::build_lagged_features(datagen::generate(spec), 3);
  return frame::standardize(lagged, {0, lagged.rows()}).panel.values;
}

// Energy fraction from the singular values of the centred data.
Eigen::Index svd_dimension(const MatrixXd& rows, double delta) {
  const MatrixXd c = rows.rowwise() - rows.colwise().mean();
  Eigen::JacobiSVD<MatrixXd> svd(c);
  const VectorXd e = svd.singularValues().array().square();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    acc += e(i);
    if (acc / e.sum() >= delta - 1e-14) return i + 1;
  }
  return e.size();
}

}  // namespace

TEST_CASE("retained dimension") {
  const VectorXd spectrum = (VectorXd(4) << 4, 3, 2, 1).finished();
  CHECK(embed::retained_dimension(spectrum, 0.9) == 3);
  CHECK(embed::retained_dimension(spectrum, 0.4) == 1);
  CHECK(embed::retained_dimension(spectrum, 1.0 - 1e-12) == 4);
}

TEST_CASE("fit_pca agrees with an SVD oracle on M1") {
  const MatrixXd x = standardized_lagged(datagen::Model::M1, 4, 2000);
  const auto state = embed::fit_pca(x, VectorXd::Ones(20), 0.9);
  CHECK(state.p == svd_dimension(x, 0.9));
  const MatrixXd c = x.rowwise() - x.colwise().mean();
  Eigen::JacobiSVD<MatrixXd> svd(c, Eigen::ComputeThinV);
  const VectorXd lam = svd.singularValues().array().square() / static_cast<double>(x.rows());
  CHECK((state.spectrum.values - lam).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(oracle::max_principal_angle(state.spectrum.vectors.leftCols(state.p), svd.matrixV().leftCols(state.p)) < 1e-8);

  const auto all = embed::fit_pca(x, VectorXd::Ones(20), 1.0 - 1e-12);
  CHECK(all.p == 20);

  MatrixXd deficient(100, 3);
  deficient.leftCols(2) = x.topLeftCorner(100, 2);
  deficient.col(2) = deficient.col(0) + deficient.col(1);
  CHECK_THROWS_AS(embed::fit_pca(deficient, VectorXd::Ones(3), 0.9), Error);
  CHECK_THROWS_AS(embed::fit_pca(x.topRows(10), VectorXd::Ones(20), 0.9), Error);
}

TEST_CASE("projection") {
  std::mt19937_64 gen(1);
  const MatrixXd x = oracle::random_matrix(200, 6, gen);
  const auto state = embed::fit_pca(x, VectorXd::Ones(6), 0.7);
  CHECK(embed::project(state, state.mean).cwiseAbs().maxCoeff() < 1e-15);
  const VectorXd q = oracle::random_vector(6, gen);
  const VectorXd direct = state.spectrum.vectors.leftCols(state.p).transpose() * (q - state.mean);
  CHECK((embed::project(state, q) - direct).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((embed::project_rows(state, x.topRows(3)).row(1).transpose() - embed::project(state, x.row(1).transpose()))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  CHECK_THROWS_AS(embed::project(state, VectorXd::Ones(5)), Error);

  embed::EmbeddingState axes;
  axes.spectrum.values = (VectorXd(3) << 3, 2, 1).finished();
  axes.spectrum.vectors = MatrixXd::Identity(3, 3);
  axes.mean = VectorXd::Zero(3);
  axes.scale = VectorXd::Constant(3, 2.0);
  axes.p = 2;
  const VectorXd pt = (VectorXd(3) << 4, 6, 8).finished();
  CHECK(embed::project(axes, pt) == (VectorXd(2) << 2, 3).finished());
}

TEST_CASE("re-centring constants") {
  for (double t : {1.0, 3.0, 10.0, 1e6}) {
    const auto [r1, r2] = embed::recentering_rhos(t);
    CHECK(r1 + r2 == doctest::Approx(t).epsilon(1e-14));
    CHECK(r1 * r2 == doctest::Approx(-1.0).epsilon(1e-12));
  }
  CHECK(embed::recentering_rhos(3.0).second == doctest::Approx((3 + std::sqrt(13.0)) / 2));
}

TEST_CASE("an observation at the mean only rescales the spectrum") {
  std::mt19937_64 gen(2);
  const MatrixXd x = oracle::random_matrix(100, 5, gen);
  const auto state = embed::fit_pca(x, VectorXd::Ones(5), 0.8);
  const auto next = embed::online_update(state, state.mean);
  CHECK((next.mean - state.mean).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((next.spectrum.values - state.spectrum.values * (100.0 / 101.0)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(next.t == 101.0);
}

TEST_CASE("online updates track the batch covariance") {
  const MatrixXd x = standardized_lagged(datagen::Model::M3, 9, 1100);
  const Eigen::Index n0 = 700;
  auto state = embed::fit_pca(x.topRows(n0), VectorXd::Ones(20), 0.9);
  for (Eigen::Index i = n0; i < 1000; ++i) {
    state = embed::online_update(std::move(state), x.row(i).transpose());
    CHECK(state.spectrum.values.head(state.p).sum() <= state.trace + 1e-8);
  }
  const auto batch = embed::fit_pca(x.topRows(1000), VectorXd::Ones(20), 0.9);
  const Eigen::Index p = state.p;
  const VectorXd rel = (state.spectrum.values.head(p) - batch.spectrum.values.head(p)).cwiseQuotient(batch.spectrum.values.head(p));
  CHECK(rel.cwiseAbs().maxCoeff() < 1e-5);
  CHECK(oracle::max_principal_angle(state.spectrum.vectors.leftCols(p), batch.spectrum.vectors.leftCols(p)) < 1e-4);
  CHECK((state.mean - x.topRows(1000).colwise().mean().transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(state.trace == doctest::Approx(batch.trace).epsilon(1e-10));
}

TEST_CASE("strict truncation keeps p pairs and a tail level") {
  const MatrixXd x = standardized_lagged(datagen::Model::M3, 10, 900);
  auto state = embed::fit_pca(x.topRows(600), VectorXd::Ones(20), 0.9, 0);
  const Eigen::Index p = state.p;
  CHECK(state.tracked() == p);
  CHECK(state.tail.size() == 20 - p);
  for (Eigen::Index i = 600; i < 650; ++i) state = embed::online_update(std::move(state), x.row(i).transpose());
  CHECK(state.tracked() == p);
  const MatrixXd u = state.spectrum.vectors;
  CHECK((u.transpose() * u - MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("updates are deterministic") {
  const MatrixXd x = standardized_lagged(datagen::Model::M1, 12, 400);
  auto a = embed::fit_pca(x.topRows(300), VectorXd::Ones(20), 0.9);
  auto b = a;
  for (Eigen::Index i = 300; i < 330; ++i) {
    a = embed::online_update(std::move(a), x.row(i).transpose());
    b = embed::online_update(std::move(b), x.row(i).transpose());
  }
  CHECK(a.spectrum.vectors == b.spectrum.vectors);
  CHECK(a.spectrum.values == b.spectrum.values);
}
