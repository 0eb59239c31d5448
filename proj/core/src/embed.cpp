#include "ofter/embed.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ofter/error.hpp"
#include "ofter/stats.hpp"

namespace ofter::embed {

namespace {

constexpr std::string_view kModule = "embed";

// Keeps each updated eigenvector on the same side as its predecessor so that
// coordinates projected at different times stay comparable.
void align_signs(spectra::EigenSystem& updated, const Eigen::MatrixXd& previous) {
  for (Index k = 0; k < updated.vectors.cols() && k < previous.cols(); ++k)
    if (updated.vectors.col(k).dot(previous.col(k)) < 0.0) updated.vectors.col(k) *= -1.0;
}

void truncated_step(EmbeddingState& state, double rho, const Eigen::VectorXd& v,
                    const spectra::SecularOptions& options) {
  if (rho == 0.0 || v.squaredNorm() == 0.0) return;
  const Eigen::MatrixXd previous = state.spectrum.vectors;
  auto result = spectra::truncated_rank_one_update(state.spectrum, state.mu(), {rho, v}, options);
  align_signs(result.retained, previous);
  state.spectrum = std::move(result.retained);
}

}  // namespace

double EmbeddingState::mu() const {
  if (tail.size() == 0) return 0.0;
  return stats::median(std::span<const double>(tail.data(), static_cast<std::size_t>(tail.size())));
}

Index retained_dimension(const Eigen::VectorXd& eigenvalues, double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw Error(kModule, "delta must lie in (0, 1]");
  if (eigenvalues.size() == 0) throw Error(kModule, "empty spectrum");
  const double total = eigenvalues.sum();
  if (!(total > 0.0)) throw Error(kModule, "spectrum has no positive variance");
  double cumulative = 0.0;
  for (Index i = 0; i < eigenvalues.size(); ++i) {
    cumulative += eigenvalues(i);
    if (cumulative / total >= delta - 1e-14) return i + 1;
  }
  return eigenvalues.size();
}

EmbeddingState fit_pca(const Eigen::MatrixXd& rows, const Eigen::VectorXd& scale, double delta, Index guard) {
  const Index n = rows.rows(), d = rows.cols();
  if (scale.size() != d) throw Error(kModule, "scale vector has the wrong dimension");
  if ((scale.array() <= 0.0).any()) throw Error(kModule, "scale entries must be positive");
  if (n < 2 || n < d) throw Error(kModule, "need at least as many rows as columns to fit PCA");
  if (!rows.allFinite()) throw Error(kModule, "fit_pca: non-finite input");

  EmbeddingState state;
  state.delta = delta;
  state.scale = scale;
  state.mean = rows.colwise().mean().transpose();
  const Eigen::MatrixXd centred = (rows.rowwise() - state.mean.transpose()).array().rowwise() / scale.transpose().array();
  const Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(n);
  auto full = spectra::full_eig(cov);
  const double top = std::max(full.values(0), 0.0);
  if (full.values(d - 1) <= 1e-12 * top) throw Error(kModule, "fit_pca: input is rank deficient; prune it first");

  state.p = retained_dimension(full.values, delta);
  state.t = static_cast<double>(n);
  state.trace = cov.trace();
  const Index k = guard < 0 ? d : std::min(d, state.p + guard);
  state.tail = full.values.tail(d - k);
  state.spectrum.values = full.values.head(k);
  state.spectrum.vectors = full.vectors.leftCols(k);
  return state;
}

EmbeddingState fit_pca(const frame::TimePanel& standardized, double delta, Index guard) {
  return fit_pca(standardized.values, Eigen::VectorXd::Ones(standardized.cols()), delta, guard);
}

Eigen::VectorXd project(const EmbeddingState& state, const Eigen::VectorXd& x) {
  if (x.size() != state.dim()) throw Error(kModule, "project: dimension mismatch");
  if (!x.allFinite()) throw Error(kModule, "project: non-finite input");
  return state.spectrum.vectors.leftCols(state.p).transpose() * ((x - state.mean).array() / state.scale.array()).matrix();
}

Eigen::MatrixXd project_rows(const EmbeddingState& state, const Eigen::MatrixXd& rows) {
  if (rows.cols() != state.dim()) throw Error(kModule, "project: dimension mismatch");
  const Eigen::MatrixXd z = (rows.rowwise() - state.mean.transpose()).array().rowwise() / state.scale.transpose().array();
  return z * state.spectrum.vectors.leftCols(state.p);
}

std::pair<double, double> recentering_rhos(double t) {
  const double root = std::sqrt(t * t + 4.0);
  // rho_1 = (t - root) / 2 computed as -2 / (t + root) to avoid cancellation.
  return {-2.0 / (t + root), 0.5 * (t + root)};
}

EmbeddingState online_update(EmbeddingState state, const Eigen::VectorXd& x_new, const spectra::SecularOptions& options) {
  if (x_new.size() != state.dim()) throw Error(kModule, "online_update: dimension mismatch");
  if (!x_new.allFinite()) throw Error(kModule, "online_update: non-finite observation");
  if (state.t < 1.0) throw Error(kModule, "online_update: state has not been fitted");

  const double t = state.t + 1.0;
  const Eigen::VectorXd s = ((x_new - state.mean).array() / state.scale.array()).matrix();
  const double shrink = (t - 1.0) / t;
  state.spectrum.values *= shrink;
  state.tail *= shrink;
  state.trace *= shrink;

  // Scatter of the points centred at the old mean, divided by t.
  truncated_step(state, 1.0 / t, s, options);
  state.trace += s.squaredNorm() / t;

  // Streaming mean; delta is the shift in standardized units.
  state.mean += (x_new - state.mean) / t;
  const Eigen::VectorXd delta = -s / t;

  const auto [rho1, rho2] = recentering_rhos(t);
  for (const double rho : {rho1, rho2}) {
    const Eigen::VectorXd b = (rho * delta + s) / std::sqrt(1.0 + rho * rho);
    truncated_step(state, rho / t, b, options);
    state.trace += rho * b.squaredNorm() / t;
  }
  state.t = t;
  return state;
}

}  // namespace ofter::embed
