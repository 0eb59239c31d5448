#include "ofter/analyze.hpp"

#include <cmath>
#include <limits>

#include "ofter/error.hpp"
#include "ofter/stats.hpp"

namespace ofter::analyze {

namespace {

constexpr std::string_view kModule = "analyze";

}  // namespace

ImportanceReport feature_importance(const Eigen::MatrixXd& U, const Eigen::VectorXd& v,
                                    const std::vector<Index>& augmented, std::vector<std::string> labels) {
  const Index d = U.rows(), p = U.cols();
  if (v.size() != p + static_cast<Index>(augmented.size()))
    throw Error(kModule, "weights length " + std::to_string(v.size()) + " does not match " + std::to_string(p) +
                             " components plus " + std::to_string(augmented.size()) + " augmented columns");
  if (!labels.empty() && static_cast<Index>(labels.size()) != d) throw Error(kModule, "label count does not match U");
  Eigen::VectorXd v2 = Eigen::VectorXd::Zero(d);
  for (std::size_t j = 0; j < augmented.size(); ++j) {
    const Index col = augmented[j];
    if (col < 0 || col >= d) throw Error(kModule, "augmented column index out of range");
    v2(col) += v(p + static_cast<Index>(j));
  }
  const Eigen::VectorXd inner = (U.transpose() * Eigen::VectorXd::Ones(d)).cwiseProduct(v.head(p));
  ImportanceReport out;
  out.importance = (2.0 * (U * inner + v2)).cwiseAbs();
  if (labels.empty())
    for (Index j = 0; j < d; ++j) labels.push_back("x" + std::to_string(j));
  out.labels = std::move(labels);
  return out;
}

ImportanceReport feature_importance(const pipeline::PipelineState& state) {
  std::vector<Index> active;
  for (std::size_t j = 0; j < state.active.size(); ++j)
    if (state.active[j]) active.push_back(static_cast<Index>(j));
  const Index a = static_cast<Index>(active.size());
  ImportanceReport inner;
  if (state.embedding) {
    inner = feature_importance(state.embedding->spectrum.vectors.leftCols(state.embedding->p), state.weights.v,
                               state.augmented);
  } else {
    inner = feature_importance(Eigen::MatrixXd::Identity(a, a), state.weights.v, {});
  }
  ImportanceReport out;
  out.importance = Eigen::VectorXd::Zero(static_cast<Index>(state.active.size()));
  for (Index j = 0; j < a; ++j) out.importance(active[static_cast<std::size_t>(j)]) = inner.importance(j);
  out.labels = state.input_columns;
  return out;
}

bool outlier_rule(double d, const std::vector<double>& trailing, double kappa) {
  if (trailing.size() < 2) return false;
  const double q1 = stats::quantile(trailing, 0.25);
  const double q3 = stats::quantile(trailing, 0.75);
  return d > q3 + kappa * (q3 - q1);
}

OutlierReport detect_outliers(const Eigen::MatrixXd& history, const regress::FeatureWeights& weights,
                              const OutlierOptions& options) {
  const Index n = history.rows(), L = options.lookback;
  if (L < 1) throw Error(kModule, "lookback must be positive");
  if (!(options.kappa >= 0.0)) throw Error(kModule, "kappa must be non-negative");
  if (n <= L + 1)
    throw Error(kModule, "history of " + std::to_string(n) + " rows is too short; at least " + std::to_string(L + 2) +
                             " rows are needed for lookback " + std::to_string(L));
  if (weights.v.size() != history.cols()) throw Error(kModule, "weights do not match the history width");

  OutlierReport out;
  out.kappa = options.kappa;
  out.lookback = L;
  out.d_min = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
  out.flags.assign(static_cast<std::size_t>(n), false);
  for (Index t = L; t < n; ++t) {
    const Eigen::VectorXd d = regress::weighted_distances(history.middleRows(t - L, L), history.row(t).transpose(), weights);
    out.d_min(t) = options.mean_distance ? d.mean() : d.minCoeff();
  }
  std::vector<double> trailing;
  for (Index t = L; t < n; ++t) {
    trailing.clear();
    for (Index s = t - L; s < t; ++s)
      if (!std::isnan(out.d_min(s))) trailing.push_back(out.d_min(s));
    out.flags[static_cast<std::size_t>(t)] = outlier_rule(out.d_min(t), trailing, options.kappa);
  }
  return out;
}

}  // namespace ofter::analyze
