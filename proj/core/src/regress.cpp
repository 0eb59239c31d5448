#include "ofter/regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ofter/error.hpp"
#include "ofter/stats.hpp"

namespace ofter::regress {

namespace {

constexpr std::string_view kModule = "regress";

void check_window(const Eigen::MatrixXd& history, const Eigen::VectorXd& targets, const Eigen::VectorXd& query,
                  const FeatureWeights& weights) {
  if (history.rows() == 0) throw Error(kModule, "empty window");
  if (targets.size() != history.rows()) throw Error(kModule, "window and targets differ in length");
  if (query.size() != history.cols() || weights.v.size() != history.cols())
    throw Error(kModule, "query, window and weights differ in dimension");
}

}  // namespace

FeatureWeights FeatureWeights::uniform(Index n) {
  if (n <= 0) throw Error(kModule, "uniform weights need at least one column");
  return {Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)), false};
}

double weighted_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const FeatureWeights& weights) {
  if (a.size() != b.size() || a.size() != weights.v.size()) throw Error(kModule, "weighted_distance: length mismatch");
  return std::sqrt((weights.v.array() * (a - b).array().square()).sum());
}

Eigen::VectorXd weighted_distances(const Eigen::MatrixXd& history, const Eigen::VectorXd& query,
                                   const FeatureWeights& weights) {
  if (query.size() != history.cols() || weights.v.size() != history.cols())
    throw Error(kModule, "weighted_distances: dimension mismatch");
  const Eigen::MatrixXd diff = history.rowwise() - query.transpose();
  return (diff.array().square().matrix() * weights.v).array().sqrt();
}

std::vector<Index> neighbour_order(const Eigen::VectorXd& distances) {
  std::vector<Index> order(static_cast<std::size_t>(distances.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return distances(a) < distances(b); });
  return order;
}

double knn_from_order(const std::vector<Index>& order, const Eigen::VectorXd& targets, Index k) {
  if (k < 1) throw Error(kModule, "k must be at least 1");
  if (k > static_cast<Index>(order.size())) throw Error(kModule, "k exceeds the window length");
  double sum = 0.0;
  for (Index i = 0; i < k; ++i) sum += targets(order[static_cast<std::size_t>(i)]);
  return sum / static_cast<double>(k);
}

double knn_forecast(const Eigen::MatrixXd& history, const Eigen::VectorXd& targets, const Eigen::VectorXd& query,
                    Index k, const FeatureWeights& weights) {
  check_window(history, targets, query, weights);
  return knn_from_order(neighbour_order(weighted_distances(history, query, weights)), targets, k);
}

double grnn_bandwidth(const Eigen::VectorXd& distances, double s) {
  if (!(s > 0.0)) throw Error(kModule, "GRNN scaling factor must be positive");
  if (distances.size() == 0) throw Error(kModule, "empty window");
  if (!distances.allFinite()) throw Error(kModule, "non-finite distances");
  double med = stats::median(std::span<const double>(distances.data(), static_cast<std::size_t>(distances.size())));
  if (med == 0.0) {
    double smallest = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < distances.size(); ++i)
      if (distances(i) > 0.0) smallest = std::min(smallest, distances(i));
    if (!std::isfinite(smallest)) return 0.0;
    med = smallest;
  }
  return med / s;
}

Eigen::VectorXd grnn_weights(const Eigen::VectorXd& distances, double s) {
  const double h = grnn_bandwidth(distances, s);
  const Index n = distances.size();
  if (h == 0.0) return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  const Eigen::ArrayXd expo = distances.array().square() / h;
  const Eigen::ArrayXd w = (-(expo - expo.minCoeff())).exp();
  return (w / w.sum()).matrix();
}

double grnn_from_distances(const Eigen::VectorXd& distances, const Eigen::VectorXd& targets, double s) {
  if (targets.size() != distances.size()) throw Error(kModule, "distances and targets differ in length");
  return grnn_weights(distances, s).dot(targets);
}

double grnn_forecast(const Eigen::MatrixXd& history, const Eigen::VectorXd& targets, const Eigen::VectorXd& query,
                     double s, const FeatureWeights& weights) {
  check_window(history, targets, query, weights);
  return grnn_from_distances(weighted_distances(history, query, weights), targets, s);
}

double OlsModel::predict(const Eigen::VectorXd& x) const {
  if (x.size() != beta.size()) throw Error(kModule, "OLS predict: dimension mismatch");
  return beta0 + beta.dot(x);
}

double ols_predict(const OlsModel& model, const Eigen::VectorXd& x) { return model.predict(x); }

OlsModel ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, bool* used_ridge) {
  if (X.rows() != y.size()) throw Error(kModule, "OLS: rows and targets differ");
  if (X.rows() < 2) throw Error(kModule, "OLS needs at least two rows");
  if (!X.allFinite() || !y.allFinite()) throw Error(kModule, "OLS: non-finite input");
  const Eigen::RowVectorXd xm = X.colwise().mean();
  const double ym = y.mean();
  const Eigen::MatrixXd Xc = X.rowwise() - xm;
  const Eigen::VectorXd yc = y.array() - ym;

  OlsModel out;
  if (used_ridge) *used_ridge = false;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xc);
  const double scale = std::max(1.0, Xc.cwiseAbs().maxCoeff());
  qr.setThreshold(1e-10);
  if (X.cols() == 0) {
    out.beta = Eigen::VectorXd(0);
  } else if (X.rows() > X.cols() && qr.rank() == X.cols()) {
    out.beta = qr.solve(yc);
  } else {
    if (used_ridge) *used_ridge = true;
    else warn(kModule, "rank-deficient OLS design; using a 1e-8 ridge");
    Eigen::MatrixXd gram = Xc.transpose() * Xc;
    gram.diagonal().array() += 1e-8 * std::max(gram.trace() / static_cast<double>(X.cols()), scale * 1e-12);
    out.beta = gram.ldlt().solve(Xc.transpose() * yc);
  }
  out.beta0 = ym - xm.dot(out.beta);
  return out;
}

}  // namespace ofter::regress
