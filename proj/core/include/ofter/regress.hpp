#pragma once

#include <Eigen/Dense>
#include <vector>

namespace ofter::regress {

using Index = Eigen::Index;

// Non-negative weights over the embedded columns summing to one, or all zero
// when every column was thresholded away.
struct FeatureWeights {
  Eigen::VectorXd v;
  bool degenerate = false;

  static FeatureWeights uniform(Index n);
};

double weighted_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const FeatureWeights& weights);

// Distance from `query` to every row of `history`.
Eigen::VectorXd weighted_distances(const Eigen::MatrixXd& history, const Eigen::VectorXd& query,
                                   const FeatureWeights& weights);

// Row order by increasing distance, ties by earlier row.
std::vector<Index> neighbour_order(const Eigen::VectorXd& distances);

double knn_forecast(const Eigen::MatrixXd& history, const Eigen::VectorXd& targets, const Eigen::VectorXd& query,
                    Index k, const FeatureWeights& weights);
double knn_from_order(const std::vector<Index>& order, const Eigen::VectorXd& targets, Index k);

// h = median(d) / s, falling back to the smallest positive distance when the
// median is zero. Returns 0 when every distance is zero.
double grnn_bandwidth(const Eigen::VectorXd& distances, double s);

double grnn_forecast(const Eigen::MatrixXd& history, const Eigen::VectorXd& targets, const Eigen::VectorXd& query,
                     double s, const FeatureWeights& weights);
double grnn_from_distances(const Eigen::VectorXd& distances, const Eigen::VectorXd& targets, double s);
// Normalised kernel weights exp(-d^2 / h), shifted by the smallest exponent.
Eigen::VectorXd grnn_weights(const Eigen::VectorXd& distances, double s);

struct OlsModel {
  double beta0 = 0.0;
  Eigen::VectorXd beta;

  double predict(const Eigen::VectorXd& x) const;
};

// Least squares with intercept; falls back to a 1e-8 ridge when the centred
// design is rank deficient. The fallback is reported through `used_ridge`
// when given, otherwise as a warning.
OlsModel ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, bool* used_ridge = nullptr);
double ols_predict(const OlsModel& model, const Eigen::VectorXd& x);

}  // namespace ofter::regress
