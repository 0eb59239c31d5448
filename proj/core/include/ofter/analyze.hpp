#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ofter/pipeline.hpp"
#include "ofter/regress.hpp"

namespace ofter::analyze {

using Index = Eigen::Index;

struct ImportanceReport {
  Eigen::VectorXd importance;  // one entry per original feature, >= 0
  std::vector<std::string> labels;
};

// 2 |U[(U^T 1) .* v_embed] + v2| where v_embed is the leading U.cols() slice of
// v and v2 places the remaining weights on the original columns in `augmented`.
ImportanceReport feature_importance(const Eigen::MatrixXd& U, const Eigen::VectorXd& v,
                                    const std::vector<Index>& augmented, std::vector<std::string> labels = {});

// Importance over the input columns of a fitted pipeline; pruned columns score 0.
// Without an embedding U is the identity on the active columns.
ImportanceReport feature_importance(const pipeline::PipelineState& state);

struct OutlierOptions {
  Index lookback = 600;
  double kappa = 5.0;
  bool mean_distance = false;  // average instead of minimum distance to the window
};

struct OutlierReport {
  Eigen::VectorXd d_min;   // NaN before the first full window
  std::vector<bool> flags;
  double kappa = 0.0;
  Index lookback = 0;
};

// True when d exceeds q3 + kappa (q3 - q1) of the trailing values (type-7 quartiles).
bool outlier_rule(double d, const std::vector<double>& trailing, double kappa);

// Scans every row of `history` against its L predecessors.
OutlierReport detect_outliers(const Eigen::MatrixXd& history, const regress::FeatureWeights& weights,
                              const OutlierOptions& options = {});

}  // namespace ofter::analyze
