#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "ofter/regress.hpp"

namespace ofter::select {

using Index = Eigen::Index;

enum class LossKind { MSE, MAE, NegPnl };
enum class CombineMode { WinnerTakeAll, LossWeighted };

std::string to_string(LossKind kind);
LossKind parse_loss(const std::string& name);  // "mse", "mae", "neg-pnl"

std::vector<double> default_s_set();
std::vector<int> default_k_set();

// Cumulative losses of the candidate bank, laid out as
// [GRNN s_0 .. s_{S-1}][kNN k_0 .. k_{K-1}][OLS].
struct ModelLedger {
  LossKind loss_kind = LossKind::MSE;
  std::vector<double> s_set;
  std::vector<int> k_set;
  Eigen::VectorXd losses;
  Index updates = 0;

  static ModelLedger create(std::vector<double> s_set, std::vector<int> k_set, LossKind kind);

  Index size() const { return losses.size(); }
  Index grnn_index(Index i) const { return i; }
  Index knn_index(Index i) const { return static_cast<Index>(s_set.size()) + i; }
  Index ols_index() const { return size() - 1; }
  double grnn_loss(Index i) const { return losses(grnn_index(i)); }
  double knn_loss(Index i) const { return losses(knn_index(i)); }
  double ols_loss() const { return losses(ols_index()); }
  std::string label(Index candidate) const;  // "grnn:s=0.5", "knn:k=3", "ols"
};

struct CombinedForecast {
  double value = 0.0;
  Eigen::VectorXd eta;
  std::vector<Index> winners;
};

CombinedForecast combine(const ModelLedger& ledger, const Eigen::VectorXd& forecasts,
                         CombineMode mode = CombineMode::WinnerTakeAll);

double loss(LossKind kind, double y_hat, double y_true, std::optional<double> actual_return = std::nullopt);

void update_losses(ModelLedger& ledger, const Eigen::VectorXd& forecasts, double y_true,
                   std::optional<double> actual_return = std::nullopt);

// Every candidate's forecast for one query; distances are computed once.
Eigen::VectorXd candidate_forecasts(const Eigen::MatrixXd& window, const Eigen::VectorXd& targets,
                                    const Eigen::VectorXd& query, const ModelLedger& ledger,
                                    const regress::FeatureWeights& weights, const regress::OlsModel& ols);

struct StepResult {
  CombinedForecast combined;
  Eigen::VectorXd forecasts;
};

StepResult step(const Eigen::MatrixXd& window, const Eigen::VectorXd& targets, const Eigen::VectorXd& query,
                const ModelLedger& ledger, const regress::FeatureWeights& weights, const regress::OlsModel& ols,
                CombineMode mode = CombineMode::WinnerTakeAll);

}  // namespace ofter::select
