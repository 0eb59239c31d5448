#pragma once

#include <Eigen/Dense>
#include <vector>

namespace ofter::metrics {

using Index = Eigen::Index;

// R_d = (P_{d+k} - P_d) / P_d; the result has n - k entries.
Eigen::VectorXd simple_returns(const Eigen::VectorXd& prices, int k = 1);
Eigen::VectorXd excess_returns(const Eigen::VectorXd& returns, const Eigen::VectorXd& benchmark);
// (log V_{t+k} - log V_t) / log V_t.
Eigen::VectorXd log_volume_returns(const Eigen::VectorXd& volumes, int k = 1);

struct ForecastQuality {
  double pearson = 0.0;
  double mse = 0.0;
  double mae = 0.0;
};

ForecastQuality forecast_quality(const Eigen::VectorXd& y_hat, const Eigen::VectorXd& y);

struct StrategyResult {
  int quantile = 1;             // Q1 (all names) .. Q5 (top fifth by |signal|)
  Eigen::VectorXd pnl;          // one entry per day
  double sr = 0.0;              // annualized
  double ppd = 0.0;
  double p_value = 1.0;
  std::vector<Index> empty_days;  // days with no position after filtering
};

// Names held on a day: the ceil((6 - q) N_t / 5) largest |signal| among the
// finite entries of `signals`, ties broken by column order.
std::vector<Index> quantile_members(const Eigen::VectorXd& signals, int quantile);

// signals and returns are days x instruments; a NaN signal marks an instrument
// absent that day. Daily P&L is the mean of sign(signal) * return over the held names.
StrategyResult evaluate_strategy(const Eigen::MatrixXd& signals, const Eigen::MatrixXd& returns, int quantile);

double sharpe_ratio(const Eigen::VectorXd& pnl);

// One-tailed probabilistic Sharpe ratio against zero, adjusted for sample
// skewness and kurtosis of the daily P&L. An approximation of the SR test.
double sharpe_p_value(const Eigen::VectorXd& pnl);

}  // namespace ofter::metrics
