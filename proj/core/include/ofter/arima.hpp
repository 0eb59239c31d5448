#pragma once

#include <Eigen/Dense>
#include <vector>

namespace ofter::arima {

using Index = Eigen::Index;

struct AdfResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int lags = 0;
};

// Augmented Dickey-Fuller regression with intercept. A negative max_lag uses
// floor(12 (T/100)^(1/4)) lagged differences.
AdfResult adf_test(const Eigen::VectorXd& y, int max_lag = -1);

// MacKinnon (1994/2010) approximate p-value for the constant-only tau statistic.
double mackinnon_pvalue(double tau);

Eigen::VectorXd difference(const Eigen::VectorXd& y);

struct Differenced {
  Eigen::VectorXd series;
  int r = 0;
  bool stationary = true;        // false when r_max was hit without rejection
  std::vector<double> initial;   // first value at each level, for re-integration
};

Differenced difference_until_stationary(const Eigen::VectorXd& y, double p_adf, int r_max = 2);
Eigen::VectorXd integrate(const Eigen::VectorXd& series, const std::vector<double>& initial);

struct AcfPacf {
  Eigen::VectorXd acf;   // lags 0..max_lag
  Eigen::VectorXd pacf;  // lags 0..max_lag, pacf(0) = 1
  std::vector<bool> significant;  // lags 0..max_lag; lag 0 is never flagged
  double band = 0.0;

  bool any_significant() const;
};

AcfPacf acf_pacf(const Eigen::VectorXd& y, int max_lag, double significance = 0.001);

struct ArimaSpec {
  int p = 0;
  int r = 0;
  int q = 0;
  Eigen::VectorXd ar_coeffs;
  Eigen::VectorXd ma_coeffs;
  double intercept = 0.0;
  double aic = 0.0;
};

struct Decomposition {
  Eigen::VectorXd y_ts;      // one-step-ahead predictions
  Eigen::VectorXd residual;  // y - y_ts
};

struct ArimaOptions {
  double p_adf = 0.05;
  int max_p = 3;
  int max_q = 3;
  int r_max = 2;
  int acf_lags = 10;
  double significance = 0.001;
};

struct ArimaResult {
  ArimaSpec spec;
  Decomposition decomposition;
  bool stationary = true;
};

// Selects and fits on y[0:fit_length) (all of y when fit_length < 0) and
// decomposes the whole series with causal one-step predictions.
ArimaResult select_and_decompose(const Eigen::VectorXd& y, const ArimaOptions& options = {}, Index fit_length = -1);

// Causal one-step predictions of y under `spec`: entry t > 0 uses y[0:t) only.
// With differencing the first entry has no history and echoes y[0].
Eigen::VectorXd one_step_predictions(const ArimaSpec& spec, const Eigen::VectorXd& y);

}  // namespace ofter::arima
