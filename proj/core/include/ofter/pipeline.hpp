#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ofter/arima.hpp"
#include "ofter/embed.hpp"
#include "ofter/frame.hpp"
#include "ofter/regress.hpp"
#include "ofter/select.hpp"

namespace ofter::pipeline {

using Index = Eigen::Index;

enum class EmbeddingUpdate { Online, Refit, Frozen };

std::string to_string(EmbeddingUpdate mode);
EmbeddingUpdate parse_embedding_update(const std::string& name);

struct OfterConfig {
  bool use_dr = true;
  bool use_ft = true;
  double delta = 0.9;
  double l0_fraction = 0.7;
  Index lookback = 800;
  double c_min = 0.05;
  double c_original = 0.05;
  std::vector<double> s_set = select::default_s_set();
  std::vector<int> k_set = select::default_k_set();
  double p_adf = 0.05;
  select::LossKind loss_kind = select::LossKind::MSE;
  select::CombineMode combine = select::CombineMode::WinnerTakeAll;
  int ols_refit_period = 100;
  int bernstein_k = 4;
  int max_lag = 3;
  std::uint64_t seed = 0;

  EmbeddingUpdate embedding_update = EmbeddingUpdate::Online;
  int embedding_refit_period = 100;
  Index embedding_guard = -1;  // extra tracked directions; negative tracks all
  bool refit_scale = false;    // re-standardize at each OLS refit boundary
  int arima_max_p = 3;
  int arima_max_q = 3;
  int arima_acf_lags = 10;
  double arima_significance = 0.001;
  double prune_eps = 1e-8;
  bool warm_start = true;

  void validate() const;
};

// "plain", "dr", "ft", "dr-ft".
void apply_variant(OfterConfig& config, const std::string& variant);
std::string variant_name(const OfterConfig& config);

struct ForecastRecord {
  Index t = 0;
  double y_hat = 0.0;
  double y_hat_residual = 0.0;
  double y_ts = 0.0;
  double y_true = 0.0;
  std::vector<std::string> winners;
  Eigen::VectorXd candidates;  // filled only when requested
  std::string diagnostic;
};

struct PipelineState {
  OfterConfig config;
  Index l0 = 0;
  Index t = 0;  // next row to forecast

  arima::ArimaResult arima;
  Eigen::VectorXd y;       // original target
  Eigen::VectorXd target;  // residual target

  std::vector<std::string> input_columns;
  std::vector<bool> active;              // input columns kept after pruning
  frame::StandardizationState standardization;  // over the active columns
  std::optional<embed::EmbeddingState> embedding;
  std::vector<Index> augmented;          // active-column indices appended after the embedding
  Eigen::VectorXd scores;                // c_j per embedded+augmented column
  regress::FeatureWeights weights;
  select::ModelLedger ledger;
  regress::OlsModel ols;

  Eigen::MatrixXd history;  // embedded+augmented rows, filled up to t
  Index width() const { return history.cols(); }
  std::vector<std::string> feature_labels() const;
};

// I^Original: active standardized columns whose score against y on the
// training window reaches c_original (OSMC when use_ft, else |Pearson|).
std::vector<Index> select_original_features(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Index l0,
                                            double c_original, bool use_ft, int bernstein_k = 4);

struct WeightResult {
  regress::FeatureWeights weights;
  Eigen::VectorXd scores;
};

// v_j = c_j^2 1(|c_j| >= c_min) / sum_l c_l^2 1(|c_l| >= c_min).
WeightResult compute_feature_weights(const Eigen::MatrixXd& X_tilde, const Eigen::VectorXd& y, Index l0, double c_min,
                                     bool use_ft, int bernstein_k = 4);
regress::FeatureWeights weights_from_scores(const Eigen::VectorXd& scores, double c_min);

// Row i of X holds the features available when y(i) is forecast.
PipelineState initialize(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const OfterConfig& config,
                         std::vector<std::string> columns = {});

struct RunOptions {
  bool record_candidates = false;
  Index stop = -1;  // exclusive end row; negative runs to the end
};

// Forecasts rows state.t .. end, advancing the state in place.
std::vector<ForecastRecord> advance(PipelineState& state, const Eigen::MatrixXd& X, const RunOptions& options = {});

std::vector<ForecastRecord> run(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const OfterConfig& config,
                                PipelineState* final_state = nullptr, const RunOptions& options = {});

// Pairs the lag-0..max_lag features at row tau with the target at tau + 1.
struct Aligned {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> columns;
  std::vector<std::string> index;  // time label of each target
};
Aligned align_one_step(const frame::TimePanel& panel, const std::string& target, int max_lag);

}  // namespace ofter::pipeline
