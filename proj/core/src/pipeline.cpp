#include "ofter/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ofter/error.hpp"
#include "ofter/maxcorr.hpp"
#include "ofter/stats.hpp"

namespace ofter::pipeline {

namespace {

constexpr std::string_view kModule = "pipeline";

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

bool is_constant(const Eigen::VectorXd& v) { return v.size() == 0 || v.maxCoeff() == v.minCoeff(); }

double score(const Eigen::VectorXd& x, const Eigen::VectorXd& y, bool use_ft, int bernstein_k) {
  if (is_constant(x) || is_constant(y)) return 0.0;
  if (use_ft) return maxcorr::osmc(x, y, bernstein_k);
  return std::abs(stats::pearson(as_span(x), as_span(y)));
}

std::vector<Index> active_indices(const std::vector<bool>& active) {
  std::vector<Index> out;
  for (std::size_t j = 0; j < active.size(); ++j)
    if (active[j]) out.push_back(static_cast<Index>(j));
  return out;
}

Eigen::MatrixXd take_columns(const Eigen::MatrixXd& X, const std::vector<Index>& cols) {
  Eigen::MatrixXd out(X.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Index>(j)) = X.col(cols[j]);
  return out;
}

Eigen::VectorXd standardized_row(const PipelineState& state, const Eigen::MatrixXd& X, Index i) {
  const auto cols = active_indices(state.active);
  Eigen::VectorXd x(static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) x(static_cast<Index>(j)) = X(i, cols[j]);
  return state.standardization.apply(x);
}

Eigen::VectorXd embed_row(const PipelineState& state, const Eigen::VectorXd& xs) {
  if (!state.embedding) return xs;
  const Index p = state.embedding->p;
  Eigen::VectorXd out(p + static_cast<Index>(state.augmented.size()));
  out.head(p) = embed::project(*state.embedding, xs);
  for (std::size_t j = 0; j < state.augmented.size(); ++j) out(p + static_cast<Index>(j)) = xs(state.augmented[j]);
  return out;
}

Eigen::VectorXd recomposed(const PipelineState& state, const Eigen::VectorXd& forecasts, Index i) {
  return forecasts.array() + state.arima.decomposition.y_ts(i);
}

void record_loss(PipelineState& state, const Eigen::VectorXd& forecasts, Index i) {
  if (state.ledger.loss_kind == select::LossKind::NegPnl)
    select::update_losses(state.ledger, recomposed(state, forecasts, i), state.y(i), state.y(i));
  else
    select::update_losses(state.ledger, forecasts, state.target(i));
}

regress::OlsModel fit_ols_rows(const PipelineState& state, Index begin, Index end) {
  bool ridge = false;
  return regress::ols_fit(state.history.middleRows(begin, end - begin), state.target.segment(begin, end - begin), &ridge);
}

// Pseudo-out-of-sample pass over the training segment: each row is forecast
// from its trailing window only, with a trailing OLS refreshed on the refit cadence.
void warm_start(PipelineState& state) {
  const auto& cfg = state.config;
  const Index max_k = *std::max_element(cfg.k_set.begin(), cfg.k_set.end());
  const Index first = std::max<Index>(max_k, 2 * (state.width() + 1));
  if (first >= state.l0) {
    warn(kModule, "training window too short for a ledger warm start");
    return;
  }
  regress::OlsModel ols = fit_ols_rows(state, std::max<Index>(0, first - cfg.lookback), first);
  for (Index i = first; i < state.l0; ++i) {
    if (i != first && i % cfg.ols_refit_period == 0)
      ols = fit_ols_rows(state, std::max<Index>(0, i - cfg.lookback), i);
    const Index begin = std::max<Index>(0, i - cfg.lookback);
    const Eigen::VectorXd f = select::candidate_forecasts(state.history.middleRows(begin, i - begin),
                                                          state.target.segment(begin, i - begin),
                                                          state.history.row(i).transpose(), state.ledger,
                                                          state.weights, ols);
    record_loss(state, f, i);
  }
}

void refit_embedding(PipelineState& state, const Eigen::MatrixXd& X, Index end) {
  Eigen::MatrixXd rows(end, state.embedding->dim());
  for (Index i = 0; i < end; ++i) rows.row(i) = standardized_row(state, X, i).transpose();
  const auto& old = *state.embedding;
  auto fresh = embed::fit_pca(rows, Eigen::VectorXd::Ones(rows.cols()), old.delta, state.config.embedding_guard);
  if (fresh.tracked() < old.p) {
    fresh = embed::fit_pca(rows, Eigen::VectorXd::Ones(rows.cols()), old.delta, old.p);
  }
  fresh.p = old.p;
  for (Index k = 0; k < old.p; ++k)
    if (fresh.spectrum.vectors.col(k).dot(old.spectrum.vectors.col(k)) < 0.0) fresh.spectrum.vectors.col(k) *= -1.0;
  state.embedding = std::move(fresh);
  const Index p = state.embedding->p;
  state.history.topLeftCorner(end, p) = embed::project_rows(*state.embedding, rows);
}

// Re-estimates the column scales on rows [0, end) and carries the embedding
// covariance into the new coordinates.
void refit_scale(PipelineState& state, const Eigen::MatrixXd& X, Index end) {
  const auto cols = active_indices(state.active);
  const Eigen::MatrixXd raw = take_columns(X.topRows(end), cols);
  Eigen::VectorXd scale(raw.cols());
  for (Index j = 0; j < raw.cols(); ++j) {
    const double sd = stats::sample_sd(as_span(Eigen::VectorXd(raw.col(j))));
    scale(j) = sd > 0.0 ? sd : state.standardization.scale(j);
  }
  const Eigen::VectorXd ratio = state.standardization.scale.cwiseQuotient(scale);
  state.standardization.scale = scale;
  if (!state.embedding) return;
  auto& emb = *state.embedding;
  const Index d = emb.dim();
  // Covariance implied by the tracked pairs, with the level mu on the complement.
  const Eigen::MatrixXd& U = emb.spectrum.vectors;
  Eigen::MatrixXd cov = U * emb.spectrum.values.asDiagonal() * U.transpose();
  if (emb.tracked() < d) cov += emb.mu() * (Eigen::MatrixXd::Identity(d, d) - U * U.transpose());
  cov = ratio.asDiagonal() * cov * ratio.asDiagonal();
  const auto full = spectra::full_eig(cov);
  const Index k = emb.tracked();
  Eigen::MatrixXd previous = U;
  emb.spectrum.values = full.values.head(k);
  emb.spectrum.vectors = full.vectors.leftCols(k);
  for (Index c = 0; c < k; ++c)
    if (emb.spectrum.vectors.col(c).dot(previous.col(c)) < 0.0) emb.spectrum.vectors.col(c) *= -1.0;
  emb.tail = full.values.tail(d - k);
  emb.trace = cov.trace();
  emb.mean = emb.mean.cwiseProduct(ratio);
}

}  // namespace

std::string to_string(EmbeddingUpdate mode) {
  switch (mode) {
    case EmbeddingUpdate::Online: return "online";
    case EmbeddingUpdate::Refit: return "refit";
    case EmbeddingUpdate::Frozen: return "frozen";
  }
  return "online";
}

EmbeddingUpdate parse_embedding_update(const std::string& name) {
  if (name == "online") return EmbeddingUpdate::Online;
  if (name == "refit") return EmbeddingUpdate::Refit;
  if (name == "frozen") return EmbeddingUpdate::Frozen;
  throw Error(kModule, "unknown embedding update '" + name + "' (expected online, refit or frozen)");
}

void OfterConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw Error(kModule, "delta must lie in (0, 1)");
  if (!(l0_fraction > 0.0 && l0_fraction < 1.0)) throw Error(kModule, "l0_fraction must lie in (0, 1)");
  if (lookback < 1) throw Error(kModule, "lookback must be positive");
  if (!(c_min >= 0.0 && c_min < 1.0)) throw Error(kModule, "c_min must lie in [0, 1)");
  if (!(c_original >= 0.0 && c_original < 1.0)) throw Error(kModule, "c_original must lie in [0, 1)");
  if (s_set.empty() || k_set.empty()) throw Error(kModule, "candidate grids must not be empty");
  if (*std::max_element(k_set.begin(), k_set.end()) > lookback)
    throw Error(kModule, "the largest kNN candidate exceeds the lookback window");
  if (!(p_adf > 0.0 && p_adf < 1.0)) throw Error(kModule, "p_adf must lie in (0, 1)");
  if (ols_refit_period < 1 || embedding_refit_period < 1) throw Error(kModule, "refit periods must be positive");
  if (bernstein_k < 2) throw Error(kModule, "bernstein_k must be at least 2");
  if (max_lag < 0) throw Error(kModule, "max_lag must be non-negative");
  if (arima_max_p < 0 || arima_max_q < 0) throw Error(kModule, "ARMA order bounds must be non-negative");
}

void apply_variant(OfterConfig& config, const std::string& variant) {
  if (variant == "plain") {
    config.use_dr = false;
    config.use_ft = false;
  } else if (variant == "dr") {
    config.use_dr = true;
    config.use_ft = false;
  } else if (variant == "ft") {
    config.use_dr = false;
    config.use_ft = true;
  } else if (variant == "dr-ft") {
    config.use_dr = true;
    config.use_ft = true;
  } else {
    throw Error(kModule, "unknown variant '" + variant + "' (expected plain, dr, ft or dr-ft)");
  }
}

std::string variant_name(const OfterConfig& config) {
  if (config.use_dr) return config.use_ft ? "dr-ft" : "dr";
  return config.use_ft ? "ft" : "plain";
}

std::vector<std::string> PipelineState::feature_labels() const {
  std::vector<std::string> active_names;
  for (std::size_t j = 0; j < active.size(); ++j)
    if (active[j]) active_names.push_back(j < input_columns.size() ? input_columns[j] : "x" + std::to_string(j));
  if (!embedding) return active_names;
  std::vector<std::string> out;
  for (Index k = 0; k < embedding->p; ++k) out.push_back("pc" + std::to_string(k + 1));
  for (Index j : augmented) out.push_back(active_names[static_cast<std::size_t>(j)]);
  return out;
}

std::vector<Index> select_original_features(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Index l0,
                                            double c_original, bool use_ft, int bernstein_k) {
  if (l0 > X.rows() || l0 > y.size()) throw Error(kModule, "training window exceeds the data");
  std::vector<Index> out;
  const Eigen::VectorXd yt = y.head(l0);
  for (Index j = 0; j < X.cols(); ++j)
    if (score(X.col(j).head(l0), yt, use_ft, bernstein_k) >= c_original) out.push_back(j);
  return out;
}

regress::FeatureWeights weights_from_scores(const Eigen::VectorXd& scores, double c_min) {
  regress::FeatureWeights out;
  out.v = Eigen::VectorXd::Zero(scores.size());
  for (Index j = 0; j < scores.size(); ++j)
    if (std::abs(scores(j)) >= c_min) out.v(j) = scores(j) * scores(j);
  const double total = out.v.sum();
  if (total > 0.0) {
    out.v /= total;
  } else {
    out.v.setZero();
    out.degenerate = true;
  }
  return out;
}

WeightResult compute_feature_weights(const Eigen::MatrixXd& X_tilde, const Eigen::VectorXd& y, Index l0, double c_min,
                                     bool use_ft, int bernstein_k) {
  if (X_tilde.cols() < 1) throw Error(kModule, "no columns to weight");
  if (l0 > X_tilde.rows() || l0 > y.size()) throw Error(kModule, "training window exceeds the data");
  WeightResult out;
  out.scores.resize(X_tilde.cols());
  const Eigen::VectorXd yt = y.head(l0);
  for (Index j = 0; j < X_tilde.cols(); ++j) out.scores(j) = score(X_tilde.col(j).head(l0), yt, use_ft, bernstein_k);
  out.weights = weights_from_scores(out.scores, c_min);
  return out;
}

PipelineState initialize(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const OfterConfig& config,
                         std::vector<std::string> columns) {
  config.validate();
  const Index T = X.rows();
  if (y.size() != T) throw Error(kModule, "features and target differ in length");
  if (!X.allFinite() || !y.allFinite()) throw Error(kModule, "features or target contain non-finite values");
  if (!columns.empty() && static_cast<Index>(columns.size()) != X.cols())
    throw Error(kModule, "column label count does not match the feature matrix");

  PipelineState state;
  state.config = config;
  state.l0 = static_cast<Index>(std::floor(config.l0_fraction * static_cast<double>(T)));
  const Index max_k = *std::max_element(config.k_set.begin(), config.k_set.end());
  if (config.lookback > state.l0)
    throw Error(kModule, "lookback " + std::to_string(config.lookback) + " exceeds the training window " +
                             std::to_string(state.l0));
  if (state.l0 < 2 * max_k || state.l0 >= T)
    throw Error(kModule, "series of length " + std::to_string(T) + " is too short for the configured windows");
  state.y = y;
  state.input_columns = columns.empty() ? std::vector<std::string>{} : std::move(columns);
  if (state.input_columns.empty())
    for (Index j = 0; j < X.cols(); ++j) state.input_columns.push_back("x" + std::to_string(j));

  // Target decomposition fitted on the training window, applied causally everywhere.
  arima::ArimaOptions aopt;
  aopt.p_adf = config.p_adf;
  aopt.max_p = config.arima_max_p;
  aopt.max_q = config.arima_max_q;
  aopt.acf_lags = config.arima_acf_lags;
  aopt.significance = config.arima_significance;
  state.arima = arima::select_and_decompose(y, aopt, state.l0);
  state.target = state.arima.decomposition.residual;

  // Constant columns go first; rank pruning runs on the standardized training rows.
  const Eigen::MatrixXd train = X.topRows(state.l0);
  std::vector<bool> active(static_cast<std::size_t>(X.cols()), false);
  for (Index j = 0; j < X.cols(); ++j) active[static_cast<std::size_t>(j)] = !is_constant(train.col(j));
  {
    const auto cols = active_indices(active);
    if (cols.empty()) throw Error(kModule, "every feature is constant on the training window");
    frame::TimePanel panel = frame::make_panel(take_columns(train, cols));
    const auto standardized = frame::standardize(panel, {0, state.l0});
    const auto mask = frame::rank_mask(standardized.panel.values, config.prune_eps);
    for (std::size_t j = 0; j < cols.size(); ++j)
      if (!mask[j]) active[static_cast<std::size_t>(cols[j])] = false;
  }
  state.active = active;
  const auto cols = active_indices(active);
  if (cols.empty()) throw Error(kModule, "rank pruning removed every feature");
  {
    frame::TimePanel panel = frame::make_panel(take_columns(train, cols));
    state.standardization = frame::standardize(panel, {0, state.l0}).state;
  }
  const Eigen::MatrixXd Xs = state.standardization.apply(take_columns(train, cols));

  Eigen::MatrixXd train_tilde;
  if (config.use_dr) {
    state.embedding = embed::fit_pca(Xs, Eigen::VectorXd::Ones(Xs.cols()), config.delta, config.embedding_guard);
    state.augmented =
        select_original_features(Xs, state.target, state.l0, config.c_original, config.use_ft, config.bernstein_k);
    const Index p = state.embedding->p;
    train_tilde.resize(state.l0, p + static_cast<Index>(state.augmented.size()));
    train_tilde.leftCols(p) = embed::project_rows(*state.embedding, Xs);
    for (std::size_t j = 0; j < state.augmented.size(); ++j)
      train_tilde.col(p + static_cast<Index>(j)) = Xs.col(state.augmented[j]);
  } else {
    train_tilde = Xs;
  }

  auto weights = compute_feature_weights(train_tilde, state.target, state.l0, config.c_min, config.use_ft,
                                         config.bernstein_k);
  state.scores = weights.scores;
  state.weights = weights.weights;
  if (state.weights.degenerate) {
    warn(kModule, "every feature fell below c_min; using uniform weights");
    state.weights = regress::FeatureWeights::uniform(train_tilde.cols());
  }

  state.history = Eigen::MatrixXd::Zero(T, train_tilde.cols());
  state.history.topRows(state.l0) = train_tilde;
  state.ols = regress::ols_fit(train_tilde, state.target.head(state.l0));
  state.ledger = select::ModelLedger::create(config.s_set, config.k_set, config.loss_kind);
  if (config.warm_start) warm_start(state);
  state.t = state.l0;
  return state;
}

std::vector<ForecastRecord> advance(PipelineState& state, const Eigen::MatrixXd& X, const RunOptions& options) {
  const auto& cfg = state.config;
  const Index T = state.history.rows();
  if (X.rows() != T) throw Error(kModule, "feature matrix does not match the initialized state");
  if (static_cast<Index>(state.active.size()) != X.cols()) throw Error(kModule, "feature count changed since initialization");
  const Index end = options.stop < 0 ? T : std::min(options.stop, T);
  std::vector<ForecastRecord> records;
  records.reserve(static_cast<std::size_t>(std::max<Index>(0, end - state.t)));

  for (Index i = state.t; i < end; ++i) {
    const Eigen::VectorXd xs = standardized_row(state, X, i);
    const Eigen::VectorXd query = embed_row(state, xs);
    const Index begin = std::max<Index>(0, i - cfg.lookback);
    const auto window = state.history.middleRows(begin, i - begin);
    const Eigen::VectorXd targets = state.target.segment(begin, i - begin);

    ForecastRecord rec;
    rec.t = i;
    rec.y_ts = state.arima.decomposition.y_ts(i);
    rec.y_true = state.y(i);
    Eigen::VectorXd forecasts;
    try {
      auto result = select::step(window, targets, query, state.ledger, state.weights, state.ols, cfg.combine);
      rec.y_hat_residual = result.combined.value;
      for (Index w : result.combined.winners) rec.winners.push_back(state.ledger.label(w));
      forecasts = std::move(result.forecasts);
    } catch (const Error& e) {
      rec.y_hat_residual = targets.mean();
      rec.diagnostic = e.what();
    }
    rec.y_hat = rec.y_hat_residual + rec.y_ts;
    if (options.record_candidates && forecasts.size() > 0) rec.candidates = forecasts;
    if (forecasts.size() > 0) record_loss(state, forecasts, i);

    state.history.row(i) = query.transpose();
    if (state.embedding) {
      switch (cfg.embedding_update) {
        case EmbeddingUpdate::Online: state.embedding = embed::online_update(std::move(*state.embedding), xs); break;
        case EmbeddingUpdate::Refit:
          if ((i + 1) % cfg.embedding_refit_period == 0) refit_embedding(state, X, i + 1);
          break;
        case EmbeddingUpdate::Frozen: break;
      }
    }
    if ((i + 1) % cfg.ols_refit_period == 0) {
      if (cfg.refit_scale) refit_scale(state, X, i + 1);
      try {
        state.ols = fit_ols_rows(state, std::max<Index>(0, i + 1 - cfg.lookback), i + 1);
      } catch (const Error& e) {
        warn(kModule, std::string("OLS refit skipped: ") + e.what());
      }
    }
    records.push_back(std::move(rec));
  }
  state.t = std::max(state.t, end);
  return records;
}

std::vector<ForecastRecord> run(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const OfterConfig& config,
                                PipelineState* final_state, const RunOptions& options) {
  PipelineState state = initialize(X, y, config);
  auto records = advance(state, X, options);
  if (final_state) *final_state = std::move(state);
  return records;
}

Aligned align_one_step(const frame::TimePanel& panel, const std::string& target, int max_lag) {
  const Index col = panel.column_index(target);
  if (panel.rows() < max_lag + 2) throw Error(kModule, "series too short for the lag depth");
  const auto lagged = frame::build_lagged_features(panel, max_lag);
  Aligned out;
  const Index n = lagged.rows() - 1;
  out.X = lagged.values.topRows(n);
  out.y = panel.values.col(col).tail(n);
  out.columns = lagged.columns;
  out.index.assign(panel.index.end() - n, panel.index.end());
  return out;
}

}  // namespace ofter::pipeline
