#include "ofter/select.hpp"

#include <cmath>
#include <sstream>

#include "ofter/error.hpp"

namespace ofter::select {

namespace {

constexpr std::string_view kModule = "select";

double sign(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::MSE: return "mse";
    case LossKind::MAE: return "mae";
    case LossKind::NegPnl: return "neg-pnl";
  }
  return "mse";
}

LossKind parse_loss(const std::string& name) {
  if (name == "mse") return LossKind::MSE;
  if (name == "mae") return LossKind::MAE;
  if (name == "neg-pnl" || name == "neg_pnl") return LossKind::NegPnl;
  throw Error(kModule, "unknown loss '" + name + "' (expected mse, mae or neg-pnl)");
}

std::vector<double> default_s_set() { return {0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1, 5, 10, 50, 100}; }
std::vector<int> default_k_set() { return {1, 2, 3, 5, 10, 15, 20, 30, 50}; }

ModelLedger ModelLedger::create(std::vector<double> s_set, std::vector<int> k_set, LossKind kind) {
  for (double s : s_set)
    if (!(s > 0.0)) throw Error(kModule, "GRNN scaling factors must be positive");
  for (int k : k_set)
    if (k < 1) throw Error(kModule, "kNN neighbour counts must be positive");
  ModelLedger out;
  out.loss_kind = kind;
  out.s_set = std::move(s_set);
  out.k_set = std::move(k_set);
  out.losses = Eigen::VectorXd::Zero(static_cast<Index>(out.s_set.size() + out.k_set.size() + 1));
  return out;
}

std::string ModelLedger::label(Index candidate) const {
  std::ostringstream os;
  const auto n_s = static_cast<Index>(s_set.size());
  const auto n_k = static_cast<Index>(k_set.size());
  if (candidate < n_s) {
    os << "grnn:s=" << s_set[static_cast<std::size_t>(candidate)];
  } else if (candidate < n_s + n_k) {
    os << "knn:k=" << k_set[static_cast<std::size_t>(candidate - n_s)];
  } else {
    os << "ols";
  }
  return os.str();
}

CombinedForecast combine(const ModelLedger& ledger, const Eigen::VectorXd& forecasts, CombineMode mode) {
  const Index n = ledger.size();
  if (n == 0) throw Error(kModule, "empty candidate set");
  if (forecasts.size() != n) throw Error(kModule, "forecasts do not match the candidate set");
  CombinedForecast out;
  const double best = ledger.losses.minCoeff();
  for (Index i = 0; i < n; ++i)
    if (ledger.losses(i) == best) out.winners.push_back(i);

  if (mode == CombineMode::LossWeighted) {
    // Weights fall off with the excess loss over the best candidate.
    const Eigen::ArrayXd excess = ledger.losses.array() - best;
    const double mean_excess = excess.mean();
    if (mean_excess > 0.0) {
      const Eigen::ArrayXd raw = 1.0 / (excess + mean_excess);
      out.eta = (raw / raw.sum()).matrix();
      out.value = out.eta.dot(forecasts);
      return out;
    }
  }
  out.eta = Eigen::VectorXd::Zero(n);
  const double share = 1.0 / static_cast<double>(out.winners.size());
  for (Index i : out.winners) out.eta(i) = share;
  double value = 0.0;
  for (Index i : out.winners) value += forecasts(i);
  out.value = value * share;
  return out;
}

double loss(LossKind kind, double y_hat, double y_true, std::optional<double> actual_return) {
  if (!std::isfinite(y_true)) throw Error(kModule, "realised target is not finite");
  switch (kind) {
    case LossKind::MSE: return (y_hat - y_true) * (y_hat - y_true);
    case LossKind::MAE: return std::abs(y_hat - y_true);
    case LossKind::NegPnl:
      if (!actual_return) throw Error(kModule, "neg-pnl loss needs the realised return");
      return -sign(y_hat) * *actual_return;
  }
  return 0.0;
}

void update_losses(ModelLedger& ledger, const Eigen::VectorXd& forecasts, double y_true,
                   std::optional<double> actual_return) {
  if (forecasts.size() != ledger.size()) throw Error(kModule, "forecasts do not match the candidate set");
  for (Index i = 0; i < ledger.size(); ++i)
    ledger.losses(i) += loss(ledger.loss_kind, forecasts(i), y_true, actual_return);
  ++ledger.updates;
}

Eigen::VectorXd candidate_forecasts(const Eigen::MatrixXd& window, const Eigen::VectorXd& targets,
                                    const Eigen::VectorXd& query, const ModelLedger& ledger,
                                    const regress::FeatureWeights& weights, const regress::OlsModel& ols) {
  if (window.rows() != targets.size()) throw Error(kModule, "window and targets differ in length");
  if (window.rows() == 0) throw Error(kModule, "empty window");
  const Eigen::VectorXd d = regress::weighted_distances(window, query, weights);
  Eigen::VectorXd out(ledger.size());
  for (std::size_t i = 0; i < ledger.s_set.size(); ++i)
    out(ledger.grnn_index(static_cast<Index>(i))) = regress::grnn_from_distances(d, targets, ledger.s_set[i]);
  const auto order = regress::neighbour_order(d);
  for (std::size_t i = 0; i < ledger.k_set.size(); ++i)
    out(ledger.knn_index(static_cast<Index>(i))) = regress::knn_from_order(order, targets, ledger.k_set[i]);
  out(ledger.ols_index()) = ols.predict(query);
  return out;
}

StepResult step(const Eigen::MatrixXd& window, const Eigen::VectorXd& targets, const Eigen::VectorXd& query,
                const ModelLedger& ledger, const regress::FeatureWeights& weights, const regress::OlsModel& ols,
                CombineMode mode) {
  StepResult out;
  out.forecasts = candidate_forecasts(window, targets, query, ledger, weights, ols);
  out.combined = combine(ledger, out.forecasts, mode);
  return out;
}

}  // namespace ofter::select
