#include "ofter/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>

#include "ofter/error.hpp"
#include "ofter/stats.hpp"

namespace ofter::metrics {

namespace {

constexpr std::string_view kModule = "metrics";

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

double sign(double x) { return x > 0.0 ? 1.0 : x < 0.0 ? -1.0 : 0.0; }

void check_horizon(Index n, int k) {
  if (k < 1) throw Error(kModule, "horizon k must be at least 1");
  if (n <= k) throw Error(kModule, "series shorter than the horizon");
}

}  // namespace

Eigen::VectorXd simple_returns(const Eigen::VectorXd& prices, int k) {
  check_horizon(prices.size(), k);
  if (!prices.allFinite() || (prices.array() <= 0.0).any()) throw Error(kModule, "prices must be finite and positive");
  const Index n = prices.size() - k;
  return (prices.tail(n) - prices.head(n)).cwiseQuotient(prices.head(n));
}

Eigen::VectorXd excess_returns(const Eigen::VectorXd& returns, const Eigen::VectorXd& benchmark) {
  if (returns.size() != benchmark.size()) throw Error(kModule, "instrument and benchmark series are misaligned");
  return returns - benchmark;
}

Eigen::VectorXd log_volume_returns(const Eigen::VectorXd& volumes, int k) {
  check_horizon(volumes.size(), k);
  if (!volumes.allFinite() || (volumes.array() <= 0.0).any()) throw Error(kModule, "volumes must be finite and positive");
  const Eigen::ArrayXd lv = volumes.array().log();
  const Index n = volumes.size() - k;
  if ((lv.head(n) == 0.0).any()) throw Error(kModule, "a volume of exactly 1 has zero log and cannot be a base");
  return ((lv.tail(n) - lv.head(n)) / lv.head(n)).matrix();
}

ForecastQuality forecast_quality(const Eigen::VectorXd& y_hat, const Eigen::VectorXd& y) {
  if (y_hat.size() != y.size()) throw Error(kModule, "forecast and target differ in length");
  if (y.size() < 2) throw Error(kModule, "need at least two points");
  if (y.maxCoeff() == y.minCoeff()) throw Error(kModule, "target is constant; correlation is undefined");
  ForecastQuality q;
  q.pearson = stats::pearson(as_span(y_hat), as_span(y));
  const Eigen::ArrayXd e = (y_hat - y).array();
  q.mse = e.square().mean();
  q.mae = e.abs().mean();
  return q;
}

std::vector<Index> quantile_members(const Eigen::VectorXd& signals, int quantile) {
  if (quantile < 1 || quantile > 5) throw Error(kModule, "quantile must be between 1 and 5");
  std::vector<Index> present;
  for (Index i = 0; i < signals.size(); ++i)
    if (!std::isnan(signals(i))) present.push_back(i);
  const Index n = static_cast<Index>(present.size());
  const Index keep = ((6 - quantile) * n + 4) / 5;
  std::stable_sort(present.begin(), present.end(),
                   [&](Index a, Index b) { return std::abs(signals(a)) > std::abs(signals(b)); });
  present.resize(static_cast<std::size_t>(keep));
  return present;
}

StrategyResult evaluate_strategy(const Eigen::MatrixXd& signals, const Eigen::MatrixXd& returns, int quantile) {
  if (signals.rows() != returns.rows() || signals.cols() != returns.cols())
    throw Error(kModule, "signals and returns have different shapes");
  if (signals.rows() < 1) throw Error(kModule, "no trading days");
  StrategyResult out;
  out.quantile = quantile;
  out.pnl = Eigen::VectorXd::Zero(signals.rows());
  for (Index d = 0; d < signals.rows(); ++d) {
    const auto members = quantile_members(signals.row(d).transpose(), quantile);
    double total = 0.0;
    bool any_position = false;
    for (Index i : members) {
      const double s = sign(signals(d, i));
      if (s == 0.0) continue;
      if (!std::isfinite(returns(d, i)))
        throw Error(kModule, "missing return for a held name on day " + std::to_string(d));
      total += s * returns(d, i);
      any_position = true;
    }
    if (!any_position) {
      out.empty_days.push_back(d);
      continue;
    }
    out.pnl(d) = total / static_cast<double>(members.size());
  }
  out.ppd = out.pnl.mean();
  out.sr = sharpe_ratio(out.pnl);
  out.p_value = sharpe_p_value(out.pnl);
  return out;
}

double sharpe_ratio(const Eigen::VectorXd& pnl) {
  if (pnl.size() < 2) return 0.0;
  const double sd = stats::sample_sd(as_span(pnl));
  if (!(sd > 0.0)) return 0.0;
  return pnl.mean() * std::sqrt(252.0) / sd;
}

double sharpe_p_value(const Eigen::VectorXd& pnl) {
  const Index n = pnl.size();
  if (n < 3) return 1.0;
  const double sd = stats::sample_sd(as_span(pnl));
  if (!(sd > 0.0)) return 1.0;
  const double sr = pnl.mean() / sd;
  const Eigen::ArrayXd c = pnl.array() - pnl.mean();
  const double m2 = c.square().mean();
  const double skew = c.cube().mean() / std::pow(m2, 1.5);
  const double kurt = c.square().square().mean() / (m2 * m2);
  const double denom = std::max(1.0 - skew * sr + (kurt - 1.0) / 4.0 * sr * sr, 1e-12);
  const double z = sr * std::sqrt(static_cast<double>(n - 1)) / std::sqrt(denom);
  return 1.0 - stats::normal_cdf(z);
}

}  // namespace ofter::metrics
