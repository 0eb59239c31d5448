#include "ofter/arima.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ofter/error.hpp"
#include "ofter/stats.hpp"

namespace ofter::arima {

namespace {

constexpr std::string_view kModule = "arima";

bool is_constant(const Eigen::VectorXd& y) { return y.size() == 0 || y.maxCoeff() == y.minCoeff(); }

struct LeastSquares {
  Eigen::VectorXd coef;
  Eigen::VectorXd residual;
  double rss = 0.0;
  Eigen::VectorXd inverse_gram_diag;
};

LeastSquares least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  LeastSquares out;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
  const Index k = X.cols();
  const Eigen::MatrixXd R = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  if ((R.diagonal().array().abs() <= 1e-12 * std::max(1.0, R.diagonal().cwiseAbs().maxCoeff())).any())
    throw Error(kModule, "singular regression design");
  out.coef = qr.solve(y);
  out.residual = y - X * out.coef;
  out.rss = out.residual.squaredNorm();
  const Eigen::MatrixXd Rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  out.inverse_gram_diag = Rinv.rowwise().squaredNorm();
  return out;
}

// Largest modulus among the roots of z^k - a_1 z^{k-1} - ... - a_k.
double companion_radius(const Eigen::VectorXd& a) {
  const Index k = a.size();
  if (k == 0) return 0.0;
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(k, k);
  C.row(0) = a.transpose();
  if (k > 1) C.bottomLeftCorner(k - 1, k - 1).setIdentity();
  Eigen::EigenSolver<Eigen::MatrixXd> solver(C, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

struct GridFit {
  int p = 0, q = 0;
  Eigen::VectorXd ar, ma;
  double intercept = 0.0;
  double aic = std::numeric_limits<double>::infinity();
};

// Hannan-Rissanen: a long autoregression supplies innovation estimates, then
// every (p, q) cell is an ordinary regression on a common sample.
GridFit hannan_rissanen(const Eigen::VectorXd& w, int max_p, int max_q) {
  const Index n = w.size();
  const int want = std::max(max_p + max_q + 1, static_cast<int>(std::ceil(10.0 * std::log10(static_cast<double>(n)))));
  const int m = std::min<int>(want, static_cast<int>(n / 4));
  const Index t0 = m + std::max(max_p, max_q);
  const Index rows = n - t0;
  if (m < 1 || rows < max_p + max_q + 10) throw Error(kModule, "series too short for the ARMA order grid");

  Eigen::MatrixXd X(n - m, m + 1);
  for (Index t = m; t < n; ++t) {
    X(t - m, 0) = 1.0;
    for (int i = 1; i <= m; ++i) X(t - m, i) = w(t - i);
  }
  const auto long_ar = least_squares(X, w.tail(n - m));
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e.tail(n - m) = long_ar.residual;

  GridFit best;
  // Ascending p + q, then p, so a strict improvement is needed to displace a simpler model.
  for (int total = 0; total <= max_p + max_q; ++total) {
    for (int p = 0; p <= max_p; ++p) {
      const int q = total - p;
      if (q < 0 || q > max_q) continue;
      Eigen::MatrixXd D(rows, 1 + p + q);
      for (Index t = t0; t < n; ++t) {
        D(t - t0, 0) = 1.0;
        for (int i = 1; i <= p; ++i) D(t - t0, i) = w(t - i);
        for (int j = 1; j <= q; ++j) D(t - t0, p + j) = e(t - j);
      }
      LeastSquares fit;
      try {
        fit = least_squares(D, w.tail(rows));
      } catch (const Error&) {
        continue;
      }
      const Eigen::VectorXd ar = fit.coef.segment(1, p);
      const Eigen::VectorXd ma = fit.coef.segment(1 + p, q);
      if (companion_radius(ar) >= 1.0 || companion_radius(-ma) >= 1.0) continue;
      const double sigma2 = std::max(fit.rss / static_cast<double>(rows), std::numeric_limits<double>::min());
      const double aic = static_cast<double>(rows) * std::log(sigma2) + 2.0 * (p + q + 1);
      if (aic < best.aic) best = GridFit{p, q, ar, ma, fit.coef(0), aic};
    }
  }
  if (!std::isfinite(best.aic)) throw Error(kModule, "no admissible ARMA model in the grid");
  return best;
}

}  // namespace

double mackinnon_pvalue(double tau) {
  constexpr double tau_max = 2.74, tau_min = -18.83, tau_star = -1.61;
  if (tau > tau_max) return 1.0;
  if (tau < tau_min) return 0.0;
  double x = 0.0;
  if (tau <= tau_star) {
    x = 2.1659 + tau * (1.4412 + tau * 0.038269);
  } else {
    x = 1.7339 + tau * (0.93202 + tau * (-0.12745 + tau * -0.010368));
  }
  return stats::normal_cdf(x);
}

AdfResult adf_test(const Eigen::VectorXd& y, int max_lag) {
  const Index n = y.size();
  if (n < 20) throw Error(kModule, "ADF test needs at least 20 observations");
  if (!y.allFinite()) throw Error(kModule, "ADF test: non-finite input");
  if (is_constant(y)) throw Error(kModule, "ADF test: constant series");
  int k = max_lag >= 0 ? max_lag : static_cast<int>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
  k = std::min<int>(k, static_cast<int>((n - 1) / 3));

  const Eigen::VectorXd dy = difference(y);
  const Index rows = dy.size() - k;
  Eigen::MatrixXd X(rows, 2 + k);
  for (Index t = k; t < dy.size(); ++t) {
    X(t - k, 0) = 1.0;
    X(t - k, 1) = y(t);
    for (int i = 1; i <= k; ++i) X(t - k, 1 + i) = dy(t - i);
  }
  const auto fit = least_squares(X, dy.tail(rows));
  const double dof = static_cast<double>(rows - X.cols());
  if (dof <= 0) throw Error(kModule, "ADF test: too few observations for the lag order");
  const double s2 = fit.rss / dof;
  const double se = std::sqrt(s2 * fit.inverse_gram_diag(1));
  AdfResult out;
  out.lags = k;
  out.statistic = se > 0.0 ? fit.coef(1) / se : -std::numeric_limits<double>::infinity();
  out.p_value = mackinnon_pvalue(out.statistic);
  return out;
}

Eigen::VectorXd difference(const Eigen::VectorXd& y) {
  if (y.size() < 2) throw Error(kModule, "cannot difference fewer than two values");
  return y.tail(y.size() - 1) - y.head(y.size() - 1);
}

Differenced difference_until_stationary(const Eigen::VectorXd& y, double p_adf, int r_max) {
  if (!(p_adf > 0.0 && p_adf < 1.0)) throw Error(kModule, "p_adf must lie in (0, 1)");
  Differenced out;
  out.series = y;
  while (true) {
    if (is_constant(out.series) || adf_test(out.series).p_value < p_adf) return out;
    if (out.r == r_max) {
      out.stationary = false;
      warn(kModule, "series still non-stationary after " + std::to_string(r_max) + " differences");
      return out;
    }
    out.initial.push_back(out.series(0));
    out.series = difference(out.series);
    ++out.r;
  }
}

Eigen::VectorXd integrate(const Eigen::VectorXd& series, const std::vector<double>& initial) {
  Eigen::VectorXd s = series;
  for (auto it = initial.rbegin(); it != initial.rend(); ++it) {
    Eigen::VectorXd up(s.size() + 1);
    up(0) = *it;
    for (Index i = 0; i < s.size(); ++i) up(i + 1) = up(i) + s(i);
    s = std::move(up);
  }
  return s;
}

bool AcfPacf::any_significant() const { return std::find(significant.begin(), significant.end(), true) != significant.end(); }

AcfPacf acf_pacf(const Eigen::VectorXd& y, int max_lag, double significance) {
  const Index n = y.size();
  if (max_lag < 0) throw Error(kModule, "max_lag must be non-negative");
  if (n <= 3 * max_lag || n < 2) throw Error(kModule, "series too short for the requested ACF lags");
  if (is_constant(y)) throw Error(kModule, "ACF of a constant series is undefined");
  const Eigen::VectorXd c = y.array() - y.mean();
  const double c0 = c.squaredNorm();

  AcfPacf out;
  out.acf.resize(max_lag + 1);
  out.acf(0) = 1.0;
  for (int k = 1; k <= max_lag; ++k) out.acf(k) = c.head(n - k).dot(c.tail(n - k)) / c0;

  out.pacf = Eigen::VectorXd::Zero(max_lag + 1);
  out.pacf(0) = 1.0;
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(max_lag + 1), prev = phi;
  for (int k = 1; k <= max_lag; ++k) {
    double num = out.acf(k), den = 1.0;
    for (int j = 1; j < k; ++j) {
      num -= prev(j) * out.acf(k - j);
      den -= prev(j) * out.acf(j);
    }
    phi(k) = num / den;
    for (int j = 1; j < k; ++j) phi(j) = prev(j) - phi(k) * prev(k - j);
    out.pacf(k) = phi(k);
    prev = phi;
  }

  out.band = stats::normal_quantile(1.0 - significance / 2.0) / std::sqrt(static_cast<double>(n));
  out.significant.assign(max_lag + 1, false);
  for (int k = 1; k <= max_lag; ++k)
    out.significant[k] = std::abs(out.acf(k)) > out.band || std::abs(out.pacf(k)) > out.band;
  return out;
}

Eigen::VectorXd one_step_predictions(const ArimaSpec& spec, const Eigen::VectorXd& y) {
  const Index n = y.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  if (spec.p == 0 && spec.q == 0 && spec.r == 0) return out;
  if (spec.ar_coeffs.size() != spec.p || spec.ma_coeffs.size() != spec.q)
    throw Error(kModule, "ARIMA coefficient count does not match the order");

  const int r = spec.r;
  // Binomial weights of the integration step: y_s - w_s = sum_j c_j y_{s-j}.
  std::vector<double> carry(r + 1, 0.0);
  {
    double binom = 1.0;
    for (int j = 1; j <= r; ++j) {
      binom = binom * (r - j + 1) / j;
      carry[j] = (j % 2 == 1 ? 1.0 : -1.0) * binom;
    }
  }
  for (Index s = 0; s < std::min<Index>(r, n); ++s) out(s) = s == 0 ? y(0) : y(s - 1);
  if (n <= r) return out;

  Eigen::VectorXd w = y;
  for (int i = 0; i < r; ++i) w = difference(w);
  const double ar_sum = spec.ar_coeffs.sum();
  const double level = std::abs(1.0 - ar_sum) > 1e-12 ? spec.intercept / (1.0 - ar_sum) : 0.0;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(w.size());
  for (Index t = 0; t < w.size(); ++t) {
    double pred = spec.intercept;
    for (int i = 1; i <= spec.p; ++i) pred += spec.ar_coeffs(i - 1) * (t - i >= 0 ? w(t - i) : level);
    for (int j = 1; j <= spec.q; ++j)
      if (t - j >= 0) pred += spec.ma_coeffs(j - 1) * e(t - j);
    e(t) = w(t) - pred;
    const Index s = t + r;
    double base = 0.0;
    for (int j = 1; j <= r; ++j) base += carry[j] * y(s - j);
    out(s) = base + pred;
  }
  return out;
}

ArimaResult select_and_decompose(const Eigen::VectorXd& y, const ArimaOptions& options, Index fit_length) {
  if (!y.allFinite()) throw Error(kModule, "target contains non-finite values");
  const Index n_fit = fit_length < 0 ? y.size() : std::min(fit_length, y.size());
  const Eigen::VectorXd y_fit = y.head(n_fit);
  ArimaResult out;
  auto finish = [&](ArimaSpec spec) {
    out.spec = std::move(spec);
    out.decomposition.y_ts = one_step_predictions(out.spec, y);
    out.decomposition.residual = y - out.decomposition.y_ts;
    return out;
  };
  if (is_constant(y_fit)) return finish(ArimaSpec{});
  if (n_fit < 50) throw Error(kModule, "ARIMA selection needs at least 50 observations");

  const auto diff = difference_until_stationary(y_fit, options.p_adf, options.r_max);
  out.stationary = diff.stationary;
  const Eigen::VectorXd& w = diff.series;
  ArimaSpec spec;
  spec.r = diff.r;
  spec.intercept = diff.r > 0 ? w.mean() : 0.0;
  if (is_constant(w)) return finish(spec);

  const int lags = std::min<int>(options.acf_lags, static_cast<int>((w.size() - 1) / 3));
  if (!acf_pacf(w, lags, options.significance).any_significant()) return finish(spec);

  GridFit best;
  try {
    best = hannan_rissanen(w, options.max_p, options.max_q);
  } catch (const Error& e) {
    warn(kModule, std::string("order search failed, using ARIMA(0,r,0): ") + e.what());
    return finish(spec);
  }
  spec.aic = best.aic;
  if (best.p == 0 && best.q == 0) return finish(spec);
  spec.p = best.p;
  spec.q = best.q;
  spec.ar_coeffs = best.ar;
  spec.ma_coeffs = best.ma;
  spec.intercept = best.intercept;
  return finish(spec);
}

}  // namespace ofter::arima
