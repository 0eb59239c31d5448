#include "ofter/maxcorr.hpp"

#include <algorithm>
#include <cmath>

#include "ofter/error.hpp"
#include "ofter/stats.hpp"

namespace ofter::maxcorr {

namespace {

constexpr std::string_view kModule = "maxcorr";

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

double binomial(int n, int k) {
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

bool is_constant(const Eigen::VectorXd& v) { return v.size() == 0 || v.maxCoeff() == v.minCoeff(); }

}  // namespace

double DomainMap::operator()(double x) const {
  const double u = (x - lo) / (hi - lo);
  return std::clamp(u, 0.0, 1.0);
}

DomainMap DomainMap::fit(const Eigen::VectorXd& x, double padding) {
  if (x.size() == 0) throw Error(kModule, "domain map needs data");
  if (!x.allFinite()) throw Error(kModule, "domain map: non-finite input");
  const double lo = x.minCoeff(), hi = x.maxCoeff();
  if (hi == lo) throw Error(kModule, "constant feature has no domain");
  const double pad = padding * (hi - lo);
  return {lo - pad, hi + pad};
}

Eigen::RowVectorXd BernsteinBasis::evaluate(double x) const {
  const double u = domain(x);
  const int n = degree;
  Eigen::RowVectorXd row(n + 1);
  for (int nu = 0; nu <= n; ++nu) row(nu) = binomial(n, nu) * std::pow(u, nu) * std::pow(1.0 - u, n - nu);
  return row;
}

Eigen::MatrixXd BernsteinBasis::design(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd phi(x.size(), size());
  for (Index i = 0; i < x.size(); ++i) phi.row(i) = evaluate(x(i));
  return phi;
}

Eigen::MatrixXd bernstein_design(const Eigen::VectorXd& v1, int degree) {
  if (degree < 1) throw Error(kModule, "Bernstein degree must be at least 1");
  if (v1.size() <= degree + 1) throw Error(kModule, "need more observations than basis functions");
  if (is_constant(v1)) throw Error(kModule, "constant feature");
  const BernsteinBasis basis{degree, DomainMap::fit(v1)};
  Eigen::MatrixXd phi = basis.design(v1);
  phi.rowwise() -= phi.colwise().mean();
  return phi;
}

Eigen::VectorXd OsmcResult::transform(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd phi = basis.design(x);
  phi.rowwise() -= column_means;
  return phi * c;
}

OsmcResult osmc_fit(const Eigen::VectorXd& v1, const Eigen::VectorXd& v2, int K) {
  if (v1.size() != v2.size()) throw Error(kModule, "osmc: length mismatch");
  if (K < 2) throw Error(kModule, "osmc needs K >= 2 basis functions");
  const Index n = v1.size();
  if (n <= K) throw Error(kModule, "osmc: need more observations than basis functions");
  if (!v1.allFinite() || !v2.allFinite()) throw Error(kModule, "osmc: non-finite input");
  if (is_constant(v1)) throw Error(kModule, "osmc: constant feature");
  if (is_constant(v2)) throw Error(kModule, "osmc: constant target");
  counters().osmc_fits.fetch_add(1, std::memory_order_relaxed);

  OsmcResult out;
  out.basis = BernsteinBasis{K - 1, DomainMap::fit(v1)};
  Eigen::MatrixXd phi = out.basis.design(v1);
  out.column_means = phi.colwise().mean();
  phi.rowwise() -= out.column_means;

  // The centred design always loses one dimension to the partition of unity,
  // so A is regularised unconditionally.
  Eigen::MatrixXd A = phi.transpose() * phi / static_cast<double>(n - 1);
  A.diagonal().array() += 1e-8 * A.trace() / static_cast<double>(K);
  const Eigen::VectorXd zbar = phi.transpose() * (v2.array() - v2.mean()).matrix();
  Eigen::VectorXd c = A.ldlt().solve(zbar);
  if (!c.allFinite() || c.isZero(0.0)) throw Error(kModule, "osmc: degenerate design gives a zero solution");

  const Eigen::VectorXd f = phi * c;
  const double sd = stats::sample_sd(as_span(f));
  if (!(sd > 0.0)) throw Error(kModule, "osmc: transformed feature is constant");
  c /= sd;
  const Eigen::VectorXd g = phi * c;
  double value = stats::pearson(as_span(g), as_span(v2));
  if (value < 0.0) {
    c = -c;
    value = -value;
  }
  out.c = std::move(c);
  out.value = value;
  return out;
}

double osmc(const Eigen::VectorXd& v1, const Eigen::VectorXd& v2, int K) { return osmc_fit(v1, v2, K).value; }

}  // namespace ofter::maxcorr
