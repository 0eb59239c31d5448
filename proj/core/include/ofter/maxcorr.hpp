#pragma once

#include <Eigen/Dense>

namespace ofter::maxcorr {

using Index = Eigen::Index;

// Affine map of the fitted range (padded by `padding` of its width on both
// sides) onto [0, 1]; values outside clamp to the ends.
struct DomainMap {
  double lo = 0.0;
  double hi = 1.0;

  double operator()(double x) const;
  static DomainMap fit(const Eigen::VectorXd& x, double padding = 0.01);
};

struct BernsteinBasis {
  int degree = 3;  // K = degree + 1 functions
  DomainMap domain;

  Index size() const { return degree + 1; }
  // b_{nu,n}(u) = C(n, nu) u^nu (1 - u)^(n - nu) at u = domain(x).
  Eigen::RowVectorXd evaluate(double x) const;
  Eigen::MatrixXd design(const Eigen::VectorXd& x) const;  // uncentred
};

// Centred N x K design of `v1` under a basis fitted to v1's range.
Eigen::MatrixXd bernstein_design(const Eigen::VectorXd& v1, int degree);

struct OsmcResult {
  Eigen::VectorXd c;              // coefficients on the centred design
  double value = 0.0;             // Pearson(Phi c, v2), reported non-negative
  BernsteinBasis basis;
  Eigen::RowVectorXd column_means;  // centring applied to the design

  // Phi(x) c for new points, centred with the fitting means.
  Eigen::VectorXd transform(const Eigen::VectorXd& x) const;
};

// One-sided maximal correlation with K basis functions. The transformed
// feature Phi c has mean 0 and sample variance 1 on the fitting data.
OsmcResult osmc_fit(const Eigen::VectorXd& v1, const Eigen::VectorXd& v2, int K = 4);
double osmc(const Eigen::VectorXd& v1, const Eigen::VectorXd& v2, int K = 4);

}  // namespace ofter::maxcorr
