#include "ofter/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ofter/error.hpp"

namespace ofter::spectra {

namespace {

constexpr std::string_view kModule = "spectra";
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kZeroComponent = 1e-14;
constexpr double kTieTolerance = 1e-10;

// A root stored relative to the pole it was solved from: kappa = pole[origin] + rho * xi.
struct Root {
  std::size_t origin = 0;
  double xi = 0.0;
};

// f(xi) = 1 + sum_j w_j / (delta_j - xi) with delta_j = (pole_j - pole_origin) / rho.
struct SecularFunction {
  std::vector<double> delta;
  const std::vector<double>* w = nullptr;

  SecularFunction(const std::vector<double>& poles, const std::vector<double>& weights, std::size_t origin,
                  double rho)
      : delta(poles.size()), w(&weights) {
    for (std::size_t j = 0; j < poles.size(); ++j) delta[j] = (poles[j] - poles[origin]) / rho;
  }

  // Returns f; writes f' and the magnitude scale used for the stopping test.
  double eval(double xi, double* deriv = nullptr, double* scale = nullptr) const {
    double f = 1.0, fp = 0.0, s = 1.0;
    for (std::size_t j = 0; j < delta.size(); ++j) {
      const double inv = 1.0 / (delta[j] - xi);
      const double term = (*w)[j] * inv;
      f += term;
      fp += term * inv;
      s += std::abs(term);
    }
    if (deriv) *deriv = fp;
    if (scale) *scale = s;
    return f;
  }
};

// Bisection in xi on (lo, hi) with f(lo) < 0 < f(hi).
double bisect(const SecularFunction& f, double lo, double hi, double tol) {
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return mid;
    double scale = 1.0;
    const double val = f.eval(mid, nullptr, &scale);
    if (std::abs(val) <= tol * scale) return mid;
    (val < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Solves every root of the secular equation for distinct poles and strictly
// positive weights. Root i is searched in xi-coordinates about pole i, where
// the convexified function F(gamma) = f(gamma^{-1/2}) is decreasing and convex
// and Newton started on the pole side of the root climbs monotonically to it.
std::vector<Root> solve_distinct(const std::vector<double>& poles, const std::vector<double>& w, double rho,
                                 const SecularOptions& opt, std::vector<NewtonTrace>* traces) {
  const std::size_t n = poles.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Ascending in pole/rho so that delta_{next} > 0 for every interior root.
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rho > 0.0 ? poles[a] < poles[b] : poles[a] > poles[b];
  });
  const double total_weight = std::accumulate(w.begin(), w.end(), 0.0);

  std::vector<Root> roots(n);
  if (traces) traces->assign(n, NewtonTrace{});
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t i = order[pos];
    const SecularFunction f(poles, w, i, rho);
    const bool last = pos + 1 == n;
    const double upper = last ? std::numeric_limits<double>::infinity() : f.delta[order[pos + 1]];
    NewtonTrace trace;

    // Starting point with F(gamma0) >= 0, i.e. xi0 at or right of the root.
    double xi = 0.0;
    if (last) {
      xi = std::max(total_weight, std::numeric_limits<double>::min());
    } else {
      xi = 0.5 * upper;
      for (int k = 0; k < 80 && f.eval(xi) < 0.0; ++k) xi = 0.5 * (xi + upper);
    }
    double lo = 0.0, hi = xi;
    bool converged = false;
    for (int it = 0; it < opt.max_newton; ++it) {
      double fp = 0.0, scale = 1.0;
      const double fx = f.eval(xi, &fp, &scale);
      trace.residuals.push_back(std::abs(fx));
      if (std::abs(fx) <= opt.tolerance * scale) {
        converged = true;
        break;
      }
      (fx > 0.0 ? hi : lo) = xi;
      const double gamma = 1.0 / (xi * xi);
      const double dF = -0.5 * xi * xi * xi * fp;
      const double gamma_next = gamma - fx / dF;
      const double xi_next = 1.0 / std::sqrt(gamma_next);
      if (!(gamma_next > 0.0) || !(xi_next > lo && xi_next < hi)) break;
      if (std::abs(xi_next - xi) <= 4.0 * kEps * xi) {
        xi = xi_next;
        converged = true;
        break;
      }
      xi = xi_next;
    }
    if (!converged) {
      trace.bisection_fallback = true;
      if (f.eval(hi) < 0.0) hi = last ? std::max(2.0 * total_weight, 2.0 * hi) : upper;
      xi = bisect(f, lo, hi, opt.tolerance);
    }

    Root root{i, xi};
    // A root in the right half of its interval is re-expressed about the next
    // pole, so that its gap to that pole is carried to full relative accuracy.
    if (!last && xi > 0.5 * upper) {
      const std::size_t next = order[pos + 1];
      const SecularFunction g(poles, w, next, rho);
      double tau = xi - upper;
      double tlo = -upper, thi = 0.0;
      for (int it = 0; it < 8; ++it) {
        double gp = 0.0, scale = 1.0;
        const double gx = g.eval(tau, &gp, &scale);
        if (std::abs(gx) <= opt.tolerance * scale) break;
        (gx > 0.0 ? thi : tlo) = tau;
        double step = tau - gx / gp;
        if (!(step > tlo && step < thi)) step = 0.5 * (tlo + thi);
        if (step == tau) break;
        tau = step;
      }
      root = Root{next, tau};
    }
    roots[pos] = root;
    if (traces) (*traces)[pos] = std::move(trace);
  }
  counters().secular_solves.fetch_add(1, std::memory_order_relaxed);
  return roots;
}

double root_value(const std::vector<double>& poles, const Root& r, double rho) {
  return poles[r.origin] + rho * r.xi;
}

// kappa_k - pole_j, evaluated through the stored origin to keep small gaps accurate.
double root_gap(const std::vector<double>& poles, const Root& r, std::size_t j, double rho) {
  return (poles[r.origin] - poles[j]) + rho * r.xi;
}

void check_finite(const Eigen::VectorXd& x, const char* what) {
  if (!x.allFinite()) throw Error(kModule, std::string(what) + " contains non-finite entries");
}

// Merges near-equal poles and deflates negligible weights; returns the
// non-deflated subset. `poles`/`z` are modified in place (merged mass moves to
// the last member of each tie group). `on_rotate(a, b, c, s)` is invoked for
// every merge so callers can rotate the matching eigenvectors.
template <typename Rotate>
std::vector<std::size_t> deflate(const std::vector<double>& poles, std::vector<double>& z, Rotate on_rotate) {
  const std::size_t n = poles.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return poles[a] < poles[b]; });
  double scale = 0.0;
  for (double p : poles) scale = std::max(scale, std::abs(p));
  const double tie = kTieTolerance * std::max(scale, std::numeric_limits<double>::min());
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const std::size_t a = order[k], b = order[k + 1];
    if (poles[b] - poles[a] >= tie) continue;
    const double r = std::hypot(z[a], z[b]);
    if (r == 0.0) continue;
    const double c = z[b] / r, s = z[a] / r;
    on_rotate(a, b, c, s);
    z[a] = 0.0;
    z[b] = r;
  }
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(z[i]) >= kZeroComponent) kept.push_back(i);
  return kept;
}

// Roots of the (possibly deflated) problem, descending.
Eigen::VectorXd all_roots(std::vector<double> poles, std::vector<double> z, double rho, const SecularOptions& opt,
                          std::vector<NewtonTrace>* traces) {
  if (rho == 0.0) throw Error(kModule, "secular equation needs rho != 0");
  const auto kept = deflate(poles, z, [](std::size_t, std::size_t, double, double) {});
  std::vector<double> out;
  out.reserve(poles.size());
  std::vector<bool> active(poles.size(), false);
  for (auto i : kept) active[i] = true;
  for (std::size_t i = 0; i < poles.size(); ++i)
    if (!active[i]) out.push_back(poles[i]);
  if (!kept.empty()) {
    std::vector<double> p, w;
    for (auto i : kept) {
      p.push_back(poles[i]);
      w.push_back(z[i] * z[i]);
    }
    const auto roots = solve_distinct(p, w, rho, opt, traces);
    for (const auto& r : roots) out.push_back(root_value(p, r, rho));
  } else if (traces) {
    traces->clear();
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return Eigen::Map<const Eigen::VectorXd>(out.data(), static_cast<Index>(out.size()));
}

}  // namespace

Eigen::MatrixXd EigenSystem::reconstruct() const {
  return vectors * values.asDiagonal() * vectors.transpose();
}

void normalize_signs(EigenSystem& system) {
  for (Index k = 0; k < system.vectors.cols(); ++k) {
    Index arg = 0;
    system.vectors.col(k).cwiseAbs().maxCoeff(&arg);
    if (system.vectors(arg, k) < 0.0) system.vectors.col(k) *= -1.0;
  }
}

EigenSystem full_eig(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols()) throw Error(kModule, "full_eig needs a square matrix");
  if (!matrix.allFinite()) throw Error(kModule, "full_eig: matrix contains non-finite entries");
  const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw Error(kModule, "full_eig: matrix is not symmetric");
  counters().full_eig.fetch_add(1, std::memory_order_relaxed);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (matrix + matrix.transpose()));
  if (solver.info() != Eigen::Success) throw Error(kModule, "full_eig: eigensolver did not converge");
  const Index d = matrix.rows();
  EigenSystem out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  (void)d;
  normalize_signs(out);
  return out;
}

Eigen::VectorXd secular_roots(const Eigen::VectorXd& eigenvalues, const Eigen::VectorXd& z, double rho,
                              const SecularOptions& options, std::vector<NewtonTrace>* traces) {
  if (eigenvalues.size() != z.size()) throw Error(kModule, "secular_roots: eigenvalue and z lengths differ");
  check_finite(eigenvalues, "eigenvalues");
  check_finite(z, "z");
  if (!std::isfinite(rho)) throw Error(kModule, "secular_roots: rho is not finite");
  std::vector<double> poles(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
  std::vector<double> zv(z.data(), z.data() + z.size());
  return all_roots(std::move(poles), std::move(zv), rho, options, traces);
}

Eigen::VectorXd truncated_secular_roots(const Eigen::VectorXd& eigenvalues, const Eigen::VectorXd& z, double rho,
                                        double mu, Index m, const SecularOptions& options) {
  if (eigenvalues.size() != z.size()) throw Error(kModule, "truncated_secular_roots: length mismatch");
  if (m < 0 || m > eigenvalues.size()) throw Error(kModule, "truncated_secular_roots: m must lie in [0, p]");
  check_finite(eigenvalues, "eigenvalues");
  check_finite(z, "z");
  if (!std::isfinite(mu)) throw Error(kModule, "truncated_secular_roots: mu is not finite");
  const double head = z.squaredNorm();
  if (head > 1.0 + 1e-12) throw Error(kModule, "truncated_secular_roots: z must come from a unit vector");
  std::vector<double> poles(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
  std::vector<double> zv(z.data(), z.data() + z.size());
  poles.push_back(mu);
  zv.push_back(std::sqrt(std::max(0.0, 1.0 - head)));
  const Eigen::VectorXd roots = all_roots(std::move(poles), std::move(zv), rho, options, nullptr);
  return roots.head(m);
}

EigenSystem rank_one_update(const EigenSystem& system, const RankOneUpdate& update, const SecularOptions& options) {
  const Index k = system.values.size();
  const Index d = system.vectors.rows();
  if (system.vectors.cols() != k) throw Error(kModule, "rank_one_update: eigenvector/eigenvalue count mismatch");
  if (update.v.size() != d) throw Error(kModule, "rank_one_update: update vector has the wrong dimension");
  check_finite(system.values, "eigenvalues");
  check_finite(update.v, "update vector");
  if (!std::isfinite(update.rho)) throw Error(kModule, "rank_one_update: rho is not finite");

  const double norm = update.v.norm();
  if (update.rho == 0.0 || norm == 0.0) return system;
  const double rho = update.rho * norm * norm;
  if (!std::isfinite(rho)) throw Error(kModule, "rank_one_update: rho * |v|^2 overflows");

  Eigen::MatrixXd U = system.vectors;
  std::vector<double> lam(system.values.data(), system.values.data() + k);
  const Eigen::VectorXd zvec = U.transpose() * (update.v / norm);
  std::vector<double> z(zvec.data(), zvec.data() + k);

  const auto kept = deflate(lam, z, [&](std::size_t a, std::size_t b, double c, double s) {
    const Eigen::VectorXd ua = U.col(static_cast<Index>(a));
    const Eigen::VectorXd ub = U.col(static_cast<Index>(b));
    U.col(static_cast<Index>(a)) = c * ua - s * ub;
    U.col(static_cast<Index>(b)) = s * ua + c * ub;
  });

  struct Pair {
    double value;
    std::size_t key;
    Eigen::VectorXd vec;
  };
  std::vector<Pair> pairs;
  pairs.reserve(static_cast<std::size_t>(k));
  std::vector<bool> active(static_cast<std::size_t>(k), false);
  for (auto i : kept) active[i] = true;
  for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i)
    if (!active[i]) pairs.push_back({lam[i], i, U.col(static_cast<Index>(i))});

  if (!kept.empty()) {
    const std::size_t n = kept.size();
    std::vector<double> poles(n), w(n), zs(n);
    Eigen::MatrixXd Uk(d, static_cast<Index>(n));
    for (std::size_t a = 0; a < n; ++a) {
      poles[a] = lam[kept[a]];
      zs[a] = z[kept[a]];
      w[a] = zs[a] * zs[a];
      Uk.col(static_cast<Index>(a)) = U.col(static_cast<Index>(kept[a]));
    }
    const auto roots = solve_distinct(poles, w, rho, options, nullptr);

    // Recompute z from the computed roots (Loewner / Gu-Eisenstat) so the
    // resolvent vectors below are orthogonal to working precision.
    std::vector<double> zhat(n);
    for (std::size_t i = 0; i < n; ++i) {
      double prod = 1.0 / rho;
      for (std::size_t r = 0; r < n; ++r) {
        prod *= root_gap(poles, roots[r], i, rho);
        if (r != i) prod /= poles[r] - poles[i];
      }
      zhat[i] = std::copysign(std::sqrt(std::abs(prod)), zs[i]);
    }

    for (const auto& root : roots) {
      Eigen::VectorXd y(static_cast<Index>(n));
      for (std::size_t j = 0; j < n; ++j) y(static_cast<Index>(j)) = zhat[j] / -root_gap(poles, root, j, rho);
      y /= y.norm();
      pairs.push_back({root_value(poles, root, rho), kept[root.origin], Uk * y});
    }
  }

  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.value != b.value) return a.value > b.value;
    return a.key < b.key;
  });
  EigenSystem out;
  out.values.resize(k);
  out.vectors.resize(d, k);
  for (Index i = 0; i < k; ++i) {
    out.values(i) = pairs[static_cast<std::size_t>(i)].value;
    out.vectors.col(i) = pairs[static_cast<std::size_t>(i)].vec;
  }
  return out;
}

TruncatedUpdate truncated_rank_one_update(const EigenSystem& retained, double mu, const RankOneUpdate& update,
                                          const SecularOptions& options) {
  const Index p = retained.values.size();
  const Index d = retained.vectors.rows();
  if (update.v.size() != d) throw Error(kModule, "truncated update: update vector has the wrong dimension");
  if (!std::isfinite(mu)) throw Error(kModule, "truncated update: mu is not finite");
  const double norm = update.v.norm();
  TruncatedUpdate out{retained, mu};
  if (update.rho == 0.0 || norm == 0.0) return out;

  const Eigen::VectorXd vhat = update.v / norm;
  Eigen::VectorXd residual = vhat - retained.vectors * (retained.vectors.transpose() * vhat);
  residual -= retained.vectors * (retained.vectors.transpose() * residual);
  const double rnorm = residual.norm();

  EigenSystem extended;
  if (rnorm >= kZeroComponent && p < d) {
    extended.values.resize(p + 1);
    extended.values << retained.values, mu;
    extended.vectors.resize(d, p + 1);
    extended.vectors << retained.vectors, residual / rnorm;
  } else {
    extended = retained;
  }
  const EigenSystem updated = rank_one_update(extended, update, options);
  out.retained.values = updated.values.head(p);
  out.retained.vectors = updated.vectors.leftCols(p);
  out.released = updated.size() > p ? updated.values(p) : mu;
  return out;
}

}  // namespace ofter::spectra
