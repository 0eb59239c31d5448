#pragma once

#include <Eigen/Dense>
#include <vector>

namespace ofter::spectra {

using Index = Eigen::Index;

// Eigenpairs of a symmetric matrix, eigenvalues in descending order. `vectors`
// may hold fewer columns than rows (a retained leading subspace); column i
// pairs with values(i).
struct EigenSystem {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;

  Index size() const { return values.size(); }
  Index ambient_dim() const { return vectors.rows(); }
  Eigen::MatrixXd reconstruct() const;
};

// A symmetric perturbation rho * v v^T; v need not be unit length.
struct RankOneUpdate {
  double rho = 0.0;
  Eigen::VectorXd v;
};

// Flips each eigenvector so its largest-magnitude entry is positive.
void normalize_signs(EigenSystem& system);

EigenSystem full_eig(const Eigen::MatrixXd& matrix);

struct SecularOptions {
  int max_newton = 100;
  double tolerance = 1e-13;
};

// Per-root record of |F(gamma)| along the convexified Newton iteration.
struct NewtonTrace {
  std::vector<double> residuals;
  bool bisection_fallback = false;
};

// Roots of 1 + rho * sum_i z_i^2 / (lambda_i - kappa) = 0, sorted descending.
// Near-equal poles are merged by rotating their z-mass into one component,
// negligible z components deflate to their pole.
Eigen::VectorXd secular_roots(const Eigen::VectorXd& eigenvalues, const Eigen::VectorXd& z, double rho,
                              const SecularOptions& options = {}, std::vector<NewtonTrace>* traces = nullptr);

// The m largest roots of the secular equation with the spectrum below the
// retained p eigenvalues collapsed onto a single level mu carrying the
// remaining mass 1 - sum z_i^2 (z is the projection of a unit vector).
Eigen::VectorXd truncated_secular_roots(const Eigen::VectorXd& eigenvalues, const Eigen::VectorXd& z, double rho,
                                        double mu, Index m, const SecularOptions& options = {});

// Eigensystem of U diag(lambda) U^T + rho v v^T. When `system` holds a
// partial basis only the component of v inside span(U) is used.
EigenSystem rank_one_update(const EigenSystem& system, const RankOneUpdate& update,
                            const SecularOptions& options = {});

struct TruncatedUpdate {
  EigenSystem retained;   // same number of pairs as the input
  double released = 0.0;  // the next eigenvalue below the retained block
};

// Rank-one update of a retained p-dimensional eigensystem whose orthogonal
// complement is modelled as mu * I. The component of v outside span(U)
// enters as one extra direction with eigenvalue mu.
TruncatedUpdate truncated_rank_one_update(const EigenSystem& retained, double mu, const RankOneUpdate& update,
                                          const SecularOptions& options = {});

}  // namespace ofter::spectra
