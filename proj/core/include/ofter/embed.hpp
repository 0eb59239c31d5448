#pragma once

#include <Eigen/Dense>

#include "ofter/frame.hpp"
#include "ofter/spectra.hpp"

namespace ofter::embed {

using Index = Eigen::Index;

// Running PCA of the population covariance of (x - mean) / scale.
struct EmbeddingState {
  spectra::EigenSystem spectrum;  // d x k leading block, k >= p tracked directions
  Eigen::VectorXd mean;           // raw units
  Eigen::VectorXd scale;          // frozen at fit time
  Index p = 0;                    // projection dimension
  double t = 0.0;                 // observations absorbed so far
  double delta = 0.9;
  Eigen::VectorXd tail;           // eigenvalues below the retained block, descending
  double trace = 0.0;             // total variance bookkeeping

  Index dim() const { return mean.size(); }
  Index tracked() const { return spectrum.size(); }
  // Level standing in for the discarded spectrum: the median of `tail`.
  double mu() const;
};

// Smallest p with sum_{k<=p} lambda_k / sum lambda >= delta.
Index retained_dimension(const Eigen::VectorXd& eigenvalues, double delta);

// Fits on every row of an already standardized panel (scale is set to ones).
// The second overload takes raw rows and a scale vector. `guard` extra
// directions below the p-th are tracked through updates; a negative guard
// tracks the whole spectrum, zero keeps exactly p plus the tail level mu.
EmbeddingState fit_pca(const frame::TimePanel& standardized, double delta, Index guard = -1);
EmbeddingState fit_pca(const Eigen::MatrixXd& rows, const Eigen::VectorXd& scale, double delta, Index guard = -1);

Eigen::VectorXd project(const EmbeddingState& state, const Eigen::VectorXd& x);
Eigen::MatrixXd project_rows(const EmbeddingState& state, const Eigen::MatrixXd& rows);

// rho_1, rho_2 of the two re-centring updates for count t.
std::pair<double, double> recentering_rhos(double t);

// Absorbs one observation (raw units): variance rescale, rank-one update along
// the centred point, mean shift, two re-centring updates, truncation to p.
EmbeddingState online_update(EmbeddingState state, const Eigen::VectorXd& x_new,
                             const spectra::SecularOptions& options = {});

}  // namespace ofter::embed
