#pragma once

#include <Eigen/Dense>

#include "lvgm/data_matrix.hpp"
#include "lvgm/prox.hpp"
#include "lvgm/solver.hpp"

namespace lvgm {

/// Preprocessing for the n-independent Gaussian reformulation: sample
/// covariance, its psd square root, and the thin SVD factors of the data.
struct ReducedInstance {
  Matrix sigma;       // X X' / n
  Matrix sqrt_sigma;  // psd square root of sigma
  Matrix U;           // d x min(d, n) left singular vectors of X
  Matrix V;           // n x min(d, n) right singular vectors of X
  Eigen::Index n = 0;
};

/// Builds the reduced instance from centered data.  The square root comes
/// from an eigendecomposition of sigma with eigenvalues clamped at zero, so
/// rank-deficient covariances (n < d) are handled.
ReducedInstance reduce(const DataMatrix& data);

struct ReducedFit {
  Matrix theta;
  Matrix H;
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
  double kkt_residual = 0.0;
};

/// Minimizes
///   (1/2) tr(H' Theta^{-1} H) - (1/2) log det Theta - tr(H' sqrt(Sigma))
///   + (1/2) tr(Theta Sigma) + lambda ||Theta||_l1 + gamma sqrt(n) ||H||_*
/// over Theta pd and H in R^{d x d}.  Callers pass the same (lambda, gamma)
/// as for the full problem; the sqrt(n) nuclear weight is applied here.
ReducedFit fit_reduced(const ReducedInstance& inst, const PenaltyConfig& cfg,
                       const SolveOptions& opts = {});

/// Lifts the reduced solution back to full size: L = sqrt(n) H U V'.
Matrix reconstruct_L(const Matrix& H_hat, const ReducedInstance& inst);

/// Convenience wrapper for the full pipeline: center, reduce, solve, and
/// reconstruct, packaged as an ordinary FitResult.
FitResult fit_gaussian_reduced(const DataMatrix& data, const PenaltyConfig& cfg,
                               const SolveOptions& opts = {});

/// Subgradient spot-checks against the reduced objective's gradient.
KktReport kkt_check_reduced(const ReducedFit& rfit, const ReducedInstance& inst,
                            const PenaltyConfig& cfg, double tol = 1e-5);

}  // namespace lvgm
