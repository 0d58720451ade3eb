#pragma once

#include <Eigen/Dense>

#include "lvgm/data_matrix.hpp"
#include "lvgm/family.hpp"

namespace lvgm {

/// Value and gradients of a smooth objective at (alpha, Theta, L).  Gradients
/// are with respect to the Frobenius inner product over all matrix entries,
/// restricted to symmetric perturbations of Theta, so grad_theta is always
/// symmetric.  For non-Gaussian kinds the diagonal of grad_theta is reported
/// even though the solver projects it away.
struct SmoothEval {
  double value = 0.0;
  Vector grad_alpha;
  Matrix grad_theta;
  Matrix grad_L;
};

/// Smooth part of the Gaussian conditional likelihood (alpha = 0 convention,
/// X centered):
///   (1/2n) tr(L' Theta^{-1} L) - (1/2) log det Theta
///   - (1/n) tr(L' X) + (1/2n) tr(Theta X X').
/// n_norm overrides the 1/n normalizer (defaults to X.cols()); the objective
/// treats the sample count as a fixed constant, which is what makes the
/// orthogonal-transform identity c(Theta, LW'; XW') = c(Theta, L; X) exact
/// even when W changes the column count.
/// Throws NotPositiveDefiniteError when Theta is not positive definite.
SmoothEval gaussian_smooth(const Matrix& theta, const Matrix& L, const Matrix& X,
                           Eigen::Index n_norm = -1);
double gaussian_smooth_value(const Matrix& theta, const Matrix& L, const Matrix& X,
                             Eigen::Index n_norm = -1);

/// Smooth part of the conditional pseudo-likelihood:
///   (1/n) sum_k [ sum_i rho(u_i^k) - (alpha + L^k)' x^k + x^k' Theta x^k ]
/// with u_i^k = alpha_i + L_i^k - Theta_{i,\i} x^k_{\i}.  The quadratic term
/// appears without a 1/2 factor, exactly as the pseudo-likelihood
/// double-counts pairs, and the Theta gradient collects both node-conditional
/// contributions of every off-diagonal entry.
/// Only the three non-Gaussian kinds are accepted.
SmoothEval pseudo_smooth(const FamilySpec& family, const Vector& alpha, const Matrix& theta,
                         const Matrix& L, const Matrix& X);
double pseudo_smooth_value(const FamilySpec& family, const Vector& alpha, const Matrix& theta,
                           const Matrix& L, const Matrix& X);

/// Smooth part of the n-independent Gaussian reformulation over (Theta, H):
///   (1/2) tr(H' Theta^{-1} H) - (1/2) log det Theta
///   - tr(H' sqrt_sigma) + (1/2) tr(Theta sigma).
/// grad_L holds the H gradient.
SmoothEval reduced_smooth(const Matrix& theta, const Matrix& H, const Matrix& sqrt_sigma,
                          const Matrix& sigma);
double reduced_smooth_value(const Matrix& theta, const Matrix& H, const Matrix& sqrt_sigma,
                            const Matrix& sigma);

}  // namespace lvgm
