#pragma once

#include <Eigen/Dense>
#include <utility>

#include "lvgm/family.hpp"

namespace lvgm {

/// Regularization weights for the composite objective
///   smooth + lambda ||Theta||_l1 + gamma ||L||_*.
/// The l1 norm runs over all matrix entries; the diagonal is only penalized
/// for the gaussian kind and only when penalize_diagonal is set (graphical
/// lasso convention), while the non-Gaussian kinds pin it to zero anyway.
struct PenaltyConfig {
  double lambda = 0.0;
  double gamma = 0.0;
  bool penalize_diagonal = false;
};

/// Proximal operator of t * ||.||_l1 plus the family's Theta constraints:
/// soft-threshold penalized entries by t, zero the diagonal for non-Gaussian
/// kinds, and for poisson/exponential apply the one-sided rule
/// max(M_ij - t, 0), the exact prox of l1 plus the nonnegativity indicator.
Matrix prox_l1_theta(const Matrix& M, double t, const FamilySpec& family,
                     const PenaltyConfig& cfg);

/// Singular value thresholding: every singular value sigma becomes
/// max(sigma - t, 0), singular vectors unchanged.  The prox of t ||.||_*.
Matrix svt(const Matrix& M, double t);

/// svt that also reports the nuclear norm of the result.
std::pair<Matrix, double> svt_with_norm(const Matrix& M, double t);

/// For the exponential kind, clips alpha with the minimal per-coordinate
/// correction so that (alpha + L^(k))_i <= -margin for every sample k;
/// identity for the other kinds.
std::pair<Vector, Matrix> project_domain(const FamilySpec& family, Vector alpha, Matrix L,
                                         double margin);

/// Sum of singular values.
double nuclear_norm(const Matrix& M);

/// lambda-weighted l1 penalty value under the configured diagonal rule.
double l1_theta_value(const Matrix& theta, const FamilySpec& family, const PenaltyConfig& cfg);

}  // namespace lvgm
