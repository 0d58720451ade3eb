#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "lvgm/data_matrix.hpp"
#include "lvgm/family.hpp"
#include "lvgm/objective.hpp"
#include "lvgm/prox.hpp"

namespace lvgm {

/// Undirected edge set over variable indices; pairs are stored with i < j.
using EdgeSet = std::set<std::pair<int, int>>;

EdgeSet support_of(const Matrix& theta, double tol = 1e-8);

struct SolveOptions {
  int max_iter = 5000;
  /// Converged when the objective moved less than this (relative) over a
  /// 10-iteration window and the subgradient residual is certified below
  /// resid_tol * (1 + ||params||).
  double tol_rel_obj = 1e-8;
  double backtrack_factor = 0.5;
  double init_step = 1.0;
  bool acceleration = true;  // FISTA momentum with restart on non-descent
  std::uint64_t seed = 0;
  double resid_tol = 1e-5;

  double support_tol = 1e-8;  // |Theta_ij| above this counts as an edge
  double rank_tol = 1e-6;     // singular values above rank_tol * sigma_max count

  /// Gaussian path: center the variables and fix alpha = 0.  Off only for
  /// testing; the reduction theorem assumes centered data.
  bool center_gaussian = true;

  /// Warm start; must be feasible when present.
  std::optional<ModelParams> init;
};

/// Hard structural constraints for stage-3 refits and held-out evaluation.
struct StructureConstraints {
  /// Off-diagonal support: entries outside the set are pinned to zero.
  std::optional<EdgeSet> support;
  /// Orthonormal basis (d x m, m may be 0); every column of L must lie in
  /// its span.
  std::optional<Matrix> colspace;
  std::optional<Vector> fix_alpha;
  std::optional<Matrix> fix_theta;
};

struct FitResult {
  ModelParams params;
  /// Canonical rank-truncated factorization of the latent block, set when the
  /// fit finishes: L_basis is d x rank orthonormal, L_coords is rank x n, and
  /// params.L is exactly their product.  This is what model files store.
  Matrix L_basis, L_coords;
  std::vector<double> objective_trace;  // composite objective per accepted iterate
  EdgeSet support;
  int rank = 0;
  int iterations = 0;
  bool converged = false;
  double kkt_residual = 0.0;  // last certified subgradient residual
  Vector center;              // per-variable means removed (gaussian path)
  double lambda = 0.0;
  double gamma = 0.0;
};

/// Proximal-gradient minimization of
///   smooth(alpha, Theta, L) + lambda ||Theta||_l1 + gamma ||L||_*
/// over the family's feasible set.  Gaussian data uses the exact conditional
/// likelihood with alpha = 0 after centering; the other kinds use the
/// pseudo-likelihood with free alpha.  Constraints are enforced exactly.
/// Throws InfeasibleStartError when the starting point (or a fixed part)
/// is infeasible; returns converged = false when the iteration budget runs
/// out or the iterates diverge.
FitResult fit(const DataMatrix& data, const FamilySpec& family, const PenaltyConfig& cfg,
              const SolveOptions& opts = {},
              const std::optional<StructureConstraints>& cons = std::nullopt);

/// Smallest lambda at which the off-diagonal part of the Theta solution is
/// exactly zero when L = 0: the largest off-diagonal absolute entry of the
/// smooth gradient at the null model (diagonal-only Gaussian fit, Theta = 0
/// with alpha at its unpenalized optimum otherwise).
double lambda_max(const DataMatrix& data, const FamilySpec& family, const PenaltyConfig& cfg);

/// Spectral-norm analogue for the latent block: the smallest gamma at which
/// L = 0 solves the problem at the same null model used by lambda_max.
double gamma_max(const DataMatrix& data, const FamilySpec& family);

/// Subgradient optimality spot-checks at a fitted point.
struct KktReport {
  /// Worst excess of the zero off-diagonal Theta condition: |g_ij| - lambda
  /// (two-sided kinds) or max(0, -g_ij) - lambda where the feasible set pins
  /// Theta_ij >= 0.
  double theta_excess = 0.0;
  /// Largest singular value of the L gradient restricted to the zero
  /// singular directions, minus gamma.
  double latent_excess = 0.0;
  bool pass = false;
};

KktReport kkt_check(const FitResult& fit_result, const DataMatrix& data,
                    const FamilySpec& family, const PenaltyConfig& cfg, double tol = 1e-5);

}  // namespace lvgm
