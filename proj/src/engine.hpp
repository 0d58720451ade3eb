#pragma once

// Internal proximal-gradient engine shared by fit(), the reduced Gaussian
// path, and held-out evaluation.  Not installed.

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "lvgm/family.hpp"
#include "lvgm/prox.hpp"
#include "lvgm/solver.hpp"

namespace lvgm::detail {

struct Point {
  Vector a;  // alpha; size 0 when the objective has no alpha block
  Matrix T;  // theta, always d x d
  Matrix L;  // latent block: d x n, d x d (reduced), or d x 0 when frozen at 0
};

struct EngineProblem {
  enum class Objective { gaussian_full, pseudo, reduced };
  Objective objective = Objective::gaussian_full;
  FamilySpec family;  // gaussian for gaussian_full/reduced

  Matrix X;                  // data (gaussian_full, pseudo)
  Matrix sigma, sqrt_sigma;  // reduced problem inputs

  double lambda = 0.0;
  double gamma = 0.0;  // already scaled by sqrt(n) for the reduced problem
  bool penalize_diagonal = false;

  bool alpha_free = false;
  bool theta_free = true;
  bool L_free = true;  // false: L pinned to zero (stored d x 0)
  Vector fixed_alpha;  // participates in the objective when alpha block exists
  Matrix fixed_theta;

  std::optional<Matrix> colspace;                           // orthonormal d x m
  std::optional<Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>> offdiag_free;

  Eigen::Index d = 0;
  Eigen::Index L_cols = 0;  // columns of the L block when free

  // Precomputed pieces (set by prepare()).
  Matrix XXt_n;  // X X' / n

  void prepare();
  bool has_alpha_block() const { return objective == Objective::pseudo; }

  double smooth_value(const Point& p) const;  // +inf outside the open domain
  // Returns false outside the domain; fills value and gradients otherwise.
  bool smooth_grad(const Point& p, double& value, Point& grad) const;
  void project_grad(Point& grad) const;
  // Composite prox at step t; returns the nuclear norm of the L block.
  double prox(const Point& v, double t, Point& out) const;
  double penalty(const Point& p, double nuc_L) const;
  double l1_part(const Matrix& T) const;
};

struct EngineResult {
  Point x;
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
};

EngineResult run_engine(const EngineProblem& prob, Point init, const SolveOptions& opts);

int rank_of(const Matrix& L, double rank_tol);

/// Replaces params.L by its rank-truncated factorization L_basis * L_coords;
/// the perturbation is below rank_tol * sigma_max.  Keeps files small and
/// makes serialization round trips exact.
void canonicalize_latent(FitResult& fit, double rank_tol);

}  // namespace lvgm::detail
