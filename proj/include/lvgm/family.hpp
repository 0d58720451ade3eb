#pragma once

#include <Eigen/Dense>
#include <string>

namespace lvgm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Family { gaussian, ising, poisson, exponential };

std::string family_name(Family kind);
Family family_from_name(const std::string& name);

/// One of the four pairwise exponential families.  The kind fixes the sample
/// domain, the one-dimensional conditional log-partition rho, the feasibility
/// rules for (alpha, Theta), and the conditional sampling law.
struct FamilySpec {
  Family kind = Family::gaussian;
  /// Interiority margin for the open constraints (Theta > 0 for gaussian,
  /// alpha_i < 0 for exponential); they are enforced as closed constraints
  /// shrunk by this margin.  Must be > 0 for gaussian and exponential kinds.
  double strict_margin = 1e-8;

  static FamilySpec gaussian(double margin = 1e-8) { return {Family::gaussian, margin}; }
  static FamilySpec ising() { return {Family::ising, 0.0}; }
  static FamilySpec poisson() { return {Family::poisson, 0.0}; }
  static FamilySpec exponential(double margin = 1e-8) { return {Family::exponential, margin}; }

  /// "R", "{-1,+1}", "Z+", or "R+".
  const char* domain_description() const;
  bool value_in_domain(double x) const;
  bool is_pseudo() const { return kind != Family::gaussian; }
};

/// One-dimensional conditional log-partition:
///   ising        log cosh(u)
///   poisson      exp(u)
///   exponential  -log(-u), defined for u < 0
///   gaussian     u^2/2 + log(2 pi)/2  (testing only; the gaussian pipeline
///                uses log_partition_gaussian instead)
/// Throws std::domain_error when the exponential kind receives
/// u >= -strict_margin.
double rho(const FamilySpec& family, double u);

/// Derivative of rho: tanh(u), exp(u), -1/u, u.  Same domain as rho.
double rho_prime(const FamilySpec& family, double u);

/// Exact Gaussian log-partition
///   (alpha' Theta^{-1} alpha - log det Theta + d log 2 pi) / 2.
/// Throws NotPositiveDefiniteError when the Cholesky factorization fails.
double log_partition_gaussian(const Vector& alpha, const Matrix& theta);

/// Membership in the family's valid-parameter set, with alpha_eff standing
/// for alpha + L^(k):
///   gaussian     Theta pd with min eigenvalue > strict_margin
///   ising        diag(Theta) = 0
///   poisson      diag(Theta) = 0 and Theta_ij >= 0
///   exponential  poisson rules and alpha_eff_i <= -strict_margin for all i
bool is_feasible(const FamilySpec& family, const Vector& alpha_eff, const Matrix& theta);

/// Natural parameter of x_i conditioned on the rest:
///   u_i = alpha_i + latent_effect_i - sum_{j != i} Theta_ij x_j.
double node_conditional_param(const FamilySpec& family, const Vector& alpha,
                              const Vector& latent_effect, const Matrix& theta,
                              const Vector& x, Eigen::Index i);

/// Natural-parameter triple for one model.  L has one column per sample and
/// plays the role of B z^(k); population models carry B separately.
struct ModelParams {
  Vector alpha;
  Matrix theta;
  Matrix L;
};

}  // namespace lvgm
