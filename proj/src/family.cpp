#include "lvgm/family.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "lvgm/errors.hpp"

namespace lvgm {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112353;

void require_exp_domain(const FamilySpec& family, double u) {
  if (u > -family.strict_margin) {
    throw std::domain_error("rho: exponential kind requires u <= -strict_margin, got u=" +
                            std::to_string(u));
  }
}
}  // namespace

std::string family_name(Family kind) {
  switch (kind) {
    case Family::gaussian: return "gaussian";
    case Family::ising: return "ising";
    case Family::poisson: return "poisson";
    case Family::exponential: return "exponential";
  }
  return "unknown";
}

Family family_from_name(const std::string& name) {
  if (name == "gaussian") return Family::gaussian;
  if (name == "ising") return Family::ising;
  if (name == "poisson") return Family::poisson;
  if (name == "exponential") return Family::exponential;
  throw std::invalid_argument("unknown family: " + name);
}

const char* FamilySpec::domain_description() const {
  switch (kind) {
    case Family::gaussian: return "R";
    case Family::ising: return "{-1,+1}";
    case Family::poisson: return "Z+";
    case Family::exponential: return "R+";
  }
  return "";
}

bool FamilySpec::value_in_domain(double x) const {
  if (!std::isfinite(x)) return false;
  switch (kind) {
    case Family::gaussian: return true;
    case Family::ising: return x == 1.0 || x == -1.0;
    case Family::poisson: return x >= 0.0 && x == std::floor(x);
    case Family::exponential: return x > 0.0;
  }
  return false;
}

double rho(const FamilySpec& family, double u) {
  switch (family.kind) {
    case Family::ising:
      // log cosh without overflow: |u| - log 2 + log1p(e^{-2|u|}).
      return std::fabs(u) - 0.6931471805599453094172321 + std::log1p(std::exp(-2.0 * std::fabs(u)));
    case Family::poisson:
      return std::exp(u);
    case Family::exponential:
      require_exp_domain(family, u);
      return -std::log(-u);
    case Family::gaussian:
      return 0.5 * u * u + 0.5 * kLog2Pi;
  }
  return 0.0;
}

double rho_prime(const FamilySpec& family, double u) {
  switch (family.kind) {
    case Family::ising: return std::tanh(u);
    case Family::poisson: return std::exp(u);
    case Family::exponential:
      require_exp_domain(family, u);
      return -1.0 / u;
    case Family::gaussian: return u;
  }
  return 0.0;
}

double log_partition_gaussian(const Vector& alpha, const Matrix& theta) {
  Eigen::LLT<Matrix> llt(theta);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefiniteError("log_partition_gaussian: theta is not positive definite");
  }
  const double quad = alpha.dot(llt.solve(alpha));
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double d = static_cast<double>(alpha.size());
  return 0.5 * (quad - logdet + d * kLog2Pi);
}

bool is_feasible(const FamilySpec& family, const Vector& alpha_eff, const Matrix& theta) {
  const Eigen::Index d = theta.rows();
  if (family.kind == Family::gaussian) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(theta, Eigen::EigenvaluesOnly);
    return es.info() == Eigen::Success && es.eigenvalues().minCoeff() > family.strict_margin;
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    if (theta(i, i) != 0.0) return false;
  }
  if (family.kind == Family::ising) return true;
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      if (theta(i, j) < 0.0) return false;
    }
  }
  if (family.kind == Family::poisson) return true;
  return (alpha_eff.array() <= -family.strict_margin).all();
}

double node_conditional_param(const FamilySpec& /*family*/, const Vector& alpha,
                              const Vector& latent_effect, const Matrix& theta,
                              const Vector& x, Eigen::Index i) {
  const double coupling = theta.row(i).dot(x) - theta(i, i) * x(i);
  return alpha(i) + latent_effect(i) - coupling;
}

}  // namespace lvgm
