#include "lvgm/objective.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

#include "lvgm/errors.hpp"

namespace lvgm {

namespace {

Eigen::LLT<Matrix> require_pd(const Matrix& theta, const char* where) {
  Eigen::LLT<Matrix> llt(theta);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefiniteError(std::string(where) + ": theta is not positive definite");
  }
  return llt;
}

double logdet_from_llt(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

// Natural parameters of all node conditionals at once: U = alpha 1' + L - Theta_offdiag X.
Matrix conditional_params(const Vector& alpha, const Matrix& theta, const Matrix& L,
                          const Matrix& X) {
  Matrix U = -(theta * X);
  U += theta.diagonal().asDiagonal() * X;  // remove the self-coupling
  U.colwise() += alpha;
  if (L.size() > 0) U += L;
  return U;
}

void check_pseudo_family(const FamilySpec& family) {
  if (family.kind == Family::gaussian) {
    throw std::invalid_argument("pseudo_smooth: gaussian kind uses gaussian_smooth");
  }
}

// Applies rho elementwise; returns false when an exponential-kind entry is
// outside the open domain.
bool rho_sum(const FamilySpec& family, const Matrix& U, double& total) {
  total = 0.0;
  const double* p = U.data();
  const Eigen::Index m = U.size();
  switch (family.kind) {
    case Family::ising:
      for (Eigen::Index t = 0; t < m; ++t) {
        const double a = std::fabs(p[t]);
        total += a - 0.6931471805599453094172321 + std::log1p(std::exp(-2.0 * a));
      }
      return true;
    case Family::poisson:
      for (Eigen::Index t = 0; t < m; ++t) total += std::exp(p[t]);
      return true;
    case Family::exponential:
      for (Eigen::Index t = 0; t < m; ++t) {
        if (p[t] > -family.strict_margin) return false;
        total -= std::log(-p[t]);
      }
      return true;
    case Family::gaussian:
      return false;
  }
  return false;
}

bool rho_prime_matrix(const FamilySpec& family, const Matrix& U, Matrix& S) {
  S.resize(U.rows(), U.cols());
  const double* p = U.data();
  double* q = S.data();
  const Eigen::Index m = U.size();
  switch (family.kind) {
    case Family::ising:
      for (Eigen::Index t = 0; t < m; ++t) q[t] = std::tanh(p[t]);
      return true;
    case Family::poisson:
      for (Eigen::Index t = 0; t < m; ++t) q[t] = std::exp(p[t]);
      return true;
    case Family::exponential:
      for (Eigen::Index t = 0; t < m; ++t) {
        if (p[t] > -family.strict_margin) return false;
        q[t] = -1.0 / p[t];
      }
      return true;
    case Family::gaussian:
      return false;
  }
  return false;
}

}  // namespace

double gaussian_smooth_value(const Matrix& theta, const Matrix& L, const Matrix& X,
                             Eigen::Index n_norm) {
  const double n = static_cast<double>(n_norm > 0 ? n_norm : X.cols());
  const auto llt = require_pd(theta, "gaussian_smooth");
  double value = -0.5 * logdet_from_llt(llt) + (0.5 / n) * (X.cwiseProduct(theta * X)).sum();
  if (L.size() > 0) {
    value += (0.5 / n) * L.cwiseProduct(llt.solve(L)).sum() - (1.0 / n) * L.cwiseProduct(X).sum();
  }
  return value;
}

SmoothEval gaussian_smooth(const Matrix& theta, const Matrix& L, const Matrix& X,
                           Eigen::Index n_norm) {
  const double n = static_cast<double>(n_norm > 0 ? n_norm : X.cols());
  const Eigen::Index d = theta.rows();
  const auto llt = require_pd(theta, "gaussian_smooth");

  SmoothEval out;
  const Matrix theta_inv = llt.solve(Matrix::Identity(d, d));
  out.grad_alpha = Vector::Zero(d);
  out.grad_theta = -0.5 * theta_inv + (0.5 / n) * (X * X.transpose());
  out.value = -0.5 * logdet_from_llt(llt) + (0.5 / n) * (X.cwiseProduct(theta * X)).sum();
  if (L.size() > 0) {
    const Matrix W = llt.solve(L);  // Theta^{-1} L
    out.value += (0.5 / n) * L.cwiseProduct(W).sum() - (1.0 / n) * L.cwiseProduct(X).sum();
    out.grad_theta -= (0.5 / n) * (W * W.transpose());
    out.grad_L = (1.0 / n) * (W - X);
  } else {
    out.grad_L.resize(d, 0);
  }
  out.grad_theta = 0.5 * (out.grad_theta + out.grad_theta.transpose()).eval();
  return out;
}

double pseudo_smooth_value(const FamilySpec& family, const Vector& alpha, const Matrix& theta,
                           const Matrix& L, const Matrix& X) {
  check_pseudo_family(family);
  const double n = static_cast<double>(X.cols());
  const Matrix U = conditional_params(alpha, theta, L, X);
  double rho_total = 0.0;
  if (!rho_sum(family, U, rho_total)) {
    throw std::domain_error("pseudo_smooth: conditional parameter outside rho domain");
  }
  double linear = alpha.dot(X.rowwise().sum());
  if (L.size() > 0) linear += L.cwiseProduct(X).sum();
  const double quad = X.cwiseProduct(theta * X).sum();
  return (rho_total - linear + quad) / n;
}

SmoothEval pseudo_smooth(const FamilySpec& family, const Vector& alpha, const Matrix& theta,
                         const Matrix& L, const Matrix& X) {
  check_pseudo_family(family);
  const double n = static_cast<double>(X.cols());
  const Eigen::Index d = theta.rows();
  const Matrix U = conditional_params(alpha, theta, L, X);

  double rho_total = 0.0;
  Matrix S;
  if (!rho_sum(family, U, rho_total) || !rho_prime_matrix(family, U, S)) {
    throw std::domain_error("pseudo_smooth: conditional parameter outside rho domain");
  }

  SmoothEval out;
  double linear = alpha.dot(X.rowwise().sum());
  if (L.size() > 0) linear += L.cwiseProduct(X).sum();
  const Matrix XXt = X * X.transpose();
  out.value = (rho_total - linear + X.cwiseProduct(theta * X).sum()) / n;
  out.grad_alpha = (S - X).rowwise().sum() / n;
  out.grad_L = (S - X) / n;

  // Each off-diagonal pair is hit by the conditionals of both of its nodes
  // and by the unhalved quadratic term; the rho part has no diagonal.
  const Matrix M = S * X.transpose();
  out.grad_theta = (XXt - 0.5 * (M + M.transpose())) / n;
  out.grad_theta.diagonal() = XXt.diagonal() / n;
  if (L.size() == 0) out.grad_L.resize(d, 0);
  return out;
}

double reduced_smooth_value(const Matrix& theta, const Matrix& H, const Matrix& sqrt_sigma,
                            const Matrix& sigma) {
  const auto llt = require_pd(theta, "reduced_smooth");
  return 0.5 * H.cwiseProduct(llt.solve(H)).sum() - 0.5 * logdet_from_llt(llt) -
         H.cwiseProduct(sqrt_sigma).sum() + 0.5 * theta.cwiseProduct(sigma).sum();
}

SmoothEval reduced_smooth(const Matrix& theta, const Matrix& H, const Matrix& sqrt_sigma,
                          const Matrix& sigma) {
  const Eigen::Index d = theta.rows();
  const auto llt = require_pd(theta, "reduced_smooth");
  const Matrix W = llt.solve(H);
  const Matrix theta_inv = llt.solve(Matrix::Identity(d, d));

  SmoothEval out;
  out.value = 0.5 * H.cwiseProduct(W).sum() - 0.5 * logdet_from_llt(llt) -
              H.cwiseProduct(sqrt_sigma).sum() + 0.5 * theta.cwiseProduct(sigma).sum();
  out.grad_alpha = Vector::Zero(d);
  out.grad_L = W - sqrt_sigma;
  out.grad_theta = -0.5 * (W * W.transpose()) - 0.5 * theta_inv + 0.5 * sigma;
  out.grad_theta = 0.5 * (out.grad_theta + out.grad_theta.transpose()).eval();
  return out;
}

}  // namespace lvgm
