#include "lvgm/prox.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lvgm {

namespace {

double soft(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// svt of a wide/tall matrix through the Gram matrix of its short side; one
// small eigendecomposition instead of an SVD of the full rectangle.
std::pair<Matrix, double> svt_gram(const Matrix& M, double t, bool wide) {
  const Matrix G = wide ? Matrix(M * M.transpose()) : Matrix(M.transpose() * M);
  Eigen::SelfAdjointEigenSolver<Matrix> es(G);
  const Vector evals = es.eigenvalues().cwiseMax(0.0);
  const Eigen::Index m = evals.size();
  Vector scale = Vector::Zero(m);
  double nuc = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sigma = std::sqrt(evals(i));
    const double kept = std::max(sigma - t, 0.0);
    nuc += kept;
    if (kept > 0.0) scale(i) = kept / sigma;
  }
  const Matrix& U = es.eigenvectors();
  const Matrix P = U * scale.asDiagonal() * U.transpose();
  Matrix Z = wide ? Matrix(P * M) : Matrix(M * P);
  return {std::move(Z), nuc};
}

}  // namespace

Matrix prox_l1_theta(const Matrix& M, double t, const FamilySpec& family,
                     const PenaltyConfig& cfg) {
  if (t < 0.0) throw std::invalid_argument("prox_l1_theta: t must be positive");
  const Eigen::Index d = M.rows();
  Matrix Z(d, d);
  const bool one_sided = family.kind == Family::poisson || family.kind == Family::exponential;
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      if (i == j) continue;
      Z(i, j) = one_sided ? std::max(M(i, j) - t, 0.0) : soft(M(i, j), t);
    }
  }
  if (family.kind == Family::gaussian) {
    for (Eigen::Index i = 0; i < d; ++i) {
      Z(i, i) = cfg.penalize_diagonal ? soft(M(i, i), t) : M(i, i);
    }
  } else {
    Z.diagonal().setZero();
  }
  return Z;
}

std::pair<Matrix, double> svt_with_norm(const Matrix& M, double t) {
  if (t < 0.0) throw std::invalid_argument("svt: t must be nonnegative");
  if (M.size() == 0) return {M, 0.0};
  const Eigen::Index r = M.rows(), c = M.cols();
  // Route strongly rectangular inputs through the short-side Gram matrix.
  if (std::min(r, c) * 4 <= std::max(r, c)) return svt_gram(M, t, r < c);

  Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector s = svd.singularValues();
  double nuc = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    s(i) = std::max(s(i) - t, 0.0);
    nuc += s(i);
  }
  return {svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose(), nuc};
}

Matrix svt(const Matrix& M, double t) { return svt_with_norm(M, t).first; }

std::pair<Vector, Matrix> project_domain(const FamilySpec& family, Vector alpha, Matrix L,
                                         double margin) {
  if (family.kind != Family::exponential) return {std::move(alpha), std::move(L)};
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    const double row_max = L.size() > 0 ? L.row(i).maxCoeff() : 0.0;
    alpha(i) = std::min(alpha(i), -margin - row_max);
  }
  return {std::move(alpha), std::move(L)};
}

double nuclear_norm(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  return Eigen::BDCSVD<Matrix>(M).singularValues().sum();
}

double l1_theta_value(const Matrix& theta, const FamilySpec& family, const PenaltyConfig& cfg) {
  double total = theta.cwiseAbs().sum() - theta.diagonal().cwiseAbs().sum();
  if (family.kind == Family::gaussian && cfg.penalize_diagonal) {
    total += theta.diagonal().cwiseAbs().sum();
  }
  return cfg.lambda * total;
}

}  // namespace lvgm
