#include "lvgm/metrics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "lvgm/errors.hpp"
#include "lvgm/objective.hpp"

namespace lvgm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112353;

Matrix latent_basis(const FitResult& model, double rank_tol) {
  if (model.L_basis.rows() > 0) return model.L_basis;  // canonical factors present
  const Matrix& L = model.params.L;
  if (L.size() == 0) return Matrix(model.params.theta.rows(), 0);
  Eigen::BDCSVD<Matrix> svd(L, Eigen::ComputeThinU);
  const Vector s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0.0) return Matrix(L.rows(), 0);
  const double cut = rank_tol * s(0);
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  return svd.matrixU().leftCols(r);
}

}  // namespace

std::pair<double, double> fdr_pwr(const EdgeSet& estimated, const EdgeSet& truth) {
  std::size_t false_edges = 0;
  std::size_t true_edges = 0;
  for (const auto& e : estimated) {
    if (truth.count(e)) ++true_edges;
    else ++false_edges;
  }
  const double fdr = static_cast<double>(false_edges) /
                     std::max<double>(1.0, static_cast<double>(estimated.size()));
  const double pwr = static_cast<double>(true_edges) /
                     std::max<double>(1.0, static_cast<double>(truth.size()));
  return {fdr, pwr};
}

bool recovery_success(const FitResult& fit_result, const Matrix& truth_theta, int truth_rank) {
  return fit_result.support == support_of(truth_theta, 1e-12) && fit_result.rank == truth_rank;
}

double holdout_nll(const FitResult& model, const DataMatrix& X_test, const FamilySpec& family,
                   const SolveOptions& opts) {
  const Eigen::Index d = model.params.theta.rows();
  if (X_test.dim() != d) throw std::invalid_argument("holdout_nll: dimension mismatch");
  const Matrix C = latent_basis(model, opts.rank_tol);

  if (family.kind == Family::gaussian) {
    Matrix X = X_test.X;
    if (model.center.size() > 0) X.colwise() -= model.center;
    const double constant = 0.5 * static_cast<double>(d) * kLog2Pi;
    if (C.cols() == 0) {
      return gaussian_smooth_value(model.params.theta, Matrix(d, 0), X) + constant;
    }
    // Theta is fixed, so the optimal L = C A solves a strictly convex
    // quadratic: A = (C' Theta^{-1} C)^{-1} C' X.
    Eigen::LLT<Matrix> llt(model.params.theta);
    if (llt.info() != Eigen::Success) {
      throw NotPositiveDefiniteError("holdout_nll: model theta is not positive definite");
    }
    const Matrix W = llt.solve(C);
    const Matrix G = C.transpose() * W;  // r x r
    const Matrix A = G.ldlt().solve(C.transpose() * X);
    const Matrix L = C * A;
    return gaussian_smooth_value(model.params.theta, L, X) + constant;
  }

  const auto [bad_i, bad_k] = X_test.first_domain_violation(family);
  if (bad_i >= 0) {
    throw std::invalid_argument("holdout_nll: test entry (variable " + std::to_string(bad_i) +
                                ", sample " + std::to_string(bad_k) + ") outside the " +
                                family_name(family.kind) + " domain");
  }
  if (C.cols() == 0) {
    return pseudo_smooth_value(family, model.params.alpha, model.params.theta, Matrix(d, 0),
                               X_test.X);
  }
  StructureConstraints cons;
  cons.fix_alpha = model.params.alpha;
  cons.fix_theta = model.params.theta;
  cons.colspace = C;
  SolveOptions so = opts;
  so.init.reset();
  FitResult refit = fit(X_test, family, PenaltyConfig{0.0, 0.0, false}, so, cons);
  return pseudo_smooth_value(family, refit.params.alpha, refit.params.theta, refit.params.L,
                             X_test.X);
}

}  // namespace lvgm
