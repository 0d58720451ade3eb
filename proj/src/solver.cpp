#include "lvgm/solver.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "engine.hpp"
#include "lvgm/errors.hpp"

namespace lvgm {

namespace {

using detail::EngineProblem;
using detail::Point;

Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> support_mask(const EdgeSet& edges,
                                                                Eigen::Index d) {
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask(d, d);
  mask.setConstant(false);
  for (const auto& [i, j] : edges) {
    if (i < 0 || j < 0 || i >= d || j >= d) throw std::invalid_argument("support edge out of range");
    mask(i, j) = mask(j, i) = true;
  }
  return mask;
}

void check_orthonormal(const Matrix& C) {
  if (C.cols() == 0) return;
  const Matrix G = C.transpose() * C;
  if ((G - Matrix::Identity(C.cols(), C.cols())).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("colspace basis is not orthonormal");
  }
}

// Builds the engine problem for the full (non-reduced) estimator.
EngineProblem build_problem(const Matrix& X, const FamilySpec& family, const PenaltyConfig& cfg,
                            const std::optional<StructureConstraints>& cons) {
  EngineProblem prob;
  prob.objective = family.kind == Family::gaussian ? EngineProblem::Objective::gaussian_full
                                                   : EngineProblem::Objective::pseudo;
  prob.family = family;
  prob.X = X;
  prob.lambda = cfg.lambda;
  prob.gamma = cfg.gamma;
  prob.penalize_diagonal = cfg.penalize_diagonal;
  prob.alpha_free = family.is_pseudo();
  prob.L_cols = X.cols();

  if (cons) {
    if (cons->support) prob.offdiag_free = support_mask(*cons->support, X.rows());
    if (cons->colspace) {
      check_orthonormal(*cons->colspace);
      if (cons->colspace->cols() == 0) prob.L_free = false;
      else prob.colspace = *cons->colspace;
    }
    if (cons->fix_alpha) {
      if (!family.is_pseudo()) throw std::invalid_argument("fix_alpha applies to pseudo kinds only");
      prob.alpha_free = false;
      prob.fixed_alpha = *cons->fix_alpha;
    }
    if (cons->fix_theta) {
      prob.theta_free = false;
      prob.fixed_theta = *cons->fix_theta;
    }
  }
  prob.prepare();
  return prob;
}

Point make_init(const EngineProblem& prob, const SolveOptions& opts) {
  const Eigen::Index d = prob.d;
  Point x;
  if (opts.init) {
    if (prob.has_alpha_block()) x.a = prob.alpha_free ? opts.init->alpha : prob.fixed_alpha;
    else x.a.resize(0);
    x.T = prob.theta_free ? opts.init->theta : prob.fixed_theta;
    if (!prob.L_free) {
      x.L.resize(d, 0);
    } else {
      x.L = opts.init->L.size() > 0 ? opts.init->L : Matrix::Zero(d, prob.L_cols);
      if (prob.colspace) x.L = *prob.colspace * (prob.colspace->transpose() * x.L);
    }
    if (prob.offdiag_free && prob.theta_free) {
      for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i)
          if (i != j && !(*prob.offdiag_free)(i, j)) x.T(i, j) = 0.0;
    }
    return x;
  }

  if (prob.has_alpha_block()) {
    if (prob.alpha_free) {
      x.a = prob.family.kind == Family::exponential ? Vector::Constant(d, -1.0) : Vector::Zero(d);
    } else {
      x.a = prob.fixed_alpha;
    }
  } else {
    x.a.resize(0);
  }
  if (prob.theta_free) {
    x.T = prob.family.kind == Family::gaussian ? Matrix(Matrix::Identity(d, d))
                                               : Matrix(Matrix::Zero(d, d));
  } else {
    x.T = prob.fixed_theta;
  }
  x.L = prob.L_free ? Matrix::Zero(d, prob.L_cols) : Matrix(d, 0);
  return x;
}

FitResult run_fit(const EngineProblem& prob, const SolveOptions& opts) {
  Point init = make_init(prob, opts);
  if (!std::isfinite(prob.smooth_value(init))) {
    throw InfeasibleStartError("fit: starting point (or fixed part) is infeasible");
  }
  detail::EngineResult er = detail::run_engine(prob, std::move(init), opts);

  FitResult out;
  out.params.alpha = prob.has_alpha_block() ? er.x.a : Vector::Zero(prob.d);
  out.params.theta = er.x.T;
  out.params.L = er.x.L.size() > 0 ? er.x.L : Matrix::Zero(prob.d, prob.L_cols);
  out.objective_trace = std::move(er.trace);
  out.iterations = er.iterations;
  out.converged = er.converged;
  out.kkt_residual = er.residual;
  out.support = support_of(er.x.T, opts.support_tol);
  out.rank = detail::rank_of(er.x.L, opts.rank_tol);
  out.lambda = prob.lambda;
  out.gamma = prob.gamma;
  detail::canonicalize_latent(out, opts.rank_tol);
  return out;
}

}  // namespace

EdgeSet support_of(const Matrix& theta, double tol) {
  EdgeSet edges;
  for (Eigen::Index j = 0; j < theta.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      if (std::fabs(theta(i, j)) > tol || std::fabs(theta(j, i)) > tol) {
        edges.emplace(static_cast<int>(i), static_cast<int>(j));
      }
    }
  }
  return edges;
}

FitResult fit(const DataMatrix& data, const FamilySpec& family, const PenaltyConfig& cfg,
              const SolveOptions& opts, const std::optional<StructureConstraints>& cons) {
  if (data.samples() < 1) throw std::invalid_argument("fit: empty data");
  const auto [bad_i, bad_k] = data.first_domain_violation(family);
  if (bad_i >= 0) {
    throw std::invalid_argument("fit: entry (variable " + std::to_string(bad_i) + ", sample " +
                                std::to_string(bad_k) + ") outside the " +
                                family_name(family.kind) + " domain");
  }

  Matrix X = data.X;
  Vector center;
  if (family.kind == Family::gaussian && opts.center_gaussian) {
    center = X.rowwise().mean();
    X.colwise() -= center;
  }

  EngineProblem prob = build_problem(X, family, cfg, cons);
  FitResult out = run_fit(prob, opts);
  out.center = center;
  return out;
}

double lambda_max(const DataMatrix& data, const FamilySpec& family, const PenaltyConfig& /*cfg*/) {
  const Eigen::Index d = data.dim();
  const double n = static_cast<double>(data.samples());

  if (family.kind == Family::gaussian) {
    Matrix X = data.X;
    X.colwise() -= Vector(X.rowwise().mean());
    const Matrix S = (X * X.transpose()) / n;
    // Gradient at the diagonal-only fit is (S - diag(S)^{-1 on diag})/2;
    // off-diagonal entries are S_ij / 2.
    double best = 0.0;
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index i = 0; i < d; ++i)
        if (i != j) best = std::max(best, 0.5 * std::fabs(S(i, j)));
    return best;
  }

  // Null model: Theta = 0, L = 0, alpha at its unpenalized optimum, where
  // rho'(alpha_i) equals the sample mean of variable i.
  const Vector m = data.variable_means();
  Vector s(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    switch (family.kind) {
      case Family::ising: {
        const double c = std::clamp(m(i), -1.0 + 1e-9, 1.0 - 1e-9);
        s(i) = c;
        break;
      }
      case Family::poisson:
        s(i) = std::max(m(i), 1e-12);
        break;
      case Family::exponential:
        s(i) = std::max(m(i), 1e-12);
        break;
      default:
        s(i) = 0.0;
    }
  }
  const Matrix second = (data.X * data.X.transpose()) / n;
  double best = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      if (i == j) continue;
      const double g = second(i, j) - 0.5 * (s(i) * m(j) + s(j) * m(i));
      best = std::max(best, std::fabs(g));
    }
  }
  return best;
}

double gamma_max(const DataMatrix& data, const FamilySpec& family) {
  const Eigen::Index d = data.dim();
  const double n = static_cast<double>(data.samples());
  if (family.kind == Family::gaussian) {
    Matrix X = data.X;
    X.colwise() -= Vector(X.rowwise().mean());
    // grad_L at (Theta diag, L = 0) is -X/n regardless of the diagonal.
    return Eigen::BDCSVD<Matrix>(X).singularValues()(0) / n;
  }
  const Vector m = data.variable_means();
  Vector s(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (family.kind == Family::ising) s(i) = std::clamp(m(i), -1.0 + 1e-9, 1.0 - 1e-9);
    else s(i) = std::max(m(i), 1e-12);
  }
  Matrix G = -data.X;
  G.colwise() += s;  // rho'(alpha*) per row minus the data
  return Eigen::BDCSVD<Matrix>(G).singularValues()(0) / n;
}

KktReport kkt_check(const FitResult& fit_result, const DataMatrix& data, const FamilySpec& family,
                    const PenaltyConfig& cfg, double tol) {
  const ModelParams& p = fit_result.params;
  Matrix X = data.X;
  if (fit_result.center.size() > 0) X.colwise() -= fit_result.center;

  SmoothEval g = family.kind == Family::gaussian
                     ? gaussian_smooth(p.theta, p.L, X)
                     : pseudo_smooth(family, p.alpha, p.theta, p.L, X);

  KktReport rep;
  const bool one_sided = family.kind == Family::poisson || family.kind == Family::exponential;
  const Eigen::Index d = p.theta.rows();
  double worst = -1e300;
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      if (i == j || std::fabs(p.theta(i, j)) > 1e-8) continue;
      // At a zero entry the l1 subgradient absorbs |g| up to lambda; with the
      // nonnegativity constraint only a negative gradient can pull the entry
      // off zero, so the condition is one-sided.
      const double excess =
          (one_sided ? std::max(0.0, -g.grad_theta(i, j)) : std::fabs(g.grad_theta(i, j))) -
          cfg.lambda;
      worst = std::max(worst, excess);
    }
  }
  rep.theta_excess = worst == -1e300 ? 0.0 : worst;

  rep.latent_excess = 0.0;
  if (p.L.size() > 0 && cfg.gamma > 0.0) {
    Matrix G = g.grad_L;
    Eigen::BDCSVD<Matrix> svd(p.L, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector s = svd.singularValues();
    const double cut = s.size() > 0 ? 1e-6 * s(0) : 0.0;
    Eigen::Index r = 0;
    while (r < s.size() && s(r) > cut) ++r;
    if (r > 0) {
      const Matrix U = svd.matrixU().leftCols(r);
      const Matrix V = svd.matrixV().leftCols(r);
      G = G - U * (U.transpose() * G);
      G = G - (G * V) * V.transpose();
    }
    const double top = G.size() > 0 ? Eigen::BDCSVD<Matrix>(G).singularValues()(0) : 0.0;
    rep.latent_excess = top - cfg.gamma;
  }

  rep.pass = rep.theta_excess <= tol && rep.latent_excess <= tol;
  return rep;
}

}  // namespace lvgm
