#include "lvgm/gaussian_reduced.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

#include "engine.hpp"
#include "lvgm/errors.hpp"
#include "lvgm/objective.hpp"

namespace lvgm {

ReducedInstance reduce(const DataMatrix& data) {
  ReducedInstance inst;
  const Matrix& X = data.X;
  inst.n = X.cols();
  inst.sigma = (X * X.transpose()) / static_cast<double>(inst.n);

  Eigen::SelfAdjointEigenSolver<Matrix> es(inst.sigma);
  const Vector evals = es.eigenvalues().cwiseMax(0.0);
  inst.sqrt_sigma =
      es.eigenvectors() * evals.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();

  Eigen::BDCSVD<Matrix> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  inst.U = svd.matrixU();
  inst.V = svd.matrixV();
  return inst;
}

ReducedFit fit_reduced(const ReducedInstance& inst, const PenaltyConfig& cfg,
                       const SolveOptions& opts) {
  detail::EngineProblem prob;
  prob.objective = detail::EngineProblem::Objective::reduced;
  prob.family = FamilySpec::gaussian();
  prob.sigma = inst.sigma;
  prob.sqrt_sigma = inst.sqrt_sigma;
  prob.lambda = cfg.lambda;
  prob.gamma = cfg.gamma * std::sqrt(static_cast<double>(inst.n));
  prob.penalize_diagonal = cfg.penalize_diagonal;
  prob.prepare();
  prob.L_cols = prob.d;

  detail::Point init;
  init.a.resize(0);
  if (opts.init) {
    init.T = opts.init->theta;
    init.L = opts.init->L.size() > 0 ? opts.init->L : Matrix::Zero(prob.d, prob.d);
  } else {
    init.T = Matrix::Identity(prob.d, prob.d);
    init.L = Matrix::Zero(prob.d, prob.d);
  }
  if (!std::isfinite(prob.smooth_value(init))) {
    throw InfeasibleStartError("fit_reduced: starting point is infeasible");
  }

  detail::EngineResult er = detail::run_engine(prob, std::move(init), opts);
  ReducedFit out;
  out.theta = er.x.T;
  out.H = er.x.L;
  out.objective_trace = std::move(er.trace);
  out.iterations = er.iterations;
  out.converged = er.converged;
  out.kkt_residual = er.residual;
  return out;
}

Matrix reconstruct_L(const Matrix& H_hat, const ReducedInstance& inst) {
  return std::sqrt(static_cast<double>(inst.n)) * H_hat * inst.U * inst.V.transpose();
}

FitResult fit_gaussian_reduced(const DataMatrix& data, const PenaltyConfig& cfg,
                               const SolveOptions& opts) {
  DataMatrix working = data;
  Vector center;
  if (opts.center_gaussian) {
    center = working.variable_means();
    working.center(center);
  }
  const ReducedInstance inst = reduce(working);
  const ReducedFit rfit = fit_reduced(inst, cfg, opts);

  FitResult out;
  out.params.alpha = Vector::Zero(data.dim());
  out.params.theta = rfit.theta;
  out.params.L = reconstruct_L(rfit.H, inst);
  out.objective_trace = rfit.objective_trace;
  out.iterations = rfit.iterations;
  out.converged = rfit.converged;
  out.kkt_residual = rfit.kkt_residual;
  out.support = support_of(rfit.theta, opts.support_tol);
  out.rank = detail::rank_of(rfit.H, opts.rank_tol);
  out.center = center;
  out.lambda = cfg.lambda;
  out.gamma = cfg.gamma;
  detail::canonicalize_latent(out, opts.rank_tol);
  return out;
}

KktReport kkt_check_reduced(const ReducedFit& rfit, const ReducedInstance& inst,
                            const PenaltyConfig& cfg, double tol) {
  const SmoothEval g = reduced_smooth(rfit.theta, rfit.H, inst.sqrt_sigma, inst.sigma);
  const double gamma_eff = cfg.gamma * std::sqrt(static_cast<double>(inst.n));

  KktReport rep;
  const Eigen::Index d = rfit.theta.rows();
  double worst = -1e300;
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      if (i == j || std::fabs(rfit.theta(i, j)) > 1e-8) continue;
      worst = std::max(worst, std::fabs(g.grad_theta(i, j)) - cfg.lambda);
    }
  }
  rep.theta_excess = worst == -1e300 ? 0.0 : worst;

  Matrix G = g.grad_L;
  Eigen::BDCSVD<Matrix> svd(rfit.H, Eigen::ComputeThinU | Eigen::ComputeThinV);
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
  rep.latent_excess = top - gamma_eff;

  rep.pass = rep.theta_excess <= tol && rep.latent_excess <= tol;
  return rep;
}

}  // namespace lvgm
