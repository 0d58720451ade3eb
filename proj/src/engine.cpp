#include "engine.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <cmath>
#include <limits>

namespace lvgm::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double block_dot(const Point& a, const Point& b) {
  double s = 0.0;
  if (a.a.size() > 0) s += a.a.dot(b.a);
  s += a.T.cwiseProduct(b.T).sum();
  if (a.L.size() > 0) s += a.L.cwiseProduct(b.L).sum();
  return s;
}

double block_sqnorm(const Point& a) { return block_dot(a, a); }

Point block_axpy(const Point& x, double c, const Point& y) {
  Point out;
  if (x.a.size() > 0) out.a = x.a + c * y.a;
  else out.a = x.a;
  out.T = x.T + c * y.T;
  if (x.L.size() > 0) out.L = x.L + c * y.L;
  else out.L = x.L;
  return out;
}

// Natural parameters of all node conditionals; T diagonal removed.
Matrix conditional_param_matrix(const Vector& a, const Matrix& T, const Matrix& L,
                                const Matrix& X) {
  Matrix U = -(T * X);
  U += T.diagonal().asDiagonal() * X;
  U.colwise() += a;
  if (L.size() > 0) U += L;
  return U;
}

}  // namespace

void EngineProblem::prepare() {
  d = (objective == Objective::reduced) ? sigma.rows() : X.rows();
  if (objective != Objective::reduced) {
    XXt_n = (X * X.transpose()) / static_cast<double>(X.cols());
  }
}

double EngineProblem::l1_part(const Matrix& T) const {
  double total = T.cwiseAbs().sum() - T.diagonal().cwiseAbs().sum();
  if (family.kind == Family::gaussian && penalize_diagonal) {
    total += T.diagonal().cwiseAbs().sum();
  }
  return total;
}

double EngineProblem::penalty(const Point& p, double nuc_L) const {
  return lambda * l1_part(p.T) + gamma * nuc_L;
}

double EngineProblem::smooth_value(const Point& p) const {
  switch (objective) {
    case Objective::gaussian_full: {
      Eigen::LLT<Matrix> llt(p.T);
      if (llt.info() != Eigen::Success) return kInf;
      const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
      double v = -0.5 * logdet + 0.5 * p.T.cwiseProduct(XXt_n).sum();
      if (p.L.size() > 0) {
        const double inv_n = 1.0 / static_cast<double>(X.cols());
        v += inv_n * (0.5 * p.L.cwiseProduct(llt.solve(p.L)).sum() - p.L.cwiseProduct(X).sum());
      }
      return std::isfinite(v) ? v : kInf;
    }
    case Objective::reduced: {
      Eigen::LLT<Matrix> llt(p.T);
      if (llt.info() != Eigen::Success) return kInf;
      const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
      const double v = 0.5 * p.L.cwiseProduct(llt.solve(p.L)).sum() - 0.5 * logdet -
                       p.L.cwiseProduct(sqrt_sigma).sum() + 0.5 * p.T.cwiseProduct(sigma).sum();
      return std::isfinite(v) ? v : kInf;
    }
    case Objective::pseudo: {
      const double n = static_cast<double>(X.cols());
      const Matrix U = conditional_param_matrix(p.a, p.T, p.L, X);
      const double* u = U.data();
      double rho_total = 0.0;
      switch (family.kind) {
        case Family::ising:
          for (Eigen::Index t = 0; t < U.size(); ++t) {
            const double m = std::fabs(u[t]);
            rho_total += m - 0.6931471805599453094172321 + std::log1p(std::exp(-2.0 * m));
          }
          break;
        case Family::poisson:
          for (Eigen::Index t = 0; t < U.size(); ++t) rho_total += std::exp(u[t]);
          break;
        case Family::exponential: {
          // Family feasibility also needs (alpha + L^k)_i <= -margin.
          for (Eigen::Index i = 0; i < d; ++i) {
            const double row_max = p.L.size() > 0 ? p.L.row(i).maxCoeff() : 0.0;
            if (p.a(i) + row_max > -family.strict_margin * (1.0 - 1e-12)) return kInf;
          }
          for (Eigen::Index t = 0; t < U.size(); ++t) {
            if (u[t] > -family.strict_margin) return kInf;
            rho_total -= std::log(-u[t]);
          }
          break;
        }
        case Family::gaussian:
          return kInf;
      }
      double linear = p.a.dot(X.rowwise().sum());
      if (p.L.size() > 0) linear += p.L.cwiseProduct(X).sum();
      const double quad = X.cwiseProduct(p.T * X).sum();
      const double v = (rho_total - linear + quad) / n;
      return std::isfinite(v) ? v : kInf;
    }
  }
  return kInf;
}

bool EngineProblem::smooth_grad(const Point& p, double& value, Point& grad) const {
  grad.a.resize(p.a.size());
  switch (objective) {
    case Objective::gaussian_full: {
      Eigen::LLT<Matrix> llt(p.T);
      if (llt.info() != Eigen::Success) return false;
      const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
      const Matrix theta_inv = llt.solve(Matrix::Identity(d, d));
      grad.T = -0.5 * theta_inv + 0.5 * XXt_n;
      value = -0.5 * logdet + 0.5 * p.T.cwiseProduct(XXt_n).sum();
      if (p.L.size() > 0) {
        const double inv_n = 1.0 / static_cast<double>(X.cols());
        const Matrix W = llt.solve(p.L);
        value += inv_n * (0.5 * p.L.cwiseProduct(W).sum() - p.L.cwiseProduct(X).sum());
        grad.T -= (0.5 * inv_n) * (W * W.transpose());
        grad.L = inv_n * (W - X);
      } else {
        grad.L.resize(d, 0);
      }
      grad.T = 0.5 * (grad.T + grad.T.transpose()).eval();
      return std::isfinite(value);
    }
    case Objective::reduced: {
      Eigen::LLT<Matrix> llt(p.T);
      if (llt.info() != Eigen::Success) return false;
      const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
      const Matrix theta_inv = llt.solve(Matrix::Identity(d, d));
      const Matrix W = llt.solve(p.L);
      value = 0.5 * p.L.cwiseProduct(W).sum() - 0.5 * logdet -
              p.L.cwiseProduct(sqrt_sigma).sum() + 0.5 * p.T.cwiseProduct(sigma).sum();
      grad.L = W - sqrt_sigma;
      grad.T = -0.5 * (W * W.transpose()) - 0.5 * theta_inv + 0.5 * sigma;
      grad.T = 0.5 * (grad.T + grad.T.transpose()).eval();
      return std::isfinite(value);
    }
    case Objective::pseudo: {
      const double n = static_cast<double>(X.cols());
      const Matrix U = conditional_param_matrix(p.a, p.T, p.L, X);
      Matrix S(U.rows(), U.cols());
      const double* u = U.data();
      double* s = S.data();
      double rho_total = 0.0;
      switch (family.kind) {
        case Family::ising:
          for (Eigen::Index t = 0; t < U.size(); ++t) {
            const double m = std::fabs(u[t]);
            rho_total += m - 0.6931471805599453094172321 + std::log1p(std::exp(-2.0 * m));
            s[t] = std::tanh(u[t]);
          }
          break;
        case Family::poisson:
          for (Eigen::Index t = 0; t < U.size(); ++t) {
            s[t] = std::exp(u[t]);
            rho_total += s[t];
          }
          break;
        case Family::exponential: {
          for (Eigen::Index i = 0; i < d; ++i) {
            const double row_max = p.L.size() > 0 ? p.L.row(i).maxCoeff() : 0.0;
            if (p.a(i) + row_max > -family.strict_margin * (1.0 - 1e-12)) return false;
          }
          for (Eigen::Index t = 0; t < U.size(); ++t) {
            if (u[t] > -family.strict_margin) return false;
            rho_total -= std::log(-u[t]);
            s[t] = -1.0 / u[t];
          }
          break;
        }
        case Family::gaussian:
          return false;
      }
      double linear = p.a.dot(X.rowwise().sum());
      if (p.L.size() > 0) linear += p.L.cwiseProduct(X).sum();
      value = (rho_total - linear + X.cwiseProduct(p.T * X).sum()) / n;
      if (!std::isfinite(value)) return false;

      grad.a = (S - X).rowwise().sum() / n;
      const Matrix M = S * X.transpose();
      grad.T = (XXt_n * static_cast<double>(X.cols()) - 0.5 * (M + M.transpose())) / n;
      grad.T.diagonal() = XXt_n.diagonal();
      if (p.L.size() > 0) grad.L = (S - X) / n;
      else grad.L.resize(d, 0);
      return true;
    }
  }
  return false;
}

void EngineProblem::project_grad(Point& grad) const {
  if (has_alpha_block() && !alpha_free) grad.a.setZero();
  if (!theta_free) {
    grad.T.setZero();
  } else {
    if (family.is_pseudo()) grad.T.diagonal().setZero();
    if (offdiag_free) {
      for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
          if (i != j && !(*offdiag_free)(i, j)) grad.T(i, j) = 0.0;
        }
      }
    }
  }
  if (grad.L.size() > 0 && colspace) {
    grad.L = *colspace * (colspace->transpose() * grad.L);
  }
}

double EngineProblem::prox(const Point& v, double t, Point& out) const {
  // Theta block.
  if (!theta_free) {
    out.T = fixed_theta;
  } else {
    PenaltyConfig pc{lambda, gamma, penalize_diagonal};
    out.T = prox_l1_theta(v.T, t * lambda, family, pc);
    if (offdiag_free) {
      for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
          if (i != j && !(*offdiag_free)(i, j)) out.T(i, j) = 0.0;
        }
      }
    }
  }

  // Alpha block.
  if (has_alpha_block()) out.a = alpha_free ? v.a : fixed_alpha;
  else out.a.resize(0);

  // L block; the column-space constraint composes exactly with svt.
  double nuc = 0.0;
  if (!L_free) {
    out.L.resize(d, 0);
  } else if (gamma == 0.0) {
    out.L = colspace ? Matrix(*colspace * (colspace->transpose() * v.L)) : v.L;
  } else if (colspace) {
    auto [A, a_nuc] = svt_with_norm(colspace->transpose() * v.L, t * gamma);
    out.L = *colspace * A;
    nuc = a_nuc;
  } else {
    auto [Z, z_nuc] = svt_with_norm(v.L, t * gamma);
    out.L = std::move(Z);
    nuc = z_nuc;
  }

  if (family.kind == Family::exponential && alpha_free) {
    for (Eigen::Index i = 0; i < d; ++i) {
      const double row_max = out.L.size() > 0 ? out.L.row(i).maxCoeff() : 0.0;
      out.a(i) = std::min(out.a(i), -family.strict_margin - row_max);
    }
  }
  return nuc;
}

void canonicalize_latent(FitResult& fit, double rank_tol) {
  Matrix& L = fit.params.L;
  const Eigen::Index d = fit.params.theta.rows();
  const Eigen::Index n = L.cols();
  if (L.size() == 0 || L.cwiseAbs().maxCoeff() == 0.0) {
    fit.L_basis.resize(d, 0);
    fit.L_coords.resize(0, n);
    return;
  }
  Eigen::BDCSVD<Matrix> svd(L, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector s = svd.singularValues();
  const double cut = rank_tol * s(0);
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  fit.L_basis = svd.matrixU().leftCols(r);
  fit.L_coords = s.head(r).asDiagonal() * svd.matrixV().leftCols(r).transpose();
  L = fit.L_basis * fit.L_coords;
}

int rank_of(const Matrix& L, double rank_tol) {
  if (L.size() == 0) return 0;
  const Vector s = Eigen::BDCSVD<Matrix>(L).singularValues();
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  const double cut = rank_tol * s(0);
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut) ++r;
  }
  return r;
}

namespace {

struct BacktrackOut {
  Point cand;
  double f_cand = kInf;
  double nuc = 0.0;
  double step = 0.0;
};

// Finds a step satisfying the sufficient-decrease inequality and staying in
// the open domain; the base point must be interior so this terminates.
BacktrackOut backtrack_step(const EngineProblem& prob, const Point& y, double f_y,
                            const Point& g, double step, double shrink) {
  BacktrackOut out;
  for (;;) {
    Point v = block_axpy(y, -step, g);
    Point cand;
    const double nuc = prob.prox(v, step, cand);
    const double f_cand = prob.smooth_value(cand);
    if (std::isfinite(f_cand)) {
      const Point diff = block_axpy(cand, -1.0, y);
      const double rhs = f_y + block_dot(g, diff) + block_sqnorm(diff) / (2.0 * step) +
                         1e-12 * (1.0 + std::fabs(f_y));
      if (f_cand <= rhs) {
        out.cand = std::move(cand);
        out.f_cand = f_cand;
        out.nuc = nuc;
        out.step = step;
        return out;
      }
    }
    step *= shrink;
    if (step < 1e-18) {  // numerically stuck; report no movement
      out.cand = y;
      out.f_cand = f_y;
      out.nuc = -1.0;  // caller recomputes if needed
      out.step = step;
      return out;
    }
  }
}

}  // namespace

EngineResult run_engine(const EngineProblem& prob, Point init, const SolveOptions& opts) {
  EngineResult res;
  Point x = std::move(init);
  double nuc_x = (x.L.size() > 0 && prob.gamma > 0.0) ? nuclear_norm(x.L) : 0.0;
  double F_x = prob.smooth_value(x) + prob.penalty(x, nuc_x);
  res.trace.push_back(F_x);

  Point x_prev = x;
  double t_momentum = 1.0;
  double step = opts.init_step;
  const double grow = 1.25;
  int next_certify = 0;

  for (int it = 1; it <= opts.max_iter; ++it) {
    // Extrapolate; fall back to the current iterate if the momentum point
    // leaves the domain.
    double t_next = opts.acceleration ? 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum))
                                      : 1.0;
    double beta = opts.acceleration ? (t_momentum - 1.0) / t_next : 0.0;
    Point y = (beta > 0.0) ? block_axpy(x, beta, block_axpy(x, -1.0, x_prev)) : x;

    double f_y;
    Point g;
    if (!prob.smooth_grad(y, f_y, g)) {
      y = x;
      t_next = 1.0;
      beta = 0.0;
      if (!prob.smooth_grad(y, f_y, g)) break;  // current iterate invalid; give up
    }
    prob.project_grad(g);

    step = std::min(step * grow, 1e10);
    BacktrackOut bt = backtrack_step(prob, y, f_y, g, step, opts.backtrack_factor);
    step = std::max(bt.step, 1e-18);
    double nuc_cand = bt.nuc >= 0.0 ? bt.nuc
                                    : ((bt.cand.L.size() > 0 && prob.gamma > 0.0)
                                           ? nuclear_norm(bt.cand.L)
                                           : 0.0);
    double F_cand = bt.f_cand + prob.penalty(bt.cand, nuc_cand);

    if (F_cand > F_x + 1e-12 * (1.0 + std::fabs(F_x)) && beta > 0.0) {
      // Momentum overshot; restart from the current iterate.
      t_next = 1.0;
      if (!prob.smooth_grad(x, f_y, g)) break;
      prob.project_grad(g);
      bt = backtrack_step(prob, x, f_y, g, step, opts.backtrack_factor);
      step = std::max(bt.step, 1e-18);
      nuc_cand = bt.nuc >= 0.0 ? bt.nuc
                               : ((bt.cand.L.size() > 0 && prob.gamma > 0.0)
                                      ? nuclear_norm(bt.cand.L)
                                      : 0.0);
      F_cand = bt.f_cand + prob.penalty(bt.cand, nuc_cand);
    }
    if (F_cand > F_x) F_cand = std::min(F_cand, F_x);  // guards 1e-12 float noise in the trace

    x_prev = std::move(x);
    x = std::move(bt.cand);
    F_x = F_cand;
    t_momentum = t_next;
    res.trace.push_back(F_x);
    res.iterations = it;

    if (block_sqnorm(x) > 1e16) {  // objective decreasing without bound
      res.converged = false;
      break;
    }

    const std::size_t k = res.trace.size() - 1;
    if (k >= 10 && it >= next_certify) {
      const double drop = res.trace[k - 10] - res.trace[k];
      if (drop <= opts.tol_rel_obj * (1.0 + std::fabs(F_x))) {
        // Certify stationarity with one plain prox-gradient step from x.
        double f_x;
        Point gx;
        if (prob.smooth_grad(x, f_x, gx)) {
          prob.project_grad(gx);
          BacktrackOut cert = backtrack_step(prob, x, f_x, gx, step, opts.backtrack_factor);
          double f_new;
          Point g_new;
          if (cert.step >= 1e-18 && prob.smooth_grad(cert.cand, f_new, g_new)) {
            prob.project_grad(g_new);
            // r = (x - cand)/step - g(x) + g(cand), blockwise on free blocks
            Point r = block_axpy(x, -1.0, cert.cand);
            const double inv_step = 1.0 / cert.step;
            if (r.a.size() > 0) r.a = inv_step * r.a - gx.a + g_new.a;
            r.T = inv_step * r.T - gx.T + g_new.T;
            if (r.L.size() > 0) r.L = inv_step * r.L - gx.L + g_new.L;
            prob.project_grad(r);  // residual lives in the constrained subspace
            const double resid = std::sqrt(block_sqnorm(r));
            const double mapping = std::sqrt(block_sqnorm(block_axpy(x, -1.0, cert.cand))) * inv_step;
            const double scale = 1.0 + std::sqrt(block_sqnorm(x));

            const double nuc_new = cert.nuc >= 0.0 ? cert.nuc : 0.0;
            const double F_new = cert.f_cand + prob.penalty(cert.cand, nuc_new);
            if (F_new <= F_x) {
              x_prev = x;
              x = std::move(cert.cand);
              F_x = F_new;
              res.trace.push_back(F_x);
              res.iterations = it;
            }
            res.residual = resid;
            if (resid <= opts.resid_tol * scale || mapping <= 0.01 * opts.resid_tol * scale) {
              res.converged = true;
              break;
            }
          }
        }
        next_certify = it + 25;
      }
    }
  }

  res.x = std::move(x);
  return res;
}

}  // namespace lvgm::detail
