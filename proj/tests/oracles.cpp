#include "oracles.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oracle {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}
}  // namespace

Matrix random_gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix M(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = normal(rng);
  return M;
}

Matrix random_orthonormal(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  const Matrix G = random_gaussian(rng, rows, cols);
  Eigen::HouseholderQR<Matrix> qr(G);
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

Matrix random_spd(std::mt19937_64& rng, Eigen::Index d, double min_eig) {
  const Matrix G = random_gaussian(rng, d, d, 0.5);
  return G * G.transpose() / static_cast<double>(d) + min_eig * Matrix::Identity(d, d);
}

Matrix random_coupling(std::mt19937_64& rng, Eigen::Index d, double scale, bool one_sided) {
  Matrix T = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const double v = one_sided ? uniform(rng, 0.0, scale) : uniform(rng, -scale, scale);
      T(i, j) = T(j, i) = v;
    }
  }
  return T;
}

TestPoint random_feasible_point(const lvgm::FamilySpec& family, Eigen::Index d, Eigen::Index n,
                                std::mt19937_64& rng) {
  TestPoint p;
  switch (family.kind) {
    case lvgm::Family::gaussian:
      p.alpha = Vector::Zero(d);
      p.theta = random_spd(rng, d, 0.4);
      p.L = random_gaussian(rng, d, n, 0.3);
      p.X = random_gaussian(rng, d, n, 1.0);
      break;
    case lvgm::Family::ising: {
      p.theta = random_coupling(rng, d, 0.5, false);
      p.alpha = random_gaussian(rng, d, 1, 0.4);
      p.L = random_gaussian(rng, d, n, 0.3);
      p.X.resize(d, n);
      for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index i = 0; i < d; ++i) p.X(i, k) = rng() & 1 ? 1.0 : -1.0;
      break;
    }
    case lvgm::Family::poisson: {
      p.theta = random_coupling(rng, d, 0.2, true);
      p.alpha = random_gaussian(rng, d, 1, 0.3);
      p.L = random_gaussian(rng, d, n, 0.2);
      p.X.resize(d, n);
      std::uniform_int_distribution<int> counts(0, 4);
      for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index i = 0; i < d; ++i) p.X(i, k) = static_cast<double>(counts(rng));
      break;
    }
    case lvgm::Family::exponential: {
      p.theta = random_coupling(rng, d, 0.2, true);
      p.alpha.resize(d);
      for (Eigen::Index i = 0; i < d; ++i) p.alpha(i) = uniform(rng, -2.5, -1.5);
      p.L.resize(d, n);
      for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index i = 0; i < d; ++i) p.L(i, k) = uniform(rng, -0.3, 0.0);
      p.X.resize(d, n);
      for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index i = 0; i < d; ++i) p.X(i, k) = uniform(rng, 0.1, 2.0);
      break;
    }
  }
  return p;
}

double max_grad_rel_err(const ValueFn& f, const Vector& alpha, const Matrix& theta,
                        const Matrix& L, const lvgm::SmoothEval& grad, bool check_alpha,
                        bool check_L, double h) {
  const auto rel = [](double fd, double an) {
    return std::fabs(fd - an) / std::max({1e-2, std::fabs(fd), std::fabs(an)});
  };
  double worst = 0.0;

  if (check_alpha) {
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
      Vector ap = alpha, am = alpha;
      ap(i) += h;
      am(i) -= h;
      const double fd = (f(ap, theta, L) - f(am, theta, L)) / (2.0 * h);
      worst = std::max(worst, rel(fd, grad.grad_alpha(i)));
    }
  }

  const Eigen::Index d = theta.rows();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      Matrix tp = theta, tm = theta;
      tp(i, j) += h;
      tm(i, j) -= h;
      if (i != j) {
        tp(j, i) += h;
        tm(j, i) -= h;
      }
      const double fd = (f(alpha, tp, L) - f(alpha, tm, L)) / (2.0 * h);
      const double an = i == j ? grad.grad_theta(i, i) : 2.0 * grad.grad_theta(i, j);
      worst = std::max(worst, rel(fd, an));
    }
  }

  if (check_L) {
    for (Eigen::Index k = 0; k < L.cols(); ++k) {
      for (Eigen::Index i = 0; i < L.rows(); ++i) {
        Matrix lp = L, lm = L;
        lp(i, k) += h;
        lm(i, k) -= h;
        const double fd = (f(alpha, theta, lp) - f(alpha, theta, lm)) / (2.0 * h);
        worst = std::max(worst, rel(fd, grad.grad_L(i, k)));
      }
    }
  }
  return worst;
}

namespace {

// Smooth directional derivative of the glasso objective along the symmetric
// coordinate (i, j); +inf when theta leaves the pd cone.
double glasso_coord_slope(const Matrix& theta, const Matrix& S, Eigen::Index i, Eigen::Index j) {
  Eigen::LLT<Matrix> llt(theta);
  if (llt.info() != Eigen::Success) return kInf;
  const Matrix inv = llt.solve(Matrix::Identity(theta.rows(), theta.cols()));
  if (i == j) return 0.5 * (S(i, i) - inv(i, i));
  return S(i, j) - inv(i, j);
}

// Solves slope(c) + shift = 0 for the coordinate value c by expansion plus
// bisection; the slope is increasing in c and diverges at the pd boundary.
double glasso_solve_coord(Matrix& theta, const Matrix& S, Eigen::Index i, Eigen::Index j,
                          double shift, double lo_hint) {
  const auto eval = [&](double c) {
    theta(i, j) = c;
    theta(j, i) = c;
    const double s = glasso_coord_slope(theta, S, i, j);
    return s == kInf ? kInf : s + shift;
  };

  double lo = lo_hint, hi = lo_hint;
  double step = 0.25;
  double slope_lo = eval(lo);
  if (slope_lo == kInf) throw std::runtime_error("glasso oracle: infeasible start coordinate");
  if (slope_lo < 0.0) {
    for (int k = 0; k < 200; ++k) {
      hi = lo + step;
      const double s = eval(hi);
      if (s == kInf || s >= 0.0) break;
      lo = hi;
      slope_lo = s;
      step *= 2.0;
    }
  } else {
    for (int k = 0; k < 200; ++k) {
      lo = hi - step;
      const double s = eval(lo);
      if (s == kInf) {  // hit the pd boundary; bisect inside (lo, hi)
        break;
      }
      if (s <= 0.0) break;
      hi = lo;
      step *= 2.0;
    }
  }
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double s = eval(mid);
    if (s == kInf || s > 0.0) hi = mid;
    else lo = mid;
  }
  const double c = 0.5 * (lo + hi);
  eval(c);
  return c;
}

}  // namespace

Matrix glasso_coordinate_descent(const Matrix& S, double lambda, int max_sweeps,
                                 double coord_tol) {
  const Eigen::Index d = S.rows();
  Matrix theta = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) theta(i, i) = 1.0 / std::max(S(i, i), 1e-8);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double old = theta(i, i);
      const double c = glasso_solve_coord(theta, S, i, i, 0.0, old);
      max_change = std::max(max_change, std::fabs(c - old));
    }
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = i + 1; j < d; ++j) {
        const double old = theta(i, j);
        theta(i, j) = 0.0;
        theta(j, i) = 0.0;
        const double slope0 = glasso_coord_slope(theta, S, i, j);
        double c = 0.0;
        // Both matrix entries move together, so the pair carries weight
        // 2*lambda in the penalty.
        if (slope0 < -2.0 * lambda) c = glasso_solve_coord(theta, S, i, j, 2.0 * lambda, 0.0);
        else if (slope0 > 2.0 * lambda) c = glasso_solve_coord(theta, S, i, j, -2.0 * lambda, 0.0);
        theta(i, j) = c;
        theta(j, i) = c;
        max_change = std::max(max_change, std::fabs(c - old));
      }
    }
    if (max_change < coord_tol) break;
  }
  return theta;
}

namespace {

double factored_objective(const Matrix& A, const Matrix& B, const Matrix& M, double t) {
  return 0.5 * (A * B.transpose() - M).squaredNorm() +
         0.5 * t * (A.squaredNorm() + B.squaredNorm());
}

}  // namespace

Matrix nuclear_prox_bruteforce(const Matrix& M, double t, std::mt19937_64& rng) {
  const Eigen::Index m = M.rows(), n = M.cols();
  const Eigen::Index k = std::min(m, n);
  double best_obj = kInf;
  Matrix best = Matrix::Zero(m, n);

  for (int restart = 0; restart < 4; ++restart) {
    const double scale = 0.2 * (restart + 1);
    Matrix A = random_gaussian(rng, m, k, scale);
    Matrix B = random_gaussian(rng, n, k, scale);
    double f = factored_objective(A, B, M, t);
    Matrix GA = (A * B.transpose() - M) * B + t * A;
    Matrix GB = (A * B.transpose() - M).transpose() * A + t * B;
    double step = 1e-3;
    Matrix prev_GA = GA, prev_GB = GB;

    for (int it = 0; it < 200000; ++it) {
      const double gnorm2 = GA.squaredNorm() + GB.squaredNorm();
      if (gnorm2 < 1e-26 * (1.0 + f)) break;

      Matrix A2, B2;
      double f2;
      int cuts = 0;
      for (;;) {
        A2 = A - step * GA;
        B2 = B - step * GB;
        f2 = factored_objective(A2, B2, M, t);
        if (f2 <= f - 1e-4 * step * gnorm2 || cuts > 60) break;
        step *= 0.5;
        ++cuts;
      }
      Matrix GA2 = (A2 * B2.transpose() - M) * B2 + t * A2;
      Matrix GB2 = (A2 * B2.transpose() - M).transpose() * A2 + t * B2;

      // Barzilai-Borwein step from the last displacement.
      const double sy = (A2 - A).cwiseProduct(GA2 - GA).sum() +
                        (B2 - B).cwiseProduct(GB2 - GB).sum();
      const double yy = (GA2 - GA).squaredNorm() + (GB2 - GB).squaredNorm();
      if (sy > 0.0 && yy > 0.0) step = std::clamp(sy / yy, 1e-9, 1e3);
      else step = std::max(step, 1e-6);

      A = std::move(A2);
      B = std::move(B2);
      GA = std::move(GA2);
      GB = std::move(GB2);
      f = f2;
    }
    if (f < best_obj) {
      best_obj = f;
      best = A * B.transpose();
    }
  }
  return best;
}

Matrix l1_theta_prox_bruteforce(const Matrix& M, double t, const lvgm::FamilySpec& family,
                                const lvgm::PenaltyConfig& cfg) {
  const Eigen::Index d = M.rows();
  const bool one_sided =
      family.kind == lvgm::Family::poisson || family.kind == lvgm::Family::exponential;
  Matrix Z(d, d);

  const auto minimize_entry = [&](double m, double weight, bool nonneg) {
    double lo = nonneg ? 0.0 : m - 2.0 * t - 1.0;
    double hi = nonneg ? std::max(0.0, m) + 1.0 : m + 2.0 * t + 1.0;
    const auto h = [&](double z) { return 0.5 * (z - m) * (z - m) + weight * std::fabs(z); };
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double h1 = h(x1), h2 = h(x2);
    for (int it = 0; it < 300; ++it) {
      if (h1 <= h2) {
        hi = x2;
        x2 = x1;
        h2 = h1;
        x1 = hi - phi * (hi - lo);
        h1 = h(x1);
      } else {
        lo = x1;
        x1 = x2;
        h1 = h2;
        x2 = lo + phi * (hi - lo);
        h2 = h(x2);
      }
    }
    return 0.5 * (lo + hi);
  };

  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      if (i == j) {
        if (family.kind != lvgm::Family::gaussian) Z(i, i) = 0.0;
        else Z(i, i) = minimize_entry(M(i, i), cfg.penalize_diagonal ? t : 0.0, false);
      } else {
        Z(i, j) = minimize_entry(M(i, j), t, one_sided);
      }
    }
  }
  return Z;
}

std::vector<double> ising_joint_probs(const Vector& alpha, const Matrix& theta) {
  const Eigen::Index d = alpha.size();
  const std::size_t states = std::size_t{1} << d;
  std::vector<double> logp(states);
  double max_logp = -kInf;
  for (std::size_t s = 0; s < states; ++s) {
    Vector x(d);
    for (Eigen::Index i = 0; i < d; ++i) x(i) = (s >> i) & 1 ? 1.0 : -1.0;
    logp[s] = alpha.dot(x) - 0.5 * x.dot(theta * x);
    max_logp = std::max(max_logp, logp[s]);
  }
  double total = 0.0;
  for (auto& v : logp) {
    v = std::exp(v - max_logp);
    total += v;
  }
  for (auto& v : logp) v /= total;
  return logp;
}

double ising_pseudo_nll_enum(const Vector& alpha, const Matrix& theta, const Matrix& L,
                             const Matrix& X) {
  const Eigen::Index d = X.rows(), n = X.cols();
  double total = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < d; ++i) {
      double u = alpha(i) + (L.size() > 0 ? L(i, k) : 0.0);
      for (Eigen::Index j = 0; j < d; ++j) {
        if (j != i) u -= theta(i, j) * X(j, k);
      }
      const double normalizer = std::exp(u) + std::exp(-u);  // direct sum over x_i in {-1,+1}
      total += std::log(normalizer) - u * X(i, k);
    }
  }
  return total / static_cast<double>(n);
}

}  // namespace oracle
