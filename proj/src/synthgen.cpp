#include "lvgm/synthgen.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>
#include <stdexcept>

#include "lvgm/errors.hpp"
#include "lvgm/rng.hpp"

namespace lvgm {

namespace {

Matrix gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix M(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = rng.normal();
  return M;
}

// Haar-distributed orthonormal columns via QR with the sign fix.
Matrix haar_basis(Rng& rng, Eigen::Index d, Eigen::Index r) {
  const Matrix G = gaussian_matrix(rng, d, r);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ() * Matrix::Identity(d, r);
  const Matrix R = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < r; ++j) {
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  }
  return Q;
}

// Pulls an orthonormal basis toward the coherence band by alternating a row
// soft-clip with re-orthonormalization.  A pure Haar draw lands outside the
// band with overwhelming probability once r > 1 (its largest squared row norm
// concentrates well above 1.2 r/d), so each rejection-sampling attempt gets
// this balancing pass before the band test.
void balance_coherence(Matrix& Q, double band_hi) {
  const Eigen::Index d = Q.rows(), r = Q.cols();
  const double clip = 0.95 * band_hi;
  for (int it = 0; it < 200; ++it) {
    if (squared_coherence(Q) <= band_hi) return;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double n2 = Q.row(i).squaredNorm();
      if (n2 > clip) Q.row(i) *= std::sqrt(clip / n2);
    }
    Eigen::HouseholderQR<Matrix> qr(Q);
    Matrix next = qr.householderQ() * Matrix::Identity(d, r);
    const Matrix R = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < r; ++j) {
      if (R(j, j) < 0.0) next.col(j) = -next.col(j);
    }
    Q = std::move(next);
  }
}

Vector draw_latent(Rng& rng, LatentLaw law, int r) {
  Vector z(r);
  for (int i = 0; i < r; ++i) {
    switch (law) {
      case LatentLaw::rademacher: z(i) = rng.rademacher(); break;
      case LatentLaw::standard_normal: z(i) = rng.normal(); break;
      case LatentLaw::exponential_mean1: z(i) = rng.exponential(1.0); break;
    }
  }
  return z;
}

// One systematic-scan Gibbs pass state update at site i.
void gibbs_update(const FamilySpec& family, const Vector& alpha_eff, const Matrix& theta,
                  Vector& x, Eigen::Index i, Rng& rng) {
  const double u = alpha_eff(i) - (theta.row(i).dot(x) - theta(i, i) * x(i));
  switch (family.kind) {
    case Family::ising: {
      const double p_plus = 1.0 / (1.0 + std::exp(-2.0 * u));
      x(i) = rng.uniform() < p_plus ? 1.0 : -1.0;
      break;
    }
    case Family::poisson: {
      if (u > 30.0) throw SamplerError("gibbs: poisson conditional rate above e^30 cap");
      x(i) = rng.poisson(std::exp(u));
      break;
    }
    case Family::exponential: {
      if (u >= 0.0) throw SamplerError("gibbs: exponential conditional with nonnegative rate");
      x(i) = rng.exponential(-u);
      break;
    }
    case Family::gaussian:
      throw SamplerError("gibbs: gaussian samples are drawn exactly");
  }
}

Vector gibbs_chain(const FamilySpec& family, const Vector& alpha_eff, const Matrix& theta,
                   long updates, Rng& rng) {
  const Eigen::Index d = alpha_eff.size();
  Vector x(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    switch (family.kind) {
      case Family::ising: x(i) = rng.rademacher(); break;
      case Family::poisson: {
        const double u0 = std::min(alpha_eff(i), 30.0);
        x(i) = rng.poisson(std::exp(u0));
        break;
      }
      case Family::exponential: x(i) = rng.exponential(-alpha_eff(i)); break;
      case Family::gaussian: break;
    }
  }
  for (long t = 0; t < updates; ++t) {
    gibbs_update(family, alpha_eff, theta, x, static_cast<Eigen::Index>(t % d), rng);
  }
  return x;
}

}  // namespace

std::string graph_kind_name(GraphKind kind) {
  return kind == GraphKind::cycle ? "cycle" : "erdos_renyi";
}

GraphKind graph_kind_from_name(const std::string& name) {
  if (name == "cycle") return GraphKind::cycle;
  if (name == "erdos_renyi") return GraphKind::erdos_renyi;
  throw std::invalid_argument("unknown graph kind: " + name);
}

std::string latent_law_name(LatentLaw law) {
  switch (law) {
    case LatentLaw::rademacher: return "rademacher";
    case LatentLaw::standard_normal: return "standard_normal";
    case LatentLaw::exponential_mean1: return "exponential_mean1";
  }
  return "";
}

LatentLaw latent_law_from_name(const std::string& name) {
  if (name == "rademacher") return LatentLaw::rademacher;
  if (name == "standard_normal") return LatentLaw::standard_normal;
  if (name == "exponential_mean1") return LatentLaw::exponential_mean1;
  throw std::invalid_argument("unknown latent law: " + name);
}

void TruthSpec::validate() const {
  if (d < 2) throw std::invalid_argument("truth: d must be at least 2");
  if (r < 0 || r >= d) throw std::invalid_argument("truth: need 0 <= r < d");
  if (static_cast<int>(singular_values.size()) != r) {
    throw std::invalid_argument("truth: singular_values must have length r");
  }
  if (graph == GraphKind::erdos_renyi && (er_prob < 0.0 || er_prob > 1.0)) {
    throw std::invalid_argument("truth: er_prob must lie in [0, 1]");
  }
  if (family.kind == Family::exponential) {
    if (edge_weight < 0.0) throw std::invalid_argument("truth: exponential edge weight must be >= 0");
    if (alpha_value >= 0.0) throw std::invalid_argument("truth: exponential alpha must be negative");
  }
  if (family.kind == Family::poisson && edge_weight < 0.0) {
    throw std::invalid_argument("truth: poisson edge weight must be >= 0");
  }
}

Matrix make_theta(const TruthSpec& spec, std::uint64_t seed) {
  spec.validate();
  const int d = spec.d;
  Matrix theta = Matrix::Zero(d, d);
  Rng rng = Rng::substream(seed, 0x7468657461ULL);

  if (spec.graph == GraphKind::cycle) {
    for (int i = 0; i < d; ++i) {
      const int j = (i + 1) % d;
      theta(i, j) = theta(j, i) = spec.edge_weight;
    }
  } else {
    for (int i = 0; i < d; ++i) {
      for (int j = i + 1; j < d; ++j) {
        if (rng.uniform() < spec.er_prob) theta(i, j) = theta(j, i) = spec.edge_weight;
      }
    }
  }

  if (spec.family.kind == Family::gaussian) {
    theta.diagonal().setConstant(1.0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(theta, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin < 1e-3) theta.diagonal().array() += 1e-3 - lmin;
  }
  return theta;
}

double squared_coherence(const Matrix& basis) {
  // ||P e_i||^2 = ||basis' e_i||^2 = squared norm of row i.
  return basis.rowwise().squaredNorm().maxCoeff();
}

Matrix make_loading(const TruthSpec& spec, std::uint64_t seed) {
  spec.validate();
  const int d = spec.d;
  const int r = spec.r;
  if (r == 0) return Matrix::Zero(d, 0);
  Rng rng = Rng::substream(seed, 0x6c6f616421ULL);

  const double band_hi = 1.44 * spec.coherence_target * static_cast<double>(r) / d;
  Matrix Q;
  double best = 2.0;
  bool found = false;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Matrix cand = haar_basis(rng, d, r);
    balance_coherence(cand, band_hi);
    const double coh = squared_coherence(cand);
    if (coh < best) {
      best = coh;
      Q = std::move(cand);
    }
    if (best <= band_hi) {
      found = true;
      break;
    }
  }
  if (!found && spec.family.kind != Family::exponential) {
    // The entrywise sign flip below destroys coherence control anyway, so the
    // exponential kind keeps the lowest-coherence draw instead of failing.
    throw SamplerError("make_loading: coherence rejection budget exceeded (10000 draws)");
  }

  Vector sv(r);
  for (int i = 0; i < r; ++i) sv(i) = spec.singular_values[static_cast<std::size_t>(i)];
  const Matrix R = haar_basis(rng, r, r);
  Matrix B = Q * sv.asDiagonal() * R.transpose();
  if (spec.family.kind == Family::exponential) B = -B.cwiseAbs();
  return B;
}

DataMatrix sample(const TruthSpec& spec, const Matrix& theta, const Matrix& B, int n,
                  long burn_in, long thin, std::uint64_t seed) {
  spec.validate();
  const int d = spec.d;
  if (n < 1) throw std::invalid_argument("sample: n must be positive");
  if (burn_in < 0) burn_in = 200L * d;
  if (thin < 0) thin = 10L * d;
  if (thin < 1) throw std::invalid_argument("sample: thin must be >= 1");
  const Vector alpha = Vector::Constant(d, spec.alpha_value);

  if (!is_feasible(spec.family, alpha, theta)) {
    throw SamplerError("sample: infeasible truth (alpha, theta)");
  }

  Eigen::LLT<Matrix> llt;
  if (spec.family.kind == Family::gaussian) {
    llt.compute(theta);
    if (llt.info() != Eigen::Success) throw SamplerError("sample: truth theta not pd");
  }

  Matrix X(d, n);
  const long updates = burn_in + thin;
  for (int k = 0; k < n; ++k) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(k));
    const Vector z = draw_latent(rng, spec.latent_law, spec.r);
    const Vector alpha_eff = spec.r > 0 ? Vector(alpha + B * z) : alpha;

    if (spec.family.kind == Family::gaussian) {
      const Vector mean = llt.solve(alpha_eff);
      Vector xi(d);
      for (int i = 0; i < d; ++i) xi(i) = rng.normal();
      X.col(k) = mean + llt.matrixU().solve(xi);
    } else {
      if (spec.family.kind == Family::exponential &&
          (alpha_eff.array() > -spec.family.strict_margin).any()) {
        throw SamplerError("sample: infeasible truth, alpha + Bz reaches the boundary");
      }
      X.col(k) = gibbs_chain(spec.family, alpha_eff, theta, updates, rng);
    }
  }
  return DataMatrix(std::move(X));
}

}  // namespace lvgm
