#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "lvgm/data_matrix.hpp"
#include "lvgm/family.hpp"

namespace lvgm {

enum class GraphKind { cycle, erdos_renyi };

enum class LatentLaw { rademacher, standard_normal, exponential_mean1 };

std::string graph_kind_name(GraphKind kind);
GraphKind graph_kind_from_name(const std::string& name);
std::string latent_law_name(LatentLaw law);
LatentLaw latent_law_from_name(const std::string& name);

/// Ground-truth model description for synthetic experiments.
struct TruthSpec {
  FamilySpec family;
  int d = 60;
  GraphKind graph = GraphKind::cycle;
  double er_prob = 0.02;       // edge probability for erdos_renyi
  double edge_weight = 0.4;    // nonzero off-diagonal value of Theta
  int r = 1;                   // latent count, r < d
  std::vector<double> singular_values = {0.72};
  /// Accepted squared-coherence band for the loading column space is
  /// [r/d, 1.44 * coherence_target * r/d].
  double coherence_target = 1.2;
  LatentLaw latent_law = LatentLaw::rademacher;
  double alpha_value = 0.0;

  void validate() const;  // throws std::invalid_argument
};

/// Interaction matrix for the spec's graph: cycle edges (i, i+1 mod d) or
/// independent pairs with probability er_prob, off-diagonal weight
/// edge_weight, diagonal 1 for gaussian (boosted if the result is not pd)
/// and 0 otherwise.
Matrix make_theta(const TruthSpec& spec, std::uint64_t seed);

/// Largest squared norm of the projection of a standard basis vector onto
/// span(basis); lies in [r/d, 1] for an orthonormal d x r basis.
double squared_coherence(const Matrix& basis);

/// Loading matrix B = Q diag(singular_values) R' with Q a Haar-random
/// orthonormal basis rejection-sampled into the coherence band and R a
/// Haar-random rotation.  For the exponential kind the result is replaced by
/// -|B| entrywise (loadings must be nonpositive) and coherence control is
/// best effort.  Throws SamplerError when 10000 draws miss the band.
Matrix make_loading(const TruthSpec& spec, std::uint64_t seed);

/// Draws n samples.  Per sample: z from the latent law, latent effect B z,
/// then an exact multivariate normal draw (gaussian) or a systematic-scan
/// Gibbs chain (others) run for burn_in + thin single-site updates on a
/// per-sample substream, so generation parallelizes without changing output.
/// Negative burn_in/thin select the defaults 200*d and 10*d.
DataMatrix sample(const TruthSpec& spec, const Matrix& theta, const Matrix& B, int n,
                  long burn_in, long thin, std::uint64_t seed);

}  // namespace lvgm
