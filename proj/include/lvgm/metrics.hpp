#pragma once

#include <utility>

#include "lvgm/data_matrix.hpp"
#include "lvgm/solver.hpp"

namespace lvgm {

/// False-discovery rate and true-positive rate of an estimated edge set:
///   fdr = |est \ truth| / max(|est|, 1),  pwr = |est & truth| / max(|truth|, 1).
std::pair<double, double> fdr_pwr(const EdgeSet& estimated, const EdgeSet& truth);

/// Exact structure recovery: estimated support equals the truth's support and
/// the latent rank matches.
bool recovery_success(const FitResult& fit_result, const Matrix& truth_theta, int truth_rank);

/// Held-out negative log (pseudo-)likelihood per sample: the unregularized
/// objective on X_test with alpha and Theta fixed at the fitted values and L
/// restricted to the fitted latent column space (L = 0 when that space is
/// zero-dimensional).  The Gaussian value includes the d/2 log(2 pi) constant
/// of the exact log-partition so it is a genuine negative log-likelihood;
/// pseudo kinds return the pseudo-likelihood objective as is.
double holdout_nll(const FitResult& model, const DataMatrix& X_test, const FamilySpec& family,
                   const SolveOptions& opts = {});

}  // namespace lvgm
