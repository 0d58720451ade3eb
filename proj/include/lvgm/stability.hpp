#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <vector>

#include "lvgm/data_matrix.hpp"
#include "lvgm/solver.hpp"

namespace lvgm {

/// Aggregated structure variability over half-size subsamples at one (lambda,
/// gamma): edge frequencies (the diagonal of the graph indicator average),
/// the averaged column-space projection of the latent estimates, and the
/// total-variability summaries driving stage 1.
struct StabilityReport {
  std::map<std::pair<int, int>, double> edge_freq;  // absent edges have frequency 0
  Matrix avg_projection;                            // d x d, psd, eigenvalues in [0, 1]
  double pi_graph = 0.0;   // sum_e p_e (1 - p_e) / C(d, 2)
  double pi_latent = 0.0;  // sum_i mu_i (1 - mu_i) / d over eigenvalues of avg_projection
  double lambda = 0.0;
  double gamma = 0.0;
  int num_subsamples = 0;
  int num_failed = 0;  // subsample fits that raised; aggregation skips them
  Eigen::Index d = 0;
};

/// Bernoulli-variance summaries behind pi_graph and pi_latent.
double pi_from_frequencies(const std::map<std::pair<int, int>, double>& edge_freq,
                           Eigen::Index d);
double pi_from_projection(const Matrix& avg_projection);

struct StabilityOptions {
  SolveOptions solve;
  int threads = 0;  // 0 picks the hardware thread count
};

/// Fits num_subsamples random half datasets (drawn without replacement within
/// each subsample) and aggregates their supports and latent column spaces.
/// Fails when more than 20% of the subsample fits raise.
StabilityReport subsample_fit(const DataMatrix& data, const FamilySpec& family, double lambda,
                              double gamma, int num_subsamples, std::uint64_t seed,
                              const StabilityOptions& opts = {});

struct Stage1Options {
  double t_graph = 0.025;
  double t_latent = 0.025;
  int num_subsamples = 50;
  /// Scan gamma at the largest lambda first, then lambda at the chosen gamma.
  bool gamma_first = true;
  StabilityOptions stab;
};

struct Stage1Result {
  double lambda = 0.0;
  double gamma = 0.0;
  StabilityReport report;  // at the selected (lambda, gamma)
  bool graph_threshold_reached = false;
  bool latent_threshold_reached = false;
};

/// Stage 1: scans the (descending) grids one axis at a time, keeping the last
/// value whose variability stays at or below the threshold.  When a threshold
/// is never exceeded the smallest grid value is returned with the
/// corresponding reached-flag false.
Stage1Result stage1_select(const DataMatrix& data, const FamilySpec& family,
                           std::vector<double> lambda_grid, std::vector<double> gamma_grid,
                           const Stage1Options& opts, std::uint64_t seed);

/// Stage-2 output: stable edges and a stable latent column space.
struct SelectedStructure {
  EdgeSet edges;
  Matrix colspace;  // orthonormal d x dim
  double delta_graph = 0.7;
  double delta_latent = 0.7;
};

/// Stage 2: edges with frequency >= delta_graph; the span of the
/// avg_projection eigenvectors with eigenvalue >= delta_latent (the largest
/// subspace C with sigma_min(P_C P^latent P_C) >= delta_latent).
SelectedStructure stage2_structure(const StabilityReport& report, double delta_graph = 0.7,
                                   double delta_latent = 0.7);

/// Stage 3: unregularized refit constrained to the selected structure.
FitResult stage3_refit(const DataMatrix& data, const FamilySpec& family,
                       const SelectedStructure& structure, const SolveOptions& opts = {});

}  // namespace lvgm
