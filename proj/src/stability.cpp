#include "lvgm/stability.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

#include "lvgm/rng.hpp"

namespace lvgm {

namespace {

int thread_count(int requested, int jobs) {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  const int t = requested > 0 ? requested : hw;
  return std::max(1, std::min(t, jobs));
}

// Runs jobs 0..count-1 on a small pool; results land in caller-owned slots so
// the aggregation order never depends on scheduling.
void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        body(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

std::vector<int> draw_subsample(Eigen::Index n, Eigen::Index m, Rng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = static_cast<int>(i);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto j = i + static_cast<Eigen::Index>(rng.integer_below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(m));
  return idx;
}

Matrix columns_at(const Matrix& X, const std::vector<int>& idx) {
  Matrix sub(X.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t t = 0; t < idx.size(); ++t) sub.col(static_cast<Eigen::Index>(t)) = X.col(idx[t]);
  return sub;
}

Matrix colspace_projection(const Matrix& L, double rank_tol) {
  const Eigen::Index d = L.rows();
  if (L.size() == 0) return Matrix::Zero(d, d);
  Eigen::BDCSVD<Matrix> svd(L, Eigen::ComputeThinU);
  const Vector s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0.0) return Matrix::Zero(d, d);
  const double cut = rank_tol * s(0);
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  if (r == 0) return Matrix::Zero(d, d);
  const Matrix U = svd.matrixU().leftCols(r);
  return U * U.transpose();
}

// Shared state for warm-started scans: subsample index sets are a pure
// function of (seed, l), so they stay fixed across grid points and each
// subsample can reuse its previous solution.
struct SubsampleScanner {
  const DataMatrix& data;
  FamilySpec family;
  int num_subsamples;
  std::uint64_t seed;
  StabilityOptions opts;
  std::vector<std::vector<int>> index_sets;
  std::vector<ModelParams> warm;
  std::vector<char> has_warm;

  SubsampleScanner(const DataMatrix& data_in, const FamilySpec& family_in, int B,
                   std::uint64_t seed_in, const StabilityOptions& opts_in)
      : data(data_in), family(family_in), num_subsamples(B), seed(seed_in), opts(opts_in) {
    if (data.samples() < 4) throw std::invalid_argument("subsample_fit: need at least 4 samples");
    if (B < 1) throw std::invalid_argument("subsample_fit: need at least one subsample");
    const Eigen::Index m = data.samples() / 2;
    index_sets.reserve(static_cast<std::size_t>(B));
    for (int l = 0; l < B; ++l) {
      Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(l));
      index_sets.push_back(draw_subsample(data.samples(), m, rng));
    }
    warm.resize(static_cast<std::size_t>(B));
    has_warm.assign(static_cast<std::size_t>(B), 0);
  }

  StabilityReport run(double lambda, double gamma) {
    const Eigen::Index d = data.dim();
    const int B = num_subsamples;
    std::vector<EdgeSet> supports(static_cast<std::size_t>(B));
    std::vector<Matrix> projections(static_cast<std::size_t>(B));
    std::vector<char> ok(static_cast<std::size_t>(B), 0);

    parallel_for(B, thread_count(opts.threads, B), [&](int l) {
      const auto lu = static_cast<std::size_t>(l);
      try {
        DataMatrix sub(columns_at(data.X, index_sets[lu]));
        PenaltyConfig cfg{lambda, gamma, false};
        SolveOptions so = opts.solve;
        if (has_warm[lu]) so.init = warm[lu];
        FitResult fr = fit(sub, family, cfg, so);
        supports[lu] = fr.support;
        projections[lu] = colspace_projection(fr.params.L, so.rank_tol);
        warm[lu] = fr.params;
        has_warm[lu] = 1;
        ok[lu] = 1;
      } catch (const std::exception&) {
        ok[lu] = 0;
      }
    });

    StabilityReport rep;
    rep.d = d;
    rep.lambda = lambda;
    rep.gamma = gamma;
    rep.num_subsamples = B;
    int good = 0;
    std::map<std::pair<int, int>, int> counts;
    Matrix proj_sum = Matrix::Zero(d, d);
    for (int l = 0; l < B; ++l) {
      const auto lu = static_cast<std::size_t>(l);
      if (!ok[lu]) continue;
      ++good;
      for (const auto& e : supports[lu]) counts[e] += 1;
      proj_sum += projections[lu];
    }
    rep.num_failed = B - good;
    if (rep.num_failed * 5 > B) {
      throw std::runtime_error("subsample_fit: more than 20% of subsample fits failed");
    }
    for (const auto& [e, c] : counts) {
      rep.edge_freq[e] = static_cast<double>(c) / static_cast<double>(good);
    }
    rep.avg_projection = proj_sum / static_cast<double>(good);
    rep.pi_graph = pi_from_frequencies(rep.edge_freq, d);
    rep.pi_latent = pi_from_projection(rep.avg_projection);
    return rep;
  }
};

}  // namespace

double pi_from_frequencies(const std::map<std::pair<int, int>, double>& edge_freq,
                           Eigen::Index d) {
  const double pairs = 0.5 * static_cast<double>(d) * static_cast<double>(d - 1);
  double total = 0.0;
  for (const auto& [e, p] : edge_freq) total += p * (1.0 - p);
  return total / pairs;
}

double pi_from_projection(const Matrix& avg_projection) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(avg_projection, Eigen::EigenvaluesOnly);
  double total = 0.0;
  for (Eigen::Index i = 0; i < avg_projection.rows(); ++i) {
    const double mu = std::clamp(es.eigenvalues()(i), 0.0, 1.0);
    total += mu * (1.0 - mu);
  }
  return total / static_cast<double>(avg_projection.rows());
}

StabilityReport subsample_fit(const DataMatrix& data, const FamilySpec& family, double lambda,
                              double gamma, int num_subsamples, std::uint64_t seed,
                              const StabilityOptions& opts) {
  SubsampleScanner scanner(data, family, num_subsamples, seed, opts);
  return scanner.run(lambda, gamma);
}

Stage1Result stage1_select(const DataMatrix& data, const FamilySpec& family,
                           std::vector<double> lambda_grid, std::vector<double> gamma_grid,
                           const Stage1Options& opts, std::uint64_t seed) {
  if (lambda_grid.empty() || gamma_grid.empty()) {
    throw std::invalid_argument("stage1_select: empty grid");
  }
  std::sort(lambda_grid.begin(), lambda_grid.end(), std::greater<double>());
  std::sort(gamma_grid.begin(), gamma_grid.end(), std::greater<double>());

  SubsampleScanner scanner(data, family, opts.num_subsamples, seed, opts.stab);

  // One descending pass along `grid` with the other parameter pinned; keeps
  // the value just before the variability threshold is first exceeded.
  const auto scan = [&](const std::vector<double>& grid, double pinned, bool scan_gamma,
                        double threshold, StabilityReport& final_report, bool& reached) -> double {
    reached = false;
    StabilityReport prev;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double lambda = scan_gamma ? pinned : grid[j];
      const double gamma = scan_gamma ? grid[j] : pinned;
      StabilityReport rep = scanner.run(lambda, gamma);
      const double pi = scan_gamma ? rep.pi_latent : rep.pi_graph;
      if (pi > threshold) {
        reached = true;
        if (j == 0) {
          final_report = std::move(rep);
          return grid[0];
        }
        final_report = std::move(prev);
        return grid[j - 1];
      }
      prev = std::move(rep);
    }
    final_report = std::move(prev);  // threshold never exceeded: smallest value, flag stays false
    return grid.back();
  };

  Stage1Result out;
  StabilityReport rep_first, rep_second;
  if (opts.gamma_first) {
    out.gamma = scan(gamma_grid, lambda_grid.front(), true, opts.t_latent, rep_first,
                     out.latent_threshold_reached);
    out.lambda = scan(lambda_grid, out.gamma, false, opts.t_graph, rep_second,
                      out.graph_threshold_reached);
  } else {
    out.lambda = scan(lambda_grid, gamma_grid.front(), false, opts.t_graph, rep_first,
                      out.graph_threshold_reached);
    out.gamma = scan(gamma_grid, out.lambda, true, opts.t_latent, rep_second,
                     out.latent_threshold_reached);
  }
  out.report = std::move(rep_second);
  // The second scan ran at the pinned first-axis value, so its report is
  // already the one at (lambda*, gamma*) unless the selected second-axis
  // value equals a point rerun; rerun only if the pair does not match.
  if (out.report.lambda != out.lambda || out.report.gamma != out.gamma) {
    out.report = scanner.run(out.lambda, out.gamma);
  }
  return out;
}

SelectedStructure stage2_structure(const StabilityReport& report, double delta_graph,
                                   double delta_latent) {
  if (delta_graph <= 0.0 || delta_graph > 1.0 || delta_latent <= 0.0 || delta_latent > 1.0) {
    throw std::invalid_argument("stage2_structure: deltas must lie in (0, 1]");
  }
  SelectedStructure out;
  out.delta_graph = delta_graph;
  out.delta_latent = delta_latent;
  for (const auto& [e, p] : report.edge_freq) {
    if (p >= delta_graph) out.edges.insert(e);
  }

  Eigen::SelfAdjointEigenSolver<Matrix> es(report.avg_projection);
  const Vector mu = es.eigenvalues();  // ascending
  const Eigen::Index d = report.avg_projection.rows();
  Eigen::Index dim = 0;
  while (dim < d && mu(d - 1 - dim) >= delta_latent) ++dim;
  out.colspace.resize(d, dim);
  for (Eigen::Index j = 0; j < dim; ++j) out.colspace.col(j) = es.eigenvectors().col(d - 1 - j);
  return out;
}

FitResult stage3_refit(const DataMatrix& data, const FamilySpec& family,
                       const SelectedStructure& structure, const SolveOptions& opts) {
  StructureConstraints cons;
  cons.support = structure.edges;
  cons.colspace = structure.colspace;
  return fit(data, family, PenaltyConfig{0.0, 0.0, false}, opts, cons);
}

}  // namespace lvgm
