#include <CLI11.hpp>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <thread>
#include <vector>

#include "lvgm/config.hpp"
#include "lvgm/errors.hpp"
#include "lvgm/gaussian_reduced.hpp"
#include "lvgm/metrics.hpp"
#include "lvgm/model_io.hpp"
#include "lvgm/rng.hpp"
#include "lvgm/solver.hpp"
#include "lvgm/stability.hpp"
#include "lvgm/synthgen.hpp"

namespace fs = std::filesystem;
using namespace lvgm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNotConverged = 3;

void check_input_path(const std::string& path) {
  if (!fs::exists(path)) throw ConfigError("input file does not exist: " + path);
}

void check_output_path(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::exists(parent)) {
    throw ConfigError("output directory does not exist: " + parent.string());
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return Rng::substream(seed, stream).next_u64();
}

std::vector<double> default_singular_values(Family kind, int r) {
  const bool strong = kind == Family::poisson || kind == Family::exponential;
  switch (r) {
    case 0: return {};
    case 1: return strong ? std::vector<double>{2.0} : std::vector<double>{0.72};
    case 2: return strong ? std::vector<double>{1.95, 1.95} : std::vector<double>{0.7, 0.7};
    case 3:
      return strong ? std::vector<double>{1.9, 1.9, 1.9} : std::vector<double>{0.68, 0.68, 0.68};
    default:
      throw ConfigError("singular_values must be given explicitly for r > 3");
  }
}

LatentLaw default_latent_law(Family kind) {
  switch (kind) {
    case Family::gaussian: return LatentLaw::rademacher;
    case Family::ising: return LatentLaw::standard_normal;
    case Family::poisson: return LatentLaw::rademacher;
    case Family::exponential: return LatentLaw::exponential_mean1;
  }
  return LatentLaw::rademacher;
}

TruthSpec truth_from_config(RunConfig& cfg) {
  TruthSpec spec;
  spec.family.kind = family_from_name(cfg.require_string("family"));
  spec.family.strict_margin = cfg.get_double("strict_margin", 1e-8);
  spec.d = static_cast<int>(cfg.get_long("d", 60));
  spec.graph = graph_kind_from_name(cfg.get_string("graph", "cycle"));
  spec.er_prob = cfg.get_double("er_prob", 0.02);
  const bool strong = spec.family.kind == Family::exponential;
  spec.edge_weight = cfg.get_double("edge_weight", strong ? 1.0 : 0.4);
  spec.r = static_cast<int>(cfg.get_long("r", 1));
  spec.singular_values = cfg.get_double_list(
      "singular_values", default_singular_values(spec.family.kind, spec.r));
  spec.coherence_target = cfg.get_double("coherence_target", 1.2);
  spec.latent_law = latent_law_from_name(
      cfg.get_string("latent_law", latent_law_name(default_latent_law(spec.family.kind))));
  spec.alpha_value = cfg.get_double("alpha_value", strong ? -1.0 : 0.0);
  spec.validate();
  return spec;
}

SolveOptions solve_options_from_config(RunConfig& cfg) {
  SolveOptions opts;
  opts.max_iter = static_cast<int>(cfg.get_long("max_iter", opts.max_iter));
  opts.tol_rel_obj = cfg.get_double("tol", opts.tol_rel_obj);
  opts.resid_tol = cfg.get_double("resid_tol", opts.resid_tol);
  opts.seed = cfg.get_seed("solver_seed", 0);
  return opts;
}

int cmd_generate(const std::string& config_path) {
  RunConfig cfg = RunConfig::from_file(config_path);
  TruthSpec spec = truth_from_config(cfg);
  const int n = static_cast<int>(cfg.get_long("n", 1000));
  const long burn_in = cfg.get_long("burn_in", -1);
  const long thin = cfg.get_long("thin", -1);
  const std::uint64_t seed = cfg.get_seed("seed", 0);
  const std::string data_out = cfg.get_string("data_out", "lvgm_data.csv");
  const std::string truth_out = cfg.get_string("truth_out", "lvgm_truth.json");
  cfg.finalize();
  check_output_path(data_out);
  check_output_path(truth_out);

  const Matrix theta = make_theta(spec, seed);
  const Matrix B = make_loading(spec, seed);
  DataMatrix data = sample(spec, theta, B, n, burn_in, thin, seed);
  write_data_csv(data, data_out);
  write_truth_json(TruthBundle{spec, theta, B, seed}, truth_out);
  std::cout << "wrote " << data_out << " (" << n << " samples, d=" << spec.d << ") and "
            << truth_out << "\n";
  return kExitOk;
}

int cmd_fit(const std::string& config_path, bool reduced, bool no_latent) {
  RunConfig cfg = RunConfig::from_file(config_path);
  const std::string data_path = cfg.require_string("data");
  FamilySpec family;
  family.kind = family_from_name(cfg.require_string("family"));
  family.strict_margin = cfg.get_double("strict_margin", 1e-8);

  check_input_path(data_path);
  const DataMatrix data = read_data_csv(data_path);
  const double d = static_cast<double>(data.dim());
  const double n = static_cast<double>(data.samples());

  PenaltyConfig pen;
  if (cfg.has("lambda") && cfg.has("c1")) throw ConfigError("give either lambda or c1, not both");
  if (cfg.has("gamma") && cfg.has("c2")) throw ConfigError("give either gamma or c2, not both");
  pen.lambda = cfg.has("c1") ? cfg.require_double("c1") * std::sqrt(d / n)
                             : cfg.get_double("lambda", 0.0);
  pen.gamma = cfg.has("c2") ? cfg.require_double("c2") * std::sqrt(d) / n
                            : cfg.get_double("gamma", 0.0);
  pen.penalize_diagonal = cfg.get_bool("penalize_diagonal", false);

  SolveOptions opts = solve_options_from_config(cfg);
  opts.center_gaussian = cfg.get_bool("center", true);
  const std::string model_out = cfg.get_string("model_out", "lvgm_model.json");
  cfg.finalize();
  check_output_path(model_out);

  if (reduced && family.kind != Family::gaussian) {
    throw ConfigError("--reduced applies to the gaussian family only");
  }

  FitResult result;
  if (reduced) {
    result = fit_gaussian_reduced(data, pen, opts);
  } else if (no_latent) {
    StructureConstraints cons;
    cons.colspace = Matrix(data.dim(), 0);
    result = fit(data, family, pen, opts, cons);
  } else {
    result = fit(data, family, pen, opts);
  }
  write_model_json(result, family, model_out);
  std::cout << "wrote " << model_out << " (objective=" << result.objective_trace.back()
            << ", iterations=" << result.iterations << ", edges=" << result.support.size()
            << ", rank=" << result.rank << ", converged=" << (result.converged ? "yes" : "no")
            << ")\n";
  return result.converged ? kExitOk : kExitNotConverged;
}

std::vector<double> log_spaced_grid(double top, double ratio, int count) {
  std::vector<double> grid;
  if (count < 1) throw ConfigError("grid size must be positive");
  if (count == 1) return {top};
  for (int i = 0; i < count; ++i) {
    grid.push_back(top * std::pow(ratio, static_cast<double>(i) / (count - 1)));
  }
  return grid;
}

int cmd_select(const std::string& config_path) {
  RunConfig cfg = RunConfig::from_file(config_path);
  const std::string data_path = cfg.require_string("data");
  FamilySpec family;
  family.kind = family_from_name(cfg.require_string("family"));
  family.strict_margin = cfg.get_double("strict_margin", 1e-8);

  check_input_path(data_path);
  const DataMatrix data = read_data_csv(data_path);

  Stage1Options s1;
  s1.t_graph = cfg.get_double("t_graph", 0.025);
  s1.t_latent = cfg.get_double("t_latent", 0.025);
  s1.num_subsamples = static_cast<int>(cfg.get_long("num_subsamples", 50));
  const std::string order = cfg.get_string("scan_order", "gamma_first");
  if (order != "gamma_first" && order != "lambda_first") {
    throw ConfigError("scan_order must be gamma_first or lambda_first");
  }
  s1.gamma_first = order == "gamma_first";
  s1.stab.threads = static_cast<int>(cfg.get_long("threads", 0));
  s1.stab.solve = solve_options_from_config(cfg);

  std::vector<double> lambda_grid = cfg.get_double_list("lambda_grid", {});
  std::vector<double> gamma_grid = cfg.get_double_list("gamma_grid", {});
  if (lambda_grid.empty()) {
    lambda_grid = log_spaced_grid(lambda_max(data, family, PenaltyConfig{}),
                                  cfg.get_double("lambda_min_ratio", 0.05),
                                  static_cast<int>(cfg.get_long("num_lambda", 8)));
  } else {
    cfg.get_double("lambda_min_ratio", 0.05);
    cfg.get_long("num_lambda", 8);
  }
  if (gamma_grid.empty()) {
    gamma_grid = log_spaced_grid(gamma_max(data, family),
                                 cfg.get_double("gamma_min_ratio", 0.05),
                                 static_cast<int>(cfg.get_long("num_gamma", 8)));
  } else {
    cfg.get_double("gamma_min_ratio", 0.05);
    cfg.get_long("num_gamma", 8);
  }

  const double delta_graph = cfg.get_double("delta_graph", 0.7);
  const double delta_latent = cfg.get_double("delta_latent", 0.7);
  const std::uint64_t seed = cfg.get_seed("seed", 0);
  const std::string report_out = cfg.get_string("report_out", "lvgm_report.json");
  const std::string structure_out = cfg.get_string("structure_out", "lvgm_structure.json");
  const std::string model_out = cfg.get_string("model_out", "lvgm_model.json");
  cfg.finalize();
  check_output_path(report_out);
  check_output_path(structure_out);
  check_output_path(model_out);

  const Stage1Result s1r = stage1_select(data, family, lambda_grid, gamma_grid, s1, seed);
  if (!s1r.graph_threshold_reached || !s1r.latent_threshold_reached) {
    std::cerr << "warning: variability threshold never reached on "
              << (!s1r.graph_threshold_reached ? "lambda " : "")
              << (!s1r.latent_threshold_reached ? "gamma " : "")
              << "grid; smallest grid value kept\n";
  }
  const SelectedStructure structure = stage2_structure(s1r.report, delta_graph, delta_latent);
  const FitResult refit = stage3_refit(data, family, structure, s1.stab.solve);

  write_report_json(s1r.report, report_out);
  write_structure_json(structure, structure_out);
  write_model_json(refit, family, model_out);
  std::cout << "selected lambda=" << s1r.lambda << " gamma=" << s1r.gamma << ", "
            << structure.edges.size() << " stable edges, latent dim "
            << structure.colspace.cols() << "; wrote " << report_out << ", " << structure_out
            << ", " << model_out << "\n";
  return refit.converged ? kExitOk : kExitNotConverged;
}

int cmd_evaluate(const std::string& config_path) {
  RunConfig cfg = RunConfig::from_file(config_path);
  const std::string model_path = cfg.require_string("model");
  const std::string test_path = cfg.require_string("data_test");
  const std::string truth_path = cfg.get_string("truth", "");
  const std::string no_latent_path = cfg.get_string("model_no_latent", "");
  const std::string metrics_out = cfg.get_string("metrics_out", "lvgm_metrics.json");
  SolveOptions opts = solve_options_from_config(cfg);
  cfg.finalize();
  check_input_path(model_path);
  check_input_path(test_path);
  if (!truth_path.empty()) check_input_path(truth_path);
  if (!no_latent_path.empty()) check_input_path(no_latent_path);
  check_output_path(metrics_out);

  const LoadedModel model = read_model_json(model_path);
  const DataMatrix test = read_data_csv(test_path);

  nlohmann::json out;
  out["nll_latent"] = holdout_nll(model.fit, test, model.family, opts);

  if (!no_latent_path.empty()) {
    const LoadedModel plain = read_model_json(no_latent_path);
    out["nll_no_latent"] = holdout_nll(plain.fit, test, plain.family, opts);
  } else {
    FitResult stripped = model.fit;  // same Theta with the latent block removed
    stripped.L_basis = Matrix(stripped.params.theta.rows(), 0);
    stripped.L_coords = Matrix(0, stripped.params.L.cols());
    stripped.params.L.setZero();
    stripped.rank = 0;
    out["nll_no_latent"] = holdout_nll(stripped, test, model.family, opts);
  }

  if (!truth_path.empty()) {
    const TruthBundle truth = read_truth_json(truth_path);
    const EdgeSet est = model.fit.support;
    const EdgeSet truth_edges = support_of(truth.theta, 1e-12);
    const auto [fdr, pwr] = fdr_pwr(est, truth_edges);
    out["fdr"] = fdr;
    out["pwr"] = pwr;
    out["recovery_success"] = (est == truth_edges && model.fit.rank == truth.spec.r);
    out["edges_estimated"] = est.size();
    out["edges_true"] = truth_edges.size();
    out["rank_estimated"] = model.fit.rank;
    out["rank_true"] = truth.spec.r;
  }

  std::ofstream stream(metrics_out, std::ios::binary);
  if (!stream) throw ConfigError("cannot open for writing: " + metrics_out);
  stream << out.dump(2) << '\n';
  std::cout << "wrote " << metrics_out << "\n";
  return kExitOk;
}

int cmd_experiment(const std::string& config_path, bool reduced) {
  RunConfig cfg = RunConfig::from_file(config_path);
  TruthSpec spec = truth_from_config(cfg);
  const std::vector<double> n_grid = cfg.get_double_list("n_grid", {500, 1000, 2000});
  const int trials = static_cast<int>(cfg.get_long("trials", 10));
  const double c1 = cfg.get_double("c1", 0.25);
  const double c2 = cfg.get_double("c2", 1.0);
  const long burn_in = cfg.get_long("burn_in", -1);
  const long thin = cfg.get_long("thin", -1);
  const std::uint64_t seed = cfg.get_seed("seed", 0);
  int threads = static_cast<int>(cfg.get_long("threads", 0));
  const std::string results_out = cfg.get_string("results_out", "lvgm_experiment.csv");
  SolveOptions opts = solve_options_from_config(cfg);
  cfg.finalize();
  check_output_path(results_out);
  if (reduced && spec.family.kind != Family::gaussian) {
    throw ConfigError("--reduced applies to the gaussian family only");
  }

  const int points = static_cast<int>(n_grid.size());
  const int jobs = points * trials;
  std::vector<char> success(static_cast<std::size_t>(jobs), 0);

  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, jobs));

  std::atomic<int> next{0};
  const auto worker = [&]() {
    for (;;) {
      const int job = next.fetch_add(1);
      if (job >= jobs) return;
      const int ni = job / trials;
      const int trial = job % trials;
      const int n = static_cast<int>(n_grid[static_cast<std::size_t>(ni)]);
      // The truth depends on the trial only, so curves over n share models.
      const std::uint64_t truth_seed = derive_seed(seed, static_cast<std::uint64_t>(trial));
      const std::uint64_t data_seed =
          derive_seed(seed, 1000003ULL * static_cast<std::uint64_t>(trial + 1) +
                                static_cast<std::uint64_t>(ni));
      try {
        const Matrix theta = make_theta(spec, truth_seed);
        const Matrix B = make_loading(spec, truth_seed);
        const DataMatrix data = sample(spec, theta, B, n, burn_in, thin, data_seed);
        PenaltyConfig pen;
        pen.lambda = c1 * std::sqrt(static_cast<double>(spec.d) / n);
        pen.gamma = c2 * std::sqrt(static_cast<double>(spec.d)) / n;
        const FitResult fr = (reduced && spec.family.kind == Family::gaussian)
                                 ? fit_gaussian_reduced(data, pen, opts)
                                 : fit(data, spec.family, pen, opts);
        success[static_cast<std::size_t>(job)] =
            recovery_success(fr, theta, spec.r) ? 1 : 0;
      } catch (const std::exception& e) {
        std::cerr << "trial n=" << n << " t=" << trial << " failed: " << e.what() << "\n";
        success[static_cast<std::size_t>(job)] = 0;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  std::ofstream out(results_out, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + results_out);
  out << "family,graph,d,r,n,trials,successes,success_rate\n";
  for (int ni = 0; ni < points; ++ni) {
    int wins = 0;
    for (int t = 0; t < trials; ++t) wins += success[static_cast<std::size_t>(ni * trials + t)];
    const int n = static_cast<int>(n_grid[static_cast<std::size_t>(ni)]);
    char rate[32];
    std::snprintf(rate, sizeof(rate), "%.17g", static_cast<double>(wins) / trials);
    out << family_name(spec.family.kind) << ',' << graph_kind_name(spec.graph) << ',' << spec.d
        << ',' << spec.r << ',' << n << ',' << trials << ',' << wins << ',' << rate << '\n';
  }
  std::cout << "wrote " << results_out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent-variable exponential-family graphical models"};
  app.require_subcommand(1);

  std::string config_path;
  bool reduced = false;
  bool no_latent = false;

  CLI::App* generate = app.add_subcommand("generate", "Sample synthetic data from a ground-truth model");
  generate->add_option("--config", config_path, "run configuration file")->required();

  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit a model to CSV data");
  fit_cmd->add_option("--config", config_path, "run configuration file")->required();
  fit_cmd->add_flag("--reduced", reduced, "use the n-independent gaussian reformulation");
  fit_cmd->add_flag("--no-latent", no_latent, "pin L = 0 (no latent effects)");

  CLI::App* select = app.add_subcommand("select", "Stability-based model selection (3 stages)");
  select->add_option("--config", config_path, "run configuration file")->required();

  CLI::App* evaluate = app.add_subcommand("evaluate", "Held-out evaluation and recovery metrics");
  evaluate->add_option("--config", config_path, "run configuration file")->required();

  CLI::App* experiment = app.add_subcommand("experiment", "Recovery-probability sweep over n");
  experiment->add_option("--config", config_path, "run configuration file")->required();
  experiment->add_flag("--reduced", reduced, "use the n-independent gaussian reformulation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? kExitConfig : kExitOk;
  }

  try {
    if (generate->parsed()) return cmd_generate(config_path);
    if (fit_cmd->parsed()) return cmd_fit(config_path, reduced, no_latent);
    if (select->parsed()) return cmd_select(config_path);
    if (evaluate->parsed()) return cmd_evaluate(config_path);
    if (experiment->parsed()) return cmd_experiment(config_path, reduced);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitConfig;
}
