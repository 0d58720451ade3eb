#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lvgm/family.hpp"
#include "lvgm/gaussian_reduced.hpp"
#include "lvgm/metrics.hpp"
#include "lvgm/model_io.hpp"
#include "lvgm/objective.hpp"
#include "lvgm/prox.hpp"
#include "lvgm/solver.hpp"
#include "lvgm/stability.hpp"
#include "lvgm/synthgen.hpp"

namespace py = pybind11;
using namespace lvgm;

PYBIND11_MODULE(_lvgm, m) {
  m.doc() = "Latent-variable exponential-family graphical models (sparse + low-rank fitting)";

  py::enum_<Family>(m, "Family")
      .value("gaussian", Family::gaussian)
      .value("ising", Family::ising)
      .value("poisson", Family::poisson)
      .value("exponential", Family::exponential);

  py::class_<FamilySpec>(m, "FamilySpec")
      .def(py::init([](Family kind, double margin) {
             return FamilySpec{kind, margin};
           }),
           py::arg("kind"), py::arg("strict_margin") = 1e-8)
      .def_readwrite("kind", &FamilySpec::kind)
      .def_readwrite("strict_margin", &FamilySpec::strict_margin)
      .def("domain_description", &FamilySpec::domain_description)
      .def("value_in_domain", &FamilySpec::value_in_domain);

  py::class_<DataMatrix>(m, "DataMatrix")
      .def(py::init([](const Matrix& X) { return DataMatrix(X); }), py::arg("X"),
           "X has one column per sample")
      .def_readwrite("X", &DataMatrix::X)
      .def_readwrite("names", &DataMatrix::names)
      .def_property_readonly("d", &DataMatrix::dim)
      .def_property_readonly("n", &DataMatrix::samples);

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<>())
      .def_readwrite("alpha", &ModelParams::alpha)
      .def_readwrite("theta", &ModelParams::theta)
      .def_readwrite("L", &ModelParams::L);

  m.def("rho", &rho, py::arg("family"), py::arg("u"));
  m.def("rho_prime", &rho_prime, py::arg("family"), py::arg("u"));
  m.def("log_partition_gaussian", &log_partition_gaussian, py::arg("alpha"), py::arg("theta"));
  m.def("is_feasible", &is_feasible, py::arg("family"), py::arg("alpha_eff"), py::arg("theta"));
  m.def("node_conditional_param", &node_conditional_param, py::arg("family"), py::arg("alpha"),
        py::arg("latent_effect"), py::arg("theta"), py::arg("x"), py::arg("i"));

  py::class_<SmoothEval>(m, "SmoothEval")
      .def_readonly("value", &SmoothEval::value)
      .def_readonly("grad_alpha", &SmoothEval::grad_alpha)
      .def_readonly("grad_theta", &SmoothEval::grad_theta)
      .def_readonly("grad_L", &SmoothEval::grad_L);

  m.def("gaussian_smooth", &gaussian_smooth, py::arg("theta"), py::arg("L"), py::arg("X"),
        py::arg("n_norm") = -1);
  m.def("pseudo_smooth", &pseudo_smooth, py::arg("family"), py::arg("alpha"), py::arg("theta"),
        py::arg("L"), py::arg("X"));

  py::class_<PenaltyConfig>(m, "PenaltyConfig")
      .def(py::init([](double lambda, double gamma, bool diag) {
             return PenaltyConfig{lambda, gamma, diag};
           }),
           py::arg("lambda_") = 0.0, py::arg("gamma") = 0.0, py::arg("penalize_diagonal") = false)
      .def_readwrite("lambda_", &PenaltyConfig::lambda)
      .def_readwrite("gamma", &PenaltyConfig::gamma)
      .def_readwrite("penalize_diagonal", &PenaltyConfig::penalize_diagonal);

  m.def("prox_l1_theta", &prox_l1_theta, py::arg("M"), py::arg("t"), py::arg("family"),
        py::arg("cfg"));
  m.def("svt", &svt, py::arg("M"), py::arg("t"));
  m.def("project_domain", &project_domain, py::arg("family"), py::arg("alpha"), py::arg("L"),
        py::arg("margin"));
  m.def("nuclear_norm", &nuclear_norm, py::arg("M"));

  py::class_<SolveOptions>(m, "SolveOptions")
      .def(py::init<>())
      .def_readwrite("max_iter", &SolveOptions::max_iter)
      .def_readwrite("tol_rel_obj", &SolveOptions::tol_rel_obj)
      .def_readwrite("backtrack_factor", &SolveOptions::backtrack_factor)
      .def_readwrite("init_step", &SolveOptions::init_step)
      .def_readwrite("acceleration", &SolveOptions::acceleration)
      .def_readwrite("seed", &SolveOptions::seed)
      .def_readwrite("resid_tol", &SolveOptions::resid_tol)
      .def_readwrite("support_tol", &SolveOptions::support_tol)
      .def_readwrite("rank_tol", &SolveOptions::rank_tol)
      .def_readwrite("center_gaussian", &SolveOptions::center_gaussian)
      .def_readwrite("init", &SolveOptions::init);

  py::class_<StructureConstraints>(m, "StructureConstraints")
      .def(py::init<>())
      .def_readwrite("support", &StructureConstraints::support)
      .def_readwrite("colspace", &StructureConstraints::colspace)
      .def_readwrite("fix_alpha", &StructureConstraints::fix_alpha)
      .def_readwrite("fix_theta", &StructureConstraints::fix_theta);

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("params", &FitResult::params)
      .def_readonly("L_basis", &FitResult::L_basis)
      .def_readonly("L_coords", &FitResult::L_coords)
      .def_readonly("objective_trace", &FitResult::objective_trace)
      .def_readonly("support", &FitResult::support)
      .def_readonly("rank", &FitResult::rank)
      .def_readonly("iterations", &FitResult::iterations)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("kkt_residual", &FitResult::kkt_residual)
      .def_readonly("center", &FitResult::center)
      .def_readonly("lambda_", &FitResult::lambda)
      .def_readonly("gamma", &FitResult::gamma);

  m.def("support_of", &support_of, py::arg("theta"), py::arg("tol") = 1e-8);
  m.def("fit", &fit, py::arg("data"), py::arg("family"), py::arg("cfg"),
        py::arg("opts") = SolveOptions{}, py::arg("constraints") = std::nullopt,
        py::call_guard<py::gil_scoped_release>());
  m.def("lambda_max", &lambda_max, py::arg("data"), py::arg("family"), py::arg("cfg"));
  m.def("gamma_max", &gamma_max, py::arg("data"), py::arg("family"));

  py::class_<KktReport>(m, "KktReport")
      .def_readonly("theta_excess", &KktReport::theta_excess)
      .def_readonly("latent_excess", &KktReport::latent_excess)
      .def_readonly("pass_", &KktReport::pass);
  m.def("kkt_check", &kkt_check, py::arg("fit_result"), py::arg("data"), py::arg("family"),
        py::arg("cfg"), py::arg("tol") = 1e-5);

  py::class_<ReducedInstance>(m, "ReducedInstance")
      .def_readonly("sigma", &ReducedInstance::sigma)
      .def_readonly("sqrt_sigma", &ReducedInstance::sqrt_sigma)
      .def_readonly("U", &ReducedInstance::U)
      .def_readonly("V", &ReducedInstance::V)
      .def_readonly("n", &ReducedInstance::n);
  py::class_<ReducedFit>(m, "ReducedFit")
      .def_readonly("theta", &ReducedFit::theta)
      .def_readonly("H", &ReducedFit::H)
      .def_readonly("objective_trace", &ReducedFit::objective_trace)
      .def_readonly("iterations", &ReducedFit::iterations)
      .def_readonly("converged", &ReducedFit::converged);
  m.def("reduce", &reduce, py::arg("data"));
  m.def("fit_reduced", &fit_reduced, py::arg("instance"), py::arg("cfg"),
        py::arg("opts") = SolveOptions{}, py::call_guard<py::gil_scoped_release>());
  m.def("reconstruct_L", &reconstruct_L, py::arg("H_hat"), py::arg("instance"));
  m.def("fit_gaussian_reduced", &fit_gaussian_reduced, py::arg("data"), py::arg("cfg"),
        py::arg("opts") = SolveOptions{}, py::call_guard<py::gil_scoped_release>());

  py::enum_<GraphKind>(m, "GraphKind")
      .value("cycle", GraphKind::cycle)
      .value("erdos_renyi", GraphKind::erdos_renyi);
  py::enum_<LatentLaw>(m, "LatentLaw")
      .value("rademacher", LatentLaw::rademacher)
      .value("standard_normal", LatentLaw::standard_normal)
      .value("exponential_mean1", LatentLaw::exponential_mean1);

  py::class_<TruthSpec>(m, "TruthSpec")
      .def(py::init<>())
      .def_readwrite("family", &TruthSpec::family)
      .def_readwrite("d", &TruthSpec::d)
      .def_readwrite("graph", &TruthSpec::graph)
      .def_readwrite("er_prob", &TruthSpec::er_prob)
      .def_readwrite("edge_weight", &TruthSpec::edge_weight)
      .def_readwrite("r", &TruthSpec::r)
      .def_readwrite("singular_values", &TruthSpec::singular_values)
      .def_readwrite("coherence_target", &TruthSpec::coherence_target)
      .def_readwrite("latent_law", &TruthSpec::latent_law)
      .def_readwrite("alpha_value", &TruthSpec::alpha_value);

  m.def("make_theta", &make_theta, py::arg("spec"), py::arg("seed"));
  m.def("squared_coherence", &squared_coherence, py::arg("basis"));
  m.def("make_loading", &make_loading, py::arg("spec"), py::arg("seed"));
  m.def("sample", &sample, py::arg("spec"), py::arg("theta"), py::arg("B"), py::arg("n"),
        py::arg("burn_in") = -1, py::arg("thin") = -1, py::arg("seed") = 0,
        py::call_guard<py::gil_scoped_release>());

  py::class_<StabilityReport>(m, "StabilityReport")
      .def_readonly("edge_freq", &StabilityReport::edge_freq)
      .def_readonly("avg_projection", &StabilityReport::avg_projection)
      .def_readonly("pi_graph", &StabilityReport::pi_graph)
      .def_readonly("pi_latent", &StabilityReport::pi_latent)
      .def_readonly("lambda_", &StabilityReport::lambda)
      .def_readonly("gamma", &StabilityReport::gamma)
      .def_readonly("num_subsamples", &StabilityReport::num_subsamples);

  py::class_<StabilityOptions>(m, "StabilityOptions")
      .def(py::init<>())
      .def_readwrite("solve", &StabilityOptions::solve)
      .def_readwrite("threads", &StabilityOptions::threads);

  py::class_<Stage1Options>(m, "Stage1Options")
      .def(py::init<>())
      .def_readwrite("t_graph", &Stage1Options::t_graph)
      .def_readwrite("t_latent", &Stage1Options::t_latent)
      .def_readwrite("num_subsamples", &Stage1Options::num_subsamples)
      .def_readwrite("gamma_first", &Stage1Options::gamma_first)
      .def_readwrite("stab", &Stage1Options::stab);

  py::class_<Stage1Result>(m, "Stage1Result")
      .def_readonly("lambda_", &Stage1Result::lambda)
      .def_readonly("gamma", &Stage1Result::gamma)
      .def_readonly("report", &Stage1Result::report)
      .def_readonly("graph_threshold_reached", &Stage1Result::graph_threshold_reached)
      .def_readonly("latent_threshold_reached", &Stage1Result::latent_threshold_reached);

  py::class_<SelectedStructure>(m, "SelectedStructure")
      .def(py::init<>())
      .def_readwrite("edges", &SelectedStructure::edges)
      .def_readwrite("colspace", &SelectedStructure::colspace)
      .def_readwrite("delta_graph", &SelectedStructure::delta_graph)
      .def_readwrite("delta_latent", &SelectedStructure::delta_latent);

  m.def("subsample_fit", &subsample_fit, py::arg("data"), py::arg("family"), py::arg("lambda_"),
        py::arg("gamma"), py::arg("num_subsamples"), py::arg("seed"),
        py::arg("opts") = StabilityOptions{}, py::call_guard<py::gil_scoped_release>());
  m.def("stage1_select", &stage1_select, py::arg("data"), py::arg("family"),
        py::arg("lambda_grid"), py::arg("gamma_grid"), py::arg("opts"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>());
  m.def("stage2_structure", &stage2_structure, py::arg("report"), py::arg("delta_graph") = 0.7,
        py::arg("delta_latent") = 0.7);
  m.def("stage3_refit", &stage3_refit, py::arg("data"), py::arg("family"), py::arg("structure"),
        py::arg("opts") = SolveOptions{}, py::call_guard<py::gil_scoped_release>());

  m.def("fdr_pwr", &fdr_pwr, py::arg("estimated"), py::arg("truth"));
  m.def("recovery_success", &recovery_success, py::arg("fit_result"), py::arg("truth_theta"),
        py::arg("truth_rank"));
  m.def("holdout_nll", &holdout_nll, py::arg("model"), py::arg("X_test"), py::arg("family"),
        py::arg("opts") = SolveOptions{}, py::call_guard<py::gil_scoped_release>());

  m.def("read_data_csv", &read_data_csv, py::arg("path"));
  m.def("write_data_csv", &write_data_csv, py::arg("data"), py::arg("path"));
  m.def("write_model_json", &write_model_json, py::arg("fit_result"), py::arg("family"),
        py::arg("path"));
}
