#include "lvgm/model_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "lvgm/errors.hpp"

namespace lvgm {

namespace {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  return out;
}

json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

json matrix_to_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
  Matrix M(rows, cols);
  if (static_cast<Eigen::Index>(j.size()) != rows) throw ConfigError("matrix row count mismatch");
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw ConfigError("matrix column count mismatch");
    for (Eigen::Index c = 0; c < cols; ++c) M(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return M;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

// Upper-triangle (i <= j) nonzero triplets of a symmetric matrix.
json theta_to_triplets(const Matrix& theta) {
  json out = json::array();
  for (Eigen::Index i = 0; i < theta.rows(); ++i) {
    for (Eigen::Index j = i; j < theta.cols(); ++j) {
      if (theta(i, j) != 0.0) out.push_back(json::array({i, j, theta(i, j)}));
    }
  }
  return out;
}

Matrix theta_from_triplets(const json& j, Eigen::Index d) {
  Matrix theta = Matrix::Zero(d, d);
  for (const auto& t : j) {
    const auto i = t.at(0).get<Eigen::Index>();
    const auto c = t.at(1).get<Eigen::Index>();
    const double v = t.at(2).get<double>();
    if (i < 0 || c < 0 || i >= d || c >= d) throw ConfigError("theta triplet out of range");
    theta(i, c) = v;
    theta(c, i) = v;
  }
  return theta;
}

}  // namespace

DataMatrix read_data_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open: " + path);

  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty CSV: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> names;
  {
    std::stringstream header(line);
    std::string field;
    while (std::getline(header, field, ',')) names.push_back(field);
  }
  const std::size_t d = names.size();
  if (d == 0) throw ConfigError("CSV header has no columns: " + path);

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(d);
    std::size_t start = 0;
    std::size_t col = 0;
    while (start <= line.size()) {
      std::size_t end = line.find(',', start);
      if (end == std::string::npos) end = line.size();
      const char* first = line.data() + start;
      const char* last = line.data() + end;
      double v = 0.0;
      const auto res = std::from_chars(first, last, v);
      if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
        throw ConfigError(path + ": invalid or non-finite value at data row " +
                          std::to_string(line_no - 1) + ", column " + std::to_string(col + 1) +
                          " (" + (col < d ? names[col] : std::string("?")) + ")");
      }
      row.push_back(v);
      ++col;
      start = end + 1;
      if (end == line.size()) break;
    }
    if (row.size() != d) {
      throw ConfigError(path + ": data row " + std::to_string(line_no - 1) + " has " +
                        std::to_string(row.size()) + " fields, expected " + std::to_string(d));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("CSV has no data rows: " + path);

  Matrix X(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t i = 0; i < d; ++i) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[k][i];
    }
  }
  return DataMatrix(std::move(X), std::move(names));
}

void write_data_csv(const DataMatrix& data, const std::string& path) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < data.names.size(); ++i) {
    if (i) out << ',';
    out << data.names[i];
  }
  out << '\n';
  for (Eigen::Index k = 0; k < data.samples(); ++k) {
    for (Eigen::Index i = 0; i < data.dim(); ++i) {
      if (i) out << ',';
      out << format_double(data.X(i, k));
    }
    out << '\n';
  }
}

void write_truth_json(const TruthBundle& truth, const std::string& path) {
  json j;
  j["format"] = "lvgm-truth-v1";
  j["family"] = family_name(truth.spec.family.kind);
  j["strict_margin"] = truth.spec.family.strict_margin;
  j["d"] = truth.spec.d;
  j["graph"] = graph_kind_name(truth.spec.graph);
  j["er_prob"] = truth.spec.er_prob;
  j["edge_weight"] = truth.spec.edge_weight;
  j["r"] = truth.spec.r;
  j["singular_values"] = truth.spec.singular_values;
  j["coherence_target"] = truth.spec.coherence_target;
  j["latent_law"] = latent_law_name(truth.spec.latent_law);
  j["alpha_value"] = truth.spec.alpha_value;
  j["seed"] = truth.seed;
  j["theta_triplets"] = theta_to_triplets(truth.theta);
  j["B"] = matrix_to_json(truth.B);
  open_out(path) << j.dump(2) << '\n';
}

TruthBundle read_truth_json(const std::string& path) {
  const json j = load_json(path);
  TruthBundle t;
  t.spec.family.kind = family_from_name(j.at("family").get<std::string>());
  t.spec.family.strict_margin = j.at("strict_margin").get<double>();
  t.spec.d = j.at("d").get<int>();
  t.spec.graph = graph_kind_from_name(j.at("graph").get<std::string>());
  t.spec.er_prob = j.at("er_prob").get<double>();
  t.spec.edge_weight = j.at("edge_weight").get<double>();
  t.spec.r = j.at("r").get<int>();
  t.spec.singular_values = j.at("singular_values").get<std::vector<double>>();
  t.spec.coherence_target = j.at("coherence_target").get<double>();
  t.spec.latent_law = latent_law_from_name(j.at("latent_law").get<std::string>());
  t.spec.alpha_value = j.at("alpha_value").get<double>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.theta = theta_from_triplets(j.at("theta_triplets"), t.spec.d);
  t.B = matrix_from_json(j.at("B"), t.spec.d, t.spec.r);
  return t;
}

void write_model_json(const FitResult& fit, const FamilySpec& family, const std::string& path) {
  const Eigen::Index d = fit.params.theta.rows();
  const Eigen::Index n = fit.params.L.cols();
  json j;
  j["format"] = "lvgm-model-v1";
  j["family"] = family_name(family.kind);
  j["strict_margin"] = family.strict_margin;
  j["d"] = d;
  j["n"] = n;
  j["alpha"] = vector_to_json(fit.params.alpha);
  if (fit.center.size() > 0) j["center"] = vector_to_json(fit.center);
  j["theta_triplets"] = theta_to_triplets(fit.params.theta);
  j["latent"] = {{"rank", fit.L_basis.cols()},
                 {"basis", matrix_to_json(fit.L_basis)},
                 {"coords", matrix_to_json(fit.L_coords)}};
  j["diagnostics"] = {
      {"objective", fit.objective_trace.empty() ? 0.0 : fit.objective_trace.back()},
      {"iterations", fit.iterations},
      {"converged", fit.converged},
      {"support_size", fit.support.size()},
      {"rank", fit.rank},
      {"lambda", fit.lambda},
      {"gamma", fit.gamma},
      {"kkt_residual", fit.kkt_residual}};
  open_out(path) << j.dump(2) << '\n';
}

LoadedModel read_model_json(const std::string& path) {
  const json j = load_json(path);
  LoadedModel out;
  out.family.kind = family_from_name(j.at("family").get<std::string>());
  out.family.strict_margin = j.at("strict_margin").get<double>();
  const auto d = j.at("d").get<Eigen::Index>();
  const auto n = j.at("n").get<Eigen::Index>();
  out.fit.params.alpha = vector_from_json(j.at("alpha"));
  if (j.contains("center")) out.fit.center = vector_from_json(j.at("center"));
  out.fit.params.theta = theta_from_triplets(j.at("theta_triplets"), d);
  const auto& latent = j.at("latent");
  const auto rank = latent.at("rank").get<Eigen::Index>();
  out.fit.L_basis = matrix_from_json(latent.at("basis"), d, rank);
  out.fit.L_coords = matrix_from_json(latent.at("coords"), rank, n);
  out.fit.params.L = rank > 0 ? Matrix(out.fit.L_basis * out.fit.L_coords) : Matrix::Zero(d, n);
  const auto& diag = j.at("diagnostics");
  out.fit.objective_trace = {diag.at("objective").get<double>()};
  out.fit.iterations = diag.at("iterations").get<int>();
  out.fit.converged = diag.at("converged").get<bool>();
  out.fit.rank = diag.at("rank").get<int>();
  out.fit.lambda = diag.at("lambda").get<double>();
  out.fit.gamma = diag.at("gamma").get<double>();
  out.fit.kkt_residual = diag.at("kkt_residual").get<double>();
  out.fit.support = support_of(out.fit.params.theta);
  return out;
}

void write_report_json(const StabilityReport& report, const std::string& path) {
  json j;
  j["format"] = "lvgm-stability-v1";
  j["d"] = report.d;
  j["lambda"] = report.lambda;
  j["gamma"] = report.gamma;
  j["num_subsamples"] = report.num_subsamples;
  j["num_failed"] = report.num_failed;
  j["pi_graph"] = report.pi_graph;
  j["pi_latent"] = report.pi_latent;
  json freq = json::array();
  for (const auto& [e, p] : report.edge_freq) freq.push_back(json::array({e.first, e.second, p}));
  j["edge_freq"] = std::move(freq);
  j["avg_projection"] = matrix_to_json(report.avg_projection);
  open_out(path) << j.dump(2) << '\n';
}

StabilityReport read_report_json(const std::string& path) {
  const json j = load_json(path);
  StabilityReport rep;
  rep.d = j.at("d").get<Eigen::Index>();
  rep.lambda = j.at("lambda").get<double>();
  rep.gamma = j.at("gamma").get<double>();
  rep.num_subsamples = j.at("num_subsamples").get<int>();
  rep.num_failed = j.at("num_failed").get<int>();
  rep.pi_graph = j.at("pi_graph").get<double>();
  rep.pi_latent = j.at("pi_latent").get<double>();
  for (const auto& t : j.at("edge_freq")) {
    rep.edge_freq[{t.at(0).get<int>(), t.at(1).get<int>()}] = t.at(2).get<double>();
  }
  rep.avg_projection = matrix_from_json(j.at("avg_projection"), rep.d, rep.d);
  return rep;
}

void write_structure_json(const SelectedStructure& structure, const std::string& path) {
  json j;
  j["format"] = "lvgm-structure-v1";
  j["delta_graph"] = structure.delta_graph;
  j["delta_latent"] = structure.delta_latent;
  json edges = json::array();
  for (const auto& e : structure.edges) edges.push_back(json::array({e.first, e.second}));
  j["edges"] = std::move(edges);
  j["d"] = structure.colspace.rows();
  j["colspace"] = matrix_to_json(structure.colspace);
  j["dim"] = structure.colspace.cols();
  open_out(path) << j.dump(2) << '\n';
}

SelectedStructure read_structure_json(const std::string& path) {
  const json j = load_json(path);
  SelectedStructure s;
  s.delta_graph = j.at("delta_graph").get<double>();
  s.delta_latent = j.at("delta_latent").get<double>();
  for (const auto& e : j.at("edges")) s.edges.emplace(e.at(0).get<int>(), e.at(1).get<int>());
  s.colspace = matrix_from_json(j.at("colspace"), j.at("d").get<Eigen::Index>(),
                                j.at("dim").get<Eigen::Index>());
  return s;
}

}  // namespace lvgm
