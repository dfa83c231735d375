#include "agc/io.hpp"

#include <fstream>
#include <sstream>

#include "agc/error.hpp"

namespace agc {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

const Json& require(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(where + ": missing key '" + key + "'");
  return j.at(key);
}

Mat dense_from_rows(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw FormatError(what + ": expected a non-empty array of rows");
  if (j[0].is_number()) {  // a single row
    Mat m(1, static_cast<int>(j.size()));
    for (size_t c = 0; c < j.size(); ++c) m(0, static_cast<int>(c)) = j[c].get<double>();
    return m;
  }
  const size_t rows = j.size();
  const size_t cols = j[0].size();
  Mat m(static_cast<int>(rows), static_cast<int>(cols));
  for (size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw FormatError(what + ": ragged matrix rows");
    for (size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) throw FormatError(what + ": non-numeric entry");
      m(static_cast<int>(r), static_cast<int>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

Vec vector_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw FormatError(what + ": expected an array");
  Vec v(static_cast<int>(j.size()));
  for (size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) throw FormatError(what + ": non-numeric entry");
    v[static_cast<int>(k)] = j[k].get<double>();
  }
  return v;
}

Json rows_json(const Mat& m) {
  Json out = Json::array();
  for (int r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

std::vector<Mat> time_series(const Json& j, int T, const std::string& what) {
  if (!j.is_array() || j.empty()) throw FormatError(what + ": expected a matrix or a list of matrices");
  const bool single = j[0].is_number() || (j[0].is_array() && (j[0].empty() || j[0][0].is_number()));
  if (single) return std::vector<Mat>(static_cast<size_t>(T), dense_from_rows(j, what));
  if (static_cast<int>(j.size()) != T) {
    throw FormatError(what + ": expected " + std::to_string(T) + " matrices, got " + std::to_string(j.size()));
  }
  std::vector<Mat> out;
  for (size_t t = 0; t < j.size(); ++t) out.push_back(dense_from_rows(j[t], what + "[" + std::to_string(t) + "]"));
  return out;
}

DirectedGraph graph_from_json(const Json& j, int n, const std::string& what) {
  if (!j.is_array()) throw FormatError(what + ": expected a list of [from, to] pairs");
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
      throw FormatError(what + ": edges must be [from, to] integer pairs");
    }
    const int a = e[0].get<int>();
    const int b = e[1].get<int>();
    if (a < 1 || a > n || b < 1 || b > n) throw FormatError(what + ": node label out of range 1.." + std::to_string(n));
    edges.emplace_back(a - 1, b - 1);
  }
  try {
    return DirectedGraph(n, edges);
  } catch (const Error& err) {
    throw FormatError(what + ": " + err.what());
  }
}

Json graph_to_json(const DirectedGraph& g) {
  Json out = Json::array();
  for (auto [a, b] : g.edges()) out.push_back({a + 1, b + 1});
  return out;
}

SolveStatus status_from_string(const std::string& s) {
  for (SolveStatus st : {SolveStatus::Optimal, SolveStatus::Infeasible, SolveStatus::Unbounded,
                         SolveStatus::NumericalFailure}) {
    if (s == to_string(st)) return st;
  }
  throw FormatError("unknown status '" + s + "'");
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw FormatError("'" + path + "': " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << doc.dump(1) << '\n';
}

Json case_study_document(double x_max) {
  const SystemModel m = case_study_model();
  Json d;
  d["subsystems"] = {{"nx", m.nx}, {"nu", m.nu}};
  d["horizon"] = m.horizon;
  d["A"] = rows_json(m.A[0]);
  d["B"] = rows_json(m.B[0]);
  d["sigma"] = "identity";
  d["distribution"] = "uniform";
  d["constraints"] = {{"state_inf_bound", x_max}, {"input_inf_bound", 2.5}};
  d["cost"] = {{"state_weights", {0.1, 0.1, 2.0}}, {"input_weights", {5.0, 5.0, 1.0}}};
  d["information_graphs"] = {{"G_I1", graph_to_json(case_study_graph(1))},
                             {"G_I2", graph_to_json(case_study_graph(2))}};
  return d;
}

std::vector<std::string> graph_names(const Json& doc) {
  std::vector<std::string> out;
  if (doc.contains("information_graphs")) {
    for (auto it = doc["information_graphs"].begin(); it != doc["information_graphs"].end(); ++it) out.push_back(it.key());
  } else if (doc.contains("information_graph")) {
    out.push_back("default");
  }
  return out;
}

ProblemInstance instance_from_json(const Json& doc, const std::string& graph, std::optional<double> x_max) {
  const std::string where = "problem";
  const Json& subs = require(doc, "subsystems", where);
  SystemModel m;
  try {
    m.nx = require(subs, "nx", "subsystems").get<std::vector<int>>();
    m.nu = require(subs, "nu", "subsystems").get<std::vector<int>>();
    m.horizon = require(doc, "horizon", where).get<int>();
  } catch (const Json::exception& e) {
    throw FormatError(std::string("problem: ") + e.what());
  }
  if (m.nx.size() != m.nu.size() || m.nx.empty()) throw FormatError("subsystems: nx and nu must have equal, nonzero length");
  if (m.horizon < 1) throw EmptyHorizon("horizon must be at least 1");
  m.A = time_series(require(doc, "A", where), m.horizon, "A");
  m.B = time_series(require(doc, "B", where), m.horizon, "B");
  validate_system(m);
  const int nX = m.state_traj_dim();
  const int nU = m.input_traj_dim();

  EllipsoidalUncertainty dist;
  const Json& sj = require(doc, "sigma", where);
  const Mat sigma = sj.is_string() ? (sj.get<std::string>() == "identity" ? Mat::Identity(nX, nX)
                                                                           : throw FormatError("sigma: unknown keyword"))
                                   : dense_from_rows(sj, "sigma");
  const std::string distribution = doc.value("distribution", std::string("uniform"));
  if (distribution != "uniform") throw FormatError("distribution: only \"uniform\" is supported");
  dist.sigma = sigma;
  if (sigma.rows() == nX && sigma.cols() == nX) dist.second_moment = second_moment_uniform(sigma);
  if (doc.contains("second_moment")) dist.second_moment = dense_from_rows(doc["second_moment"], "second_moment");

  ConstraintSet cons;
  const Json& cj = require(doc, "constraints", where);
  if (cj.contains("state_inf_bound") || cj.contains("input_inf_bound")) {
    const double xb = x_max ? *x_max : require(cj, "state_inf_bound", "constraints").get<double>();
    const double ub = require(cj, "input_inf_bound", "constraints").get<double>();
    cons = ConstraintSet::box(m, xb, ub);
  } else {
    if (x_max) throw FormatError("--xmax needs constraints given by state_inf_bound");
    cons.Fx = dense_from_rows(require(cj, "Fx", "constraints"), "Fx");
    cons.Fu = dense_from_rows(require(cj, "Fu", "constraints"), "Fu");
    cons.g = vector_from_json(require(cj, "g", "constraints"), "g");
    cons.Fw = cj.contains("Fw") ? dense_from_rows(cj["Fw"], "Fw") : Mat::Zero(cons.Fx.rows(), nX);
  }

  CostSpec cost;
  const Json& kj = require(doc, "cost", where);
  if (kj.contains("state_weights")) {
    cost = CostSpec::per_period(m, vector_from_json(kj["state_weights"], "state_weights"),
                                vector_from_json(require(kj, "input_weights", "cost"), "input_weights"));
  } else {
    cost.Rx = dense_from_rows(require(kj, "Rx", "cost"), "Rx");
    cost.Ru = dense_from_rows(require(kj, "Ru", "cost"), "Ru");
  }

  const int N = m.num_subsystems();
  DirectedGraph info;
  std::string name = graph;
  if (doc.contains("information_graphs")) {
    const Json& gs = doc["information_graphs"];
    if (name.empty()) {
      if (gs.size() != 1) throw FormatError("problem has several information graphs; choose one with --graph");
      name = gs.begin().key();
    }
    if (!gs.contains(name)) throw FormatError("no information graph named '" + name + "'");
    info = graph_from_json(gs[name], N, "information_graphs." + name);
  } else {
    if (!name.empty() && name != "default") throw FormatError("no information graph named '" + name + "'");
    info = graph_from_json(require(doc, "information_graph", where), N, "information_graph");
    name = "default";
  }

  ProblemInstance inst = prepare_instance(std::move(m), std::move(dist), std::move(cons), std::move(cost), info, name);
  if (doc.contains("xi_second_moment")) {
    inst.xi_second_moment = dense_from_rows(doc["xi_second_moment"], "xi_second_moment");
    if (inst.xi_second_moment.rows() != nX || inst.xi_second_moment.cols() != nX) {
      throw DimensionMismatch("xi_second_moment must be " + std::to_string(nX) + "x" + std::to_string(nX));
    }
  }
  (void)nU;
  return inst;
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json data = Json::array();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return {{"shape", {m.rows(), m.cols()}}, {"data", data}};
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  const auto shape = require(j, "shape", "matrix").get<std::vector<int>>();
  const Json& data = require(j, "data", "matrix");
  if (shape.size() != 2 || static_cast<size_t>(shape[0]) * shape[1] != data.size()) {
    throw FormatError("matrix: shape and data length disagree");
  }
  Mat m(shape[0], shape[1]);
  size_t k = 0;
  for (int r = 0; r < shape[0]; ++r)
    for (int c = 0; c < shape[1]; ++c) m(r, c) = data[k++].get<double>();
  return m;
}

Json solution_to_json(const SdpSolution& s, const Json& problem, const std::string& graph,
                      std::optional<double> x_max, const SolverOptions& opts) {
  Json d;
  d["format"] = "agc-solution";
  d["version"] = 1;
  d["graph"] = graph;
  d["x_max"] = x_max ? Json(*x_max) : Json(nullptr);
  d["status"] = to_string(s.report.status);
  d["objective"] = s.optimal() ? Json(s.objective) : Json(nullptr);
  d["has_contract"] = s.has_contract;
  d["solver"] = {{"backend", s.report.backend},
                 {"raw_status", s.report.raw_status},
                 {"iterations", s.report.iterations},
                 {"solve_time_s", s.report.solve_time},
                 {"primal_residual", s.report.primal_residual},
                 {"dual_residual", s.report.dual_residual},
                 {"tol", opts.tol}};
  Json v;
  v[var::u_bar] = matrix_to_json(s.u_bar);
  v[var::x_bar] = matrix_to_json(s.x_bar);
  v[var::Qw] = matrix_to_json(s.Qw);
  v[var::Pw] = matrix_to_json(s.Pw);
  if (s.has_contract) {
    v[var::v_bar] = matrix_to_json(s.v_bar);
    v[var::Qxi] = matrix_to_json(s.Qxi);
    v[var::Pxi] = matrix_to_json(s.Pxi);
    v[var::Y] = matrix_to_json(s.Y);
    v[var::lambda] = s.lambda;
    v[var::beta] = s.beta;
  }
  d["variables"] = v;
  d["problem"] = problem;
  return d;
}

LoadedSolution solution_from_json(const Json& doc) {
  if (doc.value("format", std::string()) != "agc-solution") throw FormatError("not a solution file");
  LoadedSolution out;
  out.problem = require(doc, "problem", "solution");
  out.graph = doc.value("graph", std::string());
  if (doc.contains("x_max") && !doc["x_max"].is_null()) out.x_max = doc["x_max"].get<double>();
  out.instance = instance_from_json(out.problem, out.graph, out.x_max);
  SdpSolution& s = out.solution;
  s.report.status = status_from_string(require(doc, "status", "solution").get<std::string>());
  if (doc.contains("solver")) {
    const Json& sv = doc["solver"];
    s.report.backend = sv.value("backend", std::string());
    s.report.raw_status = sv.value("raw_status", std::string());
    s.report.iterations = sv.value("iterations", 0);
    s.report.solve_time = sv.value("solve_time_s", 0.0);
    s.report.primal_residual = sv.value("primal_residual", 0.0);
    s.report.dual_residual = sv.value("dual_residual", 0.0);
  }
  if (!doc["objective"].is_null()) s.objective = doc["objective"].get<double>();
  s.has_contract = doc.value("has_contract", false);
  const Json& v = require(doc, "variables", "solution");
  const int nX = out.instance.model.state_traj_dim();
  const int nU = out.instance.model.input_traj_dim();
  s.u_bar = matrix_from_json(require(v, var::u_bar, "variables"));
  s.x_bar = matrix_from_json(require(v, var::x_bar, "variables"));
  s.Qw = matrix_from_json(require(v, var::Qw, "variables"));
  s.Pw = matrix_from_json(require(v, var::Pw, "variables"));
  if (s.has_contract) {
    s.v_bar = matrix_from_json(require(v, var::v_bar, "variables"));
    s.Qxi = matrix_from_json(require(v, var::Qxi, "variables"));
    s.Pxi = matrix_from_json(require(v, var::Pxi, "variables"));
    s.Y = matrix_from_json(require(v, var::Y, "variables"));
    s.lambda = require(v, var::lambda, "variables").get<double>();
    s.beta = require(v, var::beta, "variables").get<double>();
  } else {
    s.v_bar = Vec::Zero(nX);
    s.Qxi = Mat::Zero(nU, nX);
    s.Pxi = Mat::Zero(nX, nX);
    s.Y = Mat::Zero(nX, nX);
  }
  if (s.Qw.rows() != nU || s.Qw.cols() != nX || s.u_bar.size() != nU || s.x_bar.size() != nX) {
    throw FormatError("solution variables do not match the embedded problem");
  }
  return out;
}

Json verification_to_json(const VerificationReport& r) {
  return {{"samples", r.samples},
          {"max_constraint_residual", r.max_constraint_residual},
          {"max_contract_membership", r.max_contract_membership},
          {"max_worst_case_margin", r.max_worst_case_margin},
          {"analytic_cost", r.analytic_cost},
          {"true_loop_cost_mean", r.true_cost.mean},
          {"true_loop_cost_stderr", r.true_cost.std_error}};
}

}  // namespace agc
