#pragma once

#include <optional>
#include <string>
#include <vector>

#include "agc/policy.hpp"
#include "agc/problem.hpp"
#include "agc/sdp.hpp"
#include "json.hpp"

namespace agc {

using Json = nlohmann::json;

Json read_json_file(const std::string& path);       // throws FormatError
void write_json_file(const std::string& path, const Json& doc);

/// Problem document for the built-in case study, carrying both information
/// graphs under `information_graphs` (names G_I1, G_I2).
Json case_study_document(double x_max = 2.5);

/// Names of the information graphs in a problem document: the keys of
/// `information_graphs`, or "default" for a lone `information_graph`.
std::vector<std::string> graph_names(const Json& doc);

/// Builds an instance from a problem document. `graph` selects a named
/// graph (empty: the only one). `x_max` replaces `state_inf_bound` and is
/// rejected for explicit (Fx, Fu, Fw, g) constraints. Throws FormatError.
ProblemInstance instance_from_json(const Json& doc, const std::string& graph = "",
                                   std::optional<double> x_max = std::nullopt);

Json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j);

/// Solution document: status, objective, solver diagnostics, every variable
/// block with its shape, and the problem it was computed from.
Json solution_to_json(const SdpSolution& s, const Json& problem, const std::string& graph,
                      std::optional<double> x_max, const SolverOptions& opts);

struct LoadedSolution {
  Json problem;
  std::string graph;
  std::optional<double> x_max;
  ProblemInstance instance;
  SdpSolution solution;
};

LoadedSolution solution_from_json(const Json& doc);

Json verification_to_json(const VerificationReport& r);

}  // namespace agc
