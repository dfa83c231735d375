#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "agc/io.hpp"

namespace agc {

/// Grid over the state bound x_max, run for each named information graph.
struct SweepSpec {
  std::string parameter = "x_max";
  double start = 1.0;
  double stop = 2.5;
  int count = 31;
  std::vector<std::string> graphs{"G_I1", "G_I2"};
  int samples = 10000;
  std::uint64_t seed = 1;
  int jobs = 1;
  SolverOptions solver = SolverOptions::from_env();

  /// Throws Error unless start < stop, count >= 2, samples >= 1, jobs >= 1.
  void validate() const;
  std::vector<double> grid() const;
};

struct SweepRecord {
  double x_max = 0.0;
  std::string graph;
  std::string status;  // solver status, or "error"
  std::optional<double> objective;
  double solve_time = 0.0;
  /// Largest simulated (Fx x + Fu u + Fw w - g)_i over the verification runs.
  std::optional<double> max_constraint_margin;
  std::optional<double> max_contract_membership;
  std::optional<double> mc_cost_mean;
  std::optional<double> mc_cost_stderr;
  /// Analytic worst-case margin and the Schur-step eigenvalue.
  std::optional<double> worst_case_margin;
  std::optional<double> schur_margin;
  std::string message;
};

/// Everything computed at one grid point, handed to the sweep observer.
struct SweepPoint {
  const SweepRecord& record;
  const ProblemInstance& instance;
  const SdpSolution& solution;
  const ContractPolicy* policy;  // null unless solved
};

using SweepObserver = std::function<void(const SweepPoint&)>;

/// Seed used for the verification of point `index` (graph-major order).
std::uint64_t point_seed(std::uint64_t seed, std::size_t index);

/// Solves, recovers and verifies every (graph, x_max) of the grid on the
/// problem document. Failures are recorded, never thrown. Records are in
/// graph-major order. The observer runs serialised, in completion order.
std::vector<SweepRecord> run_sweep(const Json& problem, const SweepSpec& spec,
                                   const SweepObserver& observer = {});

/// run_sweep on the built-in case study.
std::vector<SweepRecord> run_case_study(const SweepSpec& spec, const SweepObserver& observer = {});

inline constexpr const char* kSweepCsvHeader =
    "x_max,graph,status,objective,solve_time_s,max_constraint_margin,max_contract_membership,"
    "mc_cost_mean,mc_cost_stderr";

/// Full double precision, or 12 significant digits with `round`.
std::string sweep_csv(const std::vector<SweepRecord>& records, bool round = false);

}  // namespace agc
