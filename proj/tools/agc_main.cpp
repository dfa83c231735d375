// agc: synthesis, verification and case-study driver.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>

#include "agc/error.hpp"
#include "agc/io.hpp"
#include "agc/plot.hpp"
#include "agc/sweep.hpp"

namespace fs = std::filesystem;
using namespace agc;

namespace {

enum Exit { kOk = 0, kInfeasible = 1, kUsage = 2, kSolverFailure = 3 };

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

Json load_problem(const std::string& path) { return path.empty() ? case_study_document() : read_json_file(path); }

int exit_for(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return kOk;
    case SolveStatus::Infeasible: return kInfeasible;
    default: return kSolverFailure;
  }
}

std::string point_file(const std::string& graph, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_xmax_%.4f.json", graph.c_str(), x);
  return buf;
}

struct Common {
  std::string problem;
  std::string graph;
  std::optional<double> xmax;
  std::optional<double> tol;

  SolverOptions solver() const {
    SolverOptions o = SolverOptions::from_env();
    if (tol) o.tol = *tol;
    return o;
  }
};

int run_analyze(const Common& c, bool patterns, const std::string& dot) {
  const Json doc = load_problem(c.problem);
  std::vector<std::string> names = c.graph.empty() ? graph_names(doc) : std::vector<std::string>{c.graph};
  for (const auto& name : names) {
    const ProblemInstance inst = instance_from_json(doc, name, c.xmax);
    std::cout << "graph " << name << "\n" << describe_decomposition(inst.decomposition);
    if (patterns) {
      std::cout << "Q^w pattern (N):\n" << inst.qn.render() << "Q^xi pattern (C):\n" << inst.qc.render()
                << "Y pattern:\n" << inst.y.render();
    }
    if (!dot.empty()) {
      const fs::path p = names.size() == 1 ? fs::path(dot) : fs::path(fs::path(dot).replace_extension("").string() + "_" + name + ".dot");
      write_text(p, to_dot(inst.decomposition));
      std::cout << "wrote " << p.string() << "\n";
    }
    std::cout << "\n";
  }
  return kOk;
}

int run_synthesize(const Common& c, const std::string& out) {
  const Json doc = load_problem(c.problem);
  const ProblemInstance inst = instance_from_json(doc, c.graph, c.xmax);
  const SolverOptions opts = c.solver();
  const SdpSolution s = synthesize(inst, opts);
  std::cout << "graph " << inst.graph_name << ": " << to_string(s.report.status) << " (" << s.report.raw_status
            << ", " << s.report.iterations << " iterations, " << s.report.solve_time << " s)\n";
  if (s.optimal()) {
    std::printf("objective %.10g\n", s.objective);
    if (s.has_contract) std::printf("lambda %.10g  beta %.10g\n", s.lambda, s.beta);
  }
  write_json_file(out, solution_to_json(s, doc, inst.graph_name, c.xmax, opts));
  std::cout << "wrote " << out << "\n";
  return exit_for(s.report.status);
}

int run_simulate(const std::string& solution, int samples, std::uint64_t seed, const std::string& out,
                 const std::string& csv, const std::string& svg, const std::vector<int>& coords) {
  const LoadedSolution ls = solution_from_json(read_json_file(solution));
  if (!ls.solution.optimal()) {
    std::cerr << "solution status is " << to_string(ls.solution.report.status) << "; nothing to simulate\n";
    return exit_for(ls.solution.report.status);
  }
  const ContractPolicy policy = recover_policy(ls.solution, ls.instance);
  check_policy_causality(policy, ls.instance.model);
  const VerificationReport v = verify_policy(ls.instance, policy, samples, seed);
  const Json report = verification_to_json(v);
  std::cout << report.dump(1) << "\n";
  if (!out.empty()) write_json_file(out, report);
  if (!csv.empty()) {
    // Replays the verification draws one by one.
    std::ofstream f(csv);
    if (!f) throw Error("cannot write '" + csv + "'");
    f << "sample,constraint_residual,contract_membership,cost\n";
    const CostSpec& cost = ls.instance.cost;
    std::mt19937_64 rng(seed);
    char buf[96];
    for (int k = 0; k < samples; ++k) {
      const SimulationResult r = simulate(ls.instance, policy, sample_mixed(ls.instance.sigma_sqrt, rng));
      const double j = r.x.dot(cost.Rx * r.x) + r.u.dot(cost.Ru * r.u);
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", k, r.constraint_residual,
                    policy.has_contract ? r.contract_margin + 1.0 : 0.0, j);
      f << buf;
    }
  }
  if (!svg.empty()) {
    const auto& m = ls.instance.model;
    const std::pair<int, int> xy = coords.size() == 2 ? std::pair{coords[0], coords[1]}
                                                      : std::pair{m.state_index(9, m.num_subsystems() - 1, 0),
                                                                  m.state_index(10, m.num_subsystems() - 1, 0)};
    write_text(svg, plot_projected_sets(ls.instance, policy, xy, samples, seed));
  }
  const bool ok = v.max_constraint_residual <= 1e-6 && v.max_contract_membership <= 1.0 + 1e-6;
  return ok ? kOk : kSolverFailure;
}

int run_study(const Json& doc, SweepSpec spec, const std::string& out_dir, bool round, bool solutions,
              bool figures) {
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  if (solutions) fs::create_directories(dir / "solutions");
  std::map<std::string, std::pair<double, std::string>> figure;  // graph -> (x, svg)
  const auto records = run_sweep(doc, spec, [&](const SweepPoint& p) {
    if (solutions) {
      write_json_file(dir / "solutions" / point_file(p.record.graph, p.record.x_max),
                      solution_to_json(p.solution, doc, p.record.graph, p.record.x_max, spec.solver));
    }
    std::fprintf(stderr, "%-6s x_max=%-8.4f %s\n", p.record.graph.c_str(), p.record.x_max, p.record.status.c_str());
    if (figures && p.policy && (!figure.count(p.record.graph) || figure[p.record.graph].first < p.record.x_max)) {
      const auto& m = p.instance.model;
      const std::pair<int, int> xy{m.state_index(9, m.num_subsystems() - 1, 0),
                                   m.state_index(std::min(10, m.horizon), m.num_subsystems() - 1, 0)};
      figure[p.record.graph] = {p.record.x_max, plot_projected_sets(p.instance, *p.policy, xy, spec.samples, spec.seed)};
    }
  });
  write_text(dir / "sweep.csv", sweep_csv(records, round));
  write_text(dir / "cost_curves.svg", plot_cost_curves(records));
  for (const auto& [g, f] : figure) write_text(dir / ("projected_sets_" + g + ".svg"), f.second);
  int failed = 0;
  for (const auto& r : records) {
    if (r.status == "error") {
      std::cerr << "point " << r.graph << " x_max=" << r.x_max << " failed: " << r.message << "\n";
      ++failed;
    }
  }
  std::cout << "wrote " << (dir / "sweep.csv").string() << " (" << records.size() << " points, " << failed
            << " errors)\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust decentralized controller synthesis with assume-guarantee contracts"};
  app.require_subcommand(1);
  Common c;
  auto add_common = [&](CLI::App* sub, bool with_graph) {
    sub->add_option("--problem", c.problem, "Problem JSON (default: built-in case study)")->check(CLI::ExistingFile);
    if (with_graph) sub->add_option("--graph", c.graph, "Information graph name");
    sub->add_option("--xmax", c.xmax, "Override the state bound")->check(CLI::PositiveNumber);
  };

  auto* analyze = app.add_subcommand("analyze", "Information decomposition of a problem");
  add_common(analyze, true);
  bool patterns = false;
  std::string dot;
  analyze->add_flag("--patterns", patterns, "Print the sparsity masks");
  analyze->add_option("--dot", dot, "Write a Graphviz file");

  auto* synth = app.add_subcommand("synthesize", "Solve the contract SDP");
  add_common(synth, true);
  std::string out = "solution.json";
  synth->add_option("--out", out, "Solution file");
  synth->add_option("--solver-tol", c.tol, "Solver tolerance")->check(CLI::PositiveNumber);

  auto* sim = app.add_subcommand("simulate", "Verify a solution by closed-loop simulation");
  std::string solution, report_out, csv, svg;
  int samples = 10000;
  std::uint64_t seed = 1;
  std::vector<int> coords;
  sim->add_option("--solution", solution, "Solution JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--samples", samples, "Monte-Carlo runs")->check(CLI::PositiveNumber);
  sim->add_option("--seed", seed, "Random seed");
  sim->add_option("--out", report_out, "Verification report JSON");
  sim->add_option("--csv", csv, "Per-sample residuals and cost");
  sim->add_option("--svg", svg, "Projected-sets figure");
  sim->add_option("--coords", coords, "Two trajectory indices for --svg")->expected(2);

  SweepSpec spec;
  std::string out_dir = "results";
  bool round = false, no_solutions = false;
  auto* sweep = app.add_subcommand("sweep", "Sweep the state bound");
  sweep->add_option("--problem", c.problem, "Problem JSON (default: built-in case study)")->check(CLI::ExistingFile);
  sweep->add_option("--start", spec.start, "First x_max");
  sweep->add_option("--stop", spec.stop, "Last x_max");
  sweep->add_option("--count", spec.count, "Grid points")->check(CLI::Range(2, 100000));
  sweep->add_option("--graph", spec.graphs, "Graphs to run (default: all)");
  auto* cs = app.add_subcommand("casestudy", "Full case-study sweep with figures");
  for (auto* sub : {sweep, cs}) {
    sub->add_option("--samples", spec.samples, "Verification runs per point")->check(CLI::PositiveNumber);
    sub->add_option("--seed", spec.seed, "Random seed");
    sub->add_option("--jobs", spec.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out-dir", out_dir, "Output directory");
    sub->add_option("--solver-tol", c.tol, "Solver tolerance")->check(CLI::PositiveNumber);
    sub->add_flag("--round", round, "12 significant digits in the CSV");
  }
  sweep->add_flag("--no-solutions", no_solutions, "Skip per-point solution files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*analyze) return run_analyze(c, patterns, dot);
    if (*synth) return run_synthesize(c, out);
    if (*sim) return run_simulate(solution, samples, seed, report_out, csv, svg, coords);
    spec.solver = c.solver();
    if (*sweep) {
      const Json doc = load_problem(c.problem);
      if (sweep->count("--graph") == 0) spec.graphs = graph_names(doc);
      return run_study(doc, spec, out_dir, round, !no_solutions, false);
    }
    if (*cs) return run_study(case_study_document(spec.stop), spec, out_dir, round, true, true);
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const CoordOutOfRange& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverFailure;
  }
  return kUsage;
}
