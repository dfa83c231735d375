#include "agc/sweep.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

#include "agc/error.hpp"

namespace agc {

void SweepSpec::validate() const {
  if (!(start < stop)) throw Error("sweep: start must be below stop");
  if (count < 2) throw Error("sweep: count must be at least 2");
  if (samples < 1) throw Error("sweep: samples must be positive");
  if (jobs < 1) throw Error("sweep: jobs must be positive");
  if (graphs.empty()) throw Error("sweep: no graphs selected");
}

std::vector<double> SweepSpec::grid() const {
  std::vector<double> g(static_cast<size_t>(count));
  for (int k = 0; k < count; ++k) g[k] = start + (stop - start) * k / (count - 1);
  g.back() = stop;
  return g;
}

std::uint64_t point_seed(std::uint64_t seed, std::size_t index) {
  // splitmix64 step
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

SweepRecord evaluate(const Json& problem, const SweepSpec& spec, const std::string& graph, double x,
                     std::uint64_t seed, const SweepObserver& observer, std::mutex& mu) {
  SweepRecord r;
  r.x_max = x;
  r.graph = graph;
  try {
    const ProblemInstance inst = instance_from_json(problem, graph, x);
    const SdpSolution s = synthesize(inst, spec.solver);
    r.status = to_string(s.report.status);
    r.solve_time = s.report.solve_time;
    std::optional<ContractPolicy> policy;
    if (s.optimal()) {
      r.objective = s.objective;
      policy = recover_policy(s, inst);
      const VerificationReport v = verify_policy(inst, *policy, spec.samples, seed);
      r.max_constraint_margin = v.max_constraint_residual;
      if (policy->has_contract) {
        r.max_contract_membership = v.max_contract_membership;
        r.schur_margin = contract_schur_margin(s, inst);
      }
      r.mc_cost_mean = v.true_cost.mean;
      r.mc_cost_stderr = v.true_cost.std_error;
      r.worst_case_margin = v.max_worst_case_margin;
    }
    if (observer) {
      std::lock_guard<std::mutex> lock(mu);
      observer(SweepPoint{r, inst, s, policy ? &*policy : nullptr});
    }
  } catch (const std::exception& e) {
    r.status = "error";
    r.objective.reset();
    r.message = e.what();
  }
  return r;
}

}  // namespace

std::vector<SweepRecord> run_sweep(const Json& problem, const SweepSpec& spec, const SweepObserver& observer) {
  spec.validate();
  const std::vector<double> grid = spec.grid();
  struct Task {
    std::string graph;
    double x;
  };
  std::vector<Task> tasks;
  for (const auto& g : spec.graphs)
    for (double x : grid) tasks.push_back({g, x});

  std::vector<SweepRecord> out(tasks.size());
  std::atomic<size_t> next{0};
  std::mutex mu;
  auto worker = [&] {
    for (size_t k; (k = next.fetch_add(1)) < tasks.size();) {
      out[k] = evaluate(problem, spec, tasks[k].graph, tasks[k].x, point_seed(spec.seed, k), observer, mu);
    }
  };
  const int width = std::min<int>(spec.jobs, static_cast<int>(tasks.size()));
  if (width <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < width; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return out;
}

std::vector<SweepRecord> run_case_study(const SweepSpec& spec, const SweepObserver& observer) {
  return run_sweep(case_study_document(spec.stop), spec, observer);
}

std::string sweep_csv(const std::vector<SweepRecord>& records, bool round) {
  const char* fmt = round ? "%.12g" : "%.17g";
  auto num = [&](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, fmt, v);
    return std::string(buf);
  };
  auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
  std::ostringstream os;
  os << kSweepCsvHeader << '\n';
  for (const auto& r : records) {
    os << num(r.x_max) << ',' << r.graph << ',' << r.status << ',' << opt(r.objective) << ',' << num(r.solve_time)
       << ',' << opt(r.max_constraint_margin) << ',' << opt(r.max_contract_membership) << ','
       << opt(r.mc_cost_mean) << ',' << opt(r.mc_cost_stderr) << '\n';
  }
  return os.str();
}

}  // namespace agc
