#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "agc/error.hpp"
#include "agc/io.hpp"
#include "agc/plot.hpp"
#include "agc/policy.hpp"
#include "agc/sdp.hpp"
#include "agc/sweep.hpp"
#include "support.hpp"

using namespace agc;
using namespace agc::test;
namespace fs = std::filesystem;

namespace {

struct Solved {
  ProblemInstance instance;
  SdpSolution solution;
};

const Solved& solved(int which) {
  static const Solved g1{case_study_instance(2.5, 1), synthesize(case_study_instance(2.5, 1))};
  static const Solved g2{case_study_instance(2.5, 2), synthesize(case_study_instance(2.5, 2))};
  return which == 1 ? g1 : g2;
}

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / ("agc_it_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(AGC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> csv_without_time(const std::string& csv) {
  std::vector<std::string> lines;
  std::stringstream ss(csv);
  for (std::string line; std::getline(ss, line);) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() > 4) f[4].clear();
    std::string joined;
    for (const auto& c : f) joined += c + ",";
    lines.push_back(joined);
  }
  return lines;
}

}  // namespace

TEST(CaseStudy, BothGraphsSolveAtLooseBound) {
  for (int which : {1, 2}) {
    const SdpSolution& s = solved(which).solution;
    ASSERT_TRUE(s.optimal()) << which << " " << s.report.raw_status;
    EXPECT_LE(s.report.primal_residual, 1e-7);
    EXPECT_LE(s.report.dual_residual, 1e-7);
  }
  EXPECT_LE(solved(1).solution.objective, solved(2).solution.objective * (1 + 1e-6));
  EXPECT_FALSE(solved(1).solution.has_contract);
  EXPECT_TRUE(solved(2).solution.has_contract);
  EXPECT_GE(contract_schur_margin(solved(2).solution, solved(2).instance), -1e-7);
}

TEST(CaseStudy, TightBoundIsInfeasible) {
  EXPECT_EQ(synthesize(case_study_instance(0.1, 1)).report.status, SolveStatus::Infeasible);
  EXPECT_EQ(synthesize(case_study_instance(0.1, 2)).report.status, SolveStatus::Infeasible);
}

TEST(CaseStudy, VerifiedByTrueLoopSimulation) {
  const Solved& g2 = solved(2);
  const ContractPolicy p = recover_policy(g2.solution, g2.instance);
  const VerificationReport r = verify_policy(g2.instance, p, 2000, 5);
  EXPECT_LE(r.max_constraint_residual, 1e-6);
  EXPECT_LE(r.max_contract_membership, 1 + 1e-6);
  EXPECT_NEAR(r.analytic_cost, g2.solution.objective, 1e-6 * g2.solution.objective);
  std::mt19937_64 rng(9);
  EXPECT_TRUE(strict_causality_check(p, g2.instance, rng, 20));
}

TEST(FixedContract, AtTheOptimumRecoversTheJointValue) {
  const Solved& g2 = solved(2);
  const SdpSolution& s = g2.solution;
  const SdpSolution f = synthesize_fixed(g2.instance, FixedContract{s.lambda, s.Y, s.v_bar});
  ASSERT_TRUE(f.optimal()) << f.report.raw_status;
  EXPECT_NEAR(f.objective, s.objective, 1e-6 * s.objective);
  EXPECT_EQ(f.lambda, s.lambda);
}

TEST(FixedContract, TrivialContractIsNoBetter) {
  const Solved& g2 = solved(2);
  const int nX = g2.instance.model.state_traj_dim();
  const SdpSolution f = synthesize_fixed(g2.instance, FixedContract{1.0, Mat::Zero(nX, nX), Vec::Zero(nX)});
  ASSERT_TRUE(f.optimal() || f.report.status == SolveStatus::Infeasible) << f.report.raw_status;
  if (f.optimal()) {
    EXPECT_GE(f.objective, g2.solution.objective * (1 - 1e-6));
  }
}

TEST(FixedContract, FarCenterIsInfeasible) {
  const Solved& g2 = solved(2);
  const int nX = g2.instance.model.state_traj_dim();
  Vec v = Vec::Zero(nX);
  for (int k : g2.instance.projector.full.index) v[k] = 100.0;
  EXPECT_EQ(synthesize_fixed(g2.instance, FixedContract{1.0, Mat::Zero(nX, nX), v}).report.status,
            SolveStatus::Infeasible);
}

TEST(Scaling, CostScaleLeavesPolicyUnchanged) {
  const Solved& g2 = solved(2);
  ProblemInstance scaled = g2.instance;
  scaled.cost.Rx *= 3.0;
  scaled.cost.Ru *= 3.0;
  const SdpSolution s3 = synthesize(scaled);
  ASSERT_TRUE(s3.optimal());
  const SdpSolution& s = g2.solution;
  EXPECT_NEAR(s3.objective, 3.0 * s.objective, 1e-6 * s3.objective);
  EXPECT_LE((s3.u_bar - s.u_bar).cwiseAbs().maxCoeff(), 1e-5);
  EXPECT_LE((s3.Qw - s.Qw).cwiseAbs().maxCoeff(), 1e-5);
  EXPECT_LE((s3.Qxi - s.Qxi).cwiseAbs().maxCoeff(), 1e-5);
  EXPECT_LE((s3.x_bar - s.x_bar).cwiseAbs().maxCoeff(), 1e-5);
  EXPECT_LE((s3.Pw - s.Pw).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Json, CaseStudyFileMatchesBuiltIn) {
  EXPECT_EQ(read_json_file(AGC_DATA_DIR "/case_study.json"), case_study_document());
  EXPECT_EQ(graph_names(case_study_document()), (std::vector<std::string>{"G_I1", "G_I2"}));
}

TEST(Json, InstanceFromDocumentMatchesBuiltIn) {
  const ProblemInstance a = instance_from_json(case_study_document(), "G_I2", 1.7);
  const ProblemInstance b = case_study_instance(1.7, 2);
  EXPECT_EQ(a.constraints.g, b.constraints.g);
  EXPECT_EQ(a.constraints.Fx, b.constraints.Fx);
  EXPECT_EQ(a.cost.Rx, b.cost.Rx);
  EXPECT_EQ(a.cost.Ru, b.cost.Ru);
  EXPECT_EQ(a.surrogate.Btil, b.surrogate.Btil);
  EXPECT_EQ(a.disturbance.sigma, b.disturbance.sigma);
  EXPECT_EQ(a.decomposition.coupling, b.decomposition.coupling);
}

TEST(Json, MatrixRoundTrip) {
  std::mt19937_64 rng(70);
  const Mat m = random_matrix(3, 5, rng);
  EXPECT_EQ(matrix_from_json(matrix_to_json(m)), m);
  EXPECT_EQ(matrix_from_json(matrix_to_json(Mat(0, 4))).cols(), 4);
  EXPECT_THROW(matrix_from_json(Json{{"shape", {2, 2}}, {"data", {1, 2, 3}}}), FormatError);
}

TEST(Json, SolutionRoundTrip) {
  const Solved& g2 = solved(2);
  const SolverOptions opts;
  const Json doc = solution_to_json(g2.solution, case_study_document(), "G_I2", 2.5, opts);
  const fs::path f = scratch_dir() / "solution.json";
  write_json_file(f.string(), doc);
  const LoadedSolution back = solution_from_json(read_json_file(f.string()));
  EXPECT_EQ(back.graph, "G_I2");
  EXPECT_EQ(back.x_max, 2.5);
  EXPECT_EQ(back.solution.objective, g2.solution.objective);
  EXPECT_EQ(back.solution.Qw, g2.solution.Qw);
  EXPECT_EQ(back.solution.Y, g2.solution.Y);
  EXPECT_EQ(back.solution.lambda, g2.solution.lambda);
  EXPECT_EQ(back.solution.report.status, SolveStatus::Optimal);
  EXPECT_EQ(back.instance.constraints.g, g2.instance.constraints.g);
  EXPECT_EQ(doc["variables"]["Qw"]["shape"], Json({45, 48}));
}

TEST(Json, MalformedDocumentsAreRejected) {
  Json d = case_study_document();
  d.erase("horizon");
  EXPECT_THROW(instance_from_json(d, "G_I2"), FormatError);
  d = case_study_document();
  d["distribution"] = "gaussian";
  EXPECT_THROW(instance_from_json(d, "G_I2"), FormatError);
  d = case_study_document();
  EXPECT_THROW(instance_from_json(d, "G_I9"), FormatError);
  EXPECT_THROW(instance_from_json(d), FormatError);  // two graphs, none chosen
  d["information_graphs"]["G_I2"] = {{1, 4}};
  EXPECT_THROW(instance_from_json(d, "G_I2"), FormatError);
  d = case_study_document();
  d["A"] = {{1, 2}, {3, 4}};
  EXPECT_THROW(instance_from_json(d, "G_I2"), Error);
  d = case_study_document();
  const int nX = 48, nU = 45;
  auto rows = [](const Mat& m) {
    Json out = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
    return out;
  };
  d["constraints"] = {{"Fx", rows(Mat::Identity(nX, nX))}, {"Fu", rows(Mat::Zero(nX, nU))},
                      {"g", std::vector<double>(nX, 2.0)}};
  EXPECT_NO_THROW(instance_from_json(d, "G_I2"));
  EXPECT_THROW(instance_from_json(d, "G_I2", 1.5), FormatError);
  EXPECT_THROW(read_json_file("/nonexistent/problem.json"), FormatError);
}

TEST(Sweep, CsvHeaderAndEmptyFields) {
  SweepRecord ok{1.5, "G_I2", "optimal", 2.25, 0.5, -0.1, 0.8, 2.2, 0.01, -0.2, 1e-4, ""};
  SweepRecord bad{1.0, "G_I2", "infeasible", std::nullopt, 0.25, std::nullopt, std::nullopt, std::nullopt,
                  std::nullopt, std::nullopt, std::nullopt, ""};
  const std::string csv = sweep_csv({ok, bad});
  std::stringstream ss(csv);
  std::string header, l1, l2;
  std::getline(ss, header);
  std::getline(ss, l1);
  std::getline(ss, l2);
  EXPECT_EQ(header, kSweepCsvHeader);
  EXPECT_EQ(l1, "1.5,G_I2,optimal,2.25,0.5,-0.10000000000000001,0.80000000000000004,2.2000000000000002,0.01");
  EXPECT_EQ(l2, "1,G_I2,infeasible,,0.25,,,,");
  EXPECT_NE(sweep_csv({ok}, true).find(",-0.1,0.8,2.2,0.01"), std::string::npos);
}

TEST(Sweep, GridAndValidation) {
  SweepSpec s;
  const auto g = s.grid();
  ASSERT_EQ(g.size(), 31u);
  EXPECT_EQ(g.front(), 1.0);
  EXPECT_EQ(g.back(), 2.5);
  EXPECT_NEAR(g[1], 1.05, 1e-15);
  s.count = 1;
  EXPECT_THROW(s.validate(), Error);
  s = SweepSpec{};
  s.stop = 0.5;
  EXPECT_THROW(s.validate(), Error);
  EXPECT_NE(point_seed(1, 0), point_seed(1, 1));
  EXPECT_EQ(point_seed(1, 3), point_seed(1, 3));
}

TEST(Sweep, DeterministicAcrossRunsAndWorkers) {
  SweepSpec s;
  s.start = 0.9;
  s.stop = 2.5;
  s.count = 3;
  s.samples = 200;
  int observed = 0;
  const auto a = run_case_study(s, [&](const SweepPoint&) { ++observed; });
  s.jobs = 2;
  const auto b = run_case_study(s);
  EXPECT_EQ(observed, 6);
  ASSERT_EQ(a.size(), 6u);
  EXPECT_EQ(a[0].graph, "G_I1");
  EXPECT_EQ(a[0].status, "infeasible");
  EXPECT_FALSE(a[0].objective);
  EXPECT_EQ(a[2].status, "optimal");
  EXPECT_EQ(csv_without_time(sweep_csv(a)), csv_without_time(sweep_csv(b)));
}

TEST(Svg, ZeroDynamicsReachableSetIsSigmaBlock) {
  SystemModel m;
  m.nx = {1, 1};
  m.nu = {1, 1};
  m.horizon = 2;
  m.A.assign(2, Mat::Zero(2, 2));
  m.B.assign(2, Mat::Zero(2, 2));
  std::mt19937_64 rng(71);
  const Mat G = random_matrix(6, 6, rng);
  const Mat S = G * G.transpose() + Mat::Identity(6, 6);
  const ProblemInstance inst =
      prepare_instance(m, EllipsoidalUncertainty::uniform(S), ConstraintSet::box(m, 10, 1),
                       CostSpec::per_period(m, Vec::Ones(2), Vec::Ones(2)), DirectedGraph(2, {{0, 0}, {1, 1}}));
  ContractPolicy p;
  p.u_bar = Vec::Zero(4);
  p.v_bar = Vec::Zero(6);
  p.Qw = Mat::Zero(4, 6);
  p.Qv = Mat::Zero(4, 6);
  p.Qxi = Mat::Zero(4, 6);
  p.Y = Mat::Zero(6, 6);
  const ProjectedSets ps = projected_sets(inst, p, {2, 5}, 500, 3);
  Eigen::Matrix2d expect;
  expect << S(2, 2), S(2, 5), S(5, 2), S(5, 5);
  EXPECT_LE((ps.reachable.shape - expect).norm(), 1e-12);
  EXPECT_EQ(ps.alpha, 1.0);
  EXPECT_FALSE(ps.contract);
  EXPECT_EQ(ps.box_x.hi, 10.0);
  EXPECT_EQ(ps.box_x.lo, -10.0);
  const EllipsoidGauge gauge(Ellipsoid{ps.reachable.center, ps.reachable.shape});
  for (const auto& q : ps.samples) EXPECT_LE(gauge(Vec(q)), 1 + 1e-9);
  const std::string svg = render_projected_sets(ps, inst.model);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_THROW(projected_sets(inst, p, {0, 6}), CoordOutOfRange);
  EXPECT_THROW(projected_sets(inst, p, {-1, 2}), CoordOutOfRange);
  EXPECT_NO_THROW(projected_sets(inst, p, {3, 3}, 50));
}

TEST(Svg, ContractEnclosesSampledCouplingStates) {
  const Solved& g2 = solved(2);
  const ContractPolicy p = recover_policy(g2.solution, g2.instance);
  const SystemModel& m = g2.instance.model;
  const ProjectedSets ps = projected_sets(g2.instance, p, {m.state_index(9, 2, 0), m.state_index(10, 2, 0)}, 2000);
  ASSERT_TRUE(ps.contract);
  const EllipsoidGauge gauge(*ps.contract);
  for (const auto& q : ps.hull) EXPECT_LE(gauge(Vec(q)), 1 + 1e-6);
  const EllipsoidGauge outer(ps.reachable);
  for (const auto& q : ps.hull) EXPECT_LE(outer(Vec(q)), 1 + 1e-6);
  EXPECT_EQ(state_label(m, m.state_index(9, 2, 0)), "x3(9)");
  EXPECT_NE(render_projected_sets(ps, m).find("x3(10)"), std::string::npos);
}

TEST(Svg, HullOfSquareWithInteriorPoints) {
  const std::vector<Eigen::Vector2d> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}, {0.5, 0}, {0.2, 0.7}};
  const auto h = convex_hull(pts);
  ASSERT_EQ(h.size(), 4u);
  double area = 0;
  for (size_t i = 0; i < h.size(); ++i) {
    const auto& a = h[i];
    const auto& b = h[(i + 1) % h.size()];
    area += a.x() * b.y() - b.x() * a.y();
  }
  EXPECT_NEAR(area / 2, 1.0, 1e-15);
}

TEST(Svg, CostCurvesBreakAtInfeasiblePoints) {
  std::vector<SweepRecord> r;
  for (double x : {1.0, 1.5, 2.0}) {
    SweepRecord a;
    a.x_max = x;
    a.graph = "G_I2";
    a.status = x < 1.2 ? "infeasible" : "optimal";
    if (x > 1.2) a.objective = 3.0 - x;
    r.push_back(a);
  }
  const std::string svg = plot_cost_curves(r);
  EXPECT_NE(svg.find("G_I2"), std::string::npos);
  EXPECT_NE(svg.find("<path"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  const fs::path d = scratch_dir();
  EXPECT_EQ(run_cli("analyze"), 0);
  EXPECT_EQ(run_cli("analyze --dot " + (d / "g.dot").string()), 0);
  EXPECT_TRUE(fs::exists(d / "g_G_I1.dot"));
  EXPECT_TRUE(fs::exists(d / "g_G_I2.dot"));
  EXPECT_EQ(run_cli("--bogus"), 2);
  EXPECT_EQ(run_cli("synthesize --problem /nonexistent.json --out " + (d / "x.json").string()), 2);
  EXPECT_EQ(run_cli("synthesize --graph G_I9 --out " + (d / "x.json").string()), 2);
  EXPECT_EQ(run_cli("synthesize --graph G_I1 --xmax 0.1 --out " + (d / "inf.json").string()), 1);
  const std::string sol = (d / "s.json").string();
  ASSERT_EQ(run_cli("synthesize --graph G_I1 --xmax 2.0 --out " + sol), 0);
  EXPECT_EQ(run_cli("simulate --solution " + sol + " --samples 100 --out " + (d / "r.json").string()), 0);
  const Json report = read_json_file((d / "r.json").string());
  EXPECT_EQ(report["samples"], 100);
  EXPECT_LE(report["max_constraint_residual"].get<double>(), 1e-6);
  EXPECT_EQ(run_cli("simulate --solution " + sol + " --samples 10 --svg " + (d / "p.svg").string() +
                    " --coords 0 4000"),
            2);
  EXPECT_EQ(run_cli("simulate --solution " + sol + " --samples 50 --svg " + (d / "p.svg").string()), 0);
  EXPECT_NE(slurp(d / "p.svg").find("</svg>"), std::string::npos);
  EXPECT_EQ(run_cli("sweep --graph G_I1 --start 2.0 --stop 2.5 --count 2 --samples 20 --out-dir " +
                    (d / "sw").string()),
            0);
  EXPECT_EQ(slurp(d / "sw" / "sweep.csv").substr(0, std::string(kSweepCsvHeader).size()), kSweepCsvHeader);
  EXPECT_TRUE(fs::exists(d / "sw" / "cost_curves.svg"));
  fs::remove_all(d);
}
