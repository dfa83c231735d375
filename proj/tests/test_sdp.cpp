#include <gtest/gtest.h>

#include "agc/error.hpp"
#include "agc/policy.hpp"
#include "agc/problem.hpp"
#include "agc/sdp.hpp"
#include "support.hpp"

using namespace agc;
using namespace agc::test;

namespace {

Vec boundary_point(const Mat& sigma_sqrt, std::mt19937_64& rng) {
  Vec z = random_vector(static_cast<int>(sigma_sqrt.rows()), rng);
  return sigma_sqrt * (z / z.norm());
}

Mat random_spd(int n, std::mt19937_64& rng) {
  const Mat G = random_matrix(n, n, rng);
  return G * G.transpose() + 0.5 * Mat::Identity(n, n);
}

PolicyExpressions constant_policy(const Mat& Pw, const Mat& Qw, const Vec& xb, const Vec& ub, const Mat& Pxi,
                                  const Mat& Qxi) {
  PolicyExpressions e;
  e.Pw = AffineMatrix::constant(Pw);
  e.Qw = AffineMatrix::constant(Qw);
  e.x_bar = AffineMatrix::constant(xb);
  e.u_bar = AffineMatrix::constant(ub);
  if (Pxi.size()) {
    e.Pxi = AffineMatrix::constant(Pxi);
    e.Qxi = AffineMatrix::constant(Qxi);
  }
  return e;
}

}  // namespace

TEST(SupportFunction, EllipsoidMaximizer) {
  std::mt19937_64 rng(40);
  const Mat S = random_spd(6, rng);
  const Mat R = symmetric_sqrt(S);
  const Eigen::LLT<Mat> llt(S);
  for (int k = 0; k < 100; ++k) {
    const Vec c = random_vector(6, rng);
    const double support = (R * c).norm();
    const Vec w = S * c / support;
    EXPECT_NEAR(w.dot(llt.solve(w)), 1.0, 1e-12);
    EXPECT_NEAR(c.dot(w), support, 1e-12 * support);
    double best = -INFINITY;
    for (int s = 0; s < 2000; ++s) best = std::max(best, c.dot(boundary_point(R, rng)));
    EXPECT_LE(best, support + 1e-12);
  }
}

TEST(RobustRows, ZeroPolicyUsesOnlyLtilde) {
  const ProblemInstance inst = short_case_study(2, 3, 2.0);
  const int nX = inst.model.state_traj_dim(), nU = inst.model.input_traj_dim();
  const auto rows = assemble_soc_rows(
      constant_policy(inst.surrogate.Ltil, Mat::Zero(nU, nX), Vec::Zero(nX), Vec::Zero(nU), Mat(), Mat()),
      inst.constraints, inst.sigma_sqrt);
  const Vec margins = robust_row_margins(rows, Vec());
  ASSERT_EQ(margins.size(), inst.constraints.rows());
  for (int i = 0; i < inst.constraints.rows(); ++i) {
    const Vec c = inst.constraints.Fx.row(i) * inst.surrogate.Ltil;
    EXPECT_NEAR(margins[i], (inst.sigma_sqrt * c).norm() - inst.constraints.g[i], 1e-12);
  }
}

TEST(RobustRows, MatchBoundarySamplingOnScalarInstance) {
  // N = 1, T = 1, |x| <= 2 and |u| <= 2 with a random affine policy and a
  // random xi response; sup over W x Xi is attained on the boundary.
  std::mt19937_64 rng(41);
  SystemModel m;
  m.nx = {1};
  m.nu = {1};
  m.horizon = 1;
  m.A = {Mat::Constant(1, 1, 0.8)};
  m.B = {Mat::Constant(1, 1, 1.0)};
  const ConstraintSet cons = ConstraintSet::box(m, 2.0, 2.0);
  const Mat S = random_spd(2, rng);
  const Mat R = symmetric_sqrt(S);
  const TrajectoryOperators op = build_trajectory_operators(m);
  for (int trial = 0; trial < 10; ++trial) {
    Mat Qw = Mat::Zero(1, 2);
    Qw(0, 0) = random_vector(1, rng)[0];
    const Mat Pw = op.B * Qw + op.L;
    const Mat Qxi = 0.3 * random_matrix(1, 2, rng);
    const Mat Pxi = op.B * Qxi;
    const Vec ub = 0.2 * random_vector(1, rng);
    const Vec xb = op.B * ub;
    const Vec margins = robust_row_margins(assemble_soc_rows(constant_policy(Pw, Qw, xb, ub, Pxi, Qxi), cons, R), Vec());
    for (int i = 0; i < cons.rows(); ++i) {
      double best = -INFINITY;
      for (int s = 0; s < 100000; ++s) {
        const Vec w = boundary_point(R, rng), xi = boundary_point(R, rng);
        const Vec x = xb + Pw * w + Pxi * xi;
        const Vec u = ub + Qw * w + Qxi * xi;
        best = std::max(best, (cons.Fx.row(i) * x + cons.Fu.row(i) * u + cons.Fw.row(i) * w)(0) - cons.g[i]);
      }
      EXPECT_LE(best, margins[i] + 1e-9);
      EXPECT_GE(best, margins[i] - 1e-3);
    }
  }
}

TEST(Containment, ScalarArithmetic) {
  const Mat one = Mat::Ones(1, 1);
  EXPECT_TRUE(ellipsoid_containment_holds(one, one, 2.0 * one, one, 0.5));
  EXPECT_NEAR(containment_min_eigenvalue(one, one, 2.0 * one, one, 0.5), 0.0, 1e-15);
  EXPECT_FALSE(ellipsoid_containment_holds(one, one, 1.9 * one, one, 0.5));
}

TEST(Containment, DegenerateSummand) {
  const Mat one = Mat::Ones(1, 1);
  EXPECT_TRUE(ellipsoid_containment_holds(one, Mat::Zero(1, 1), one, one, 1.0));
  EXPECT_TRUE(ellipsoid_containment_holds(Mat::Zero(1, 1), one, one, one, 0.0));
  EXPECT_THROW(ellipsoid_containment_holds(one, one, one, one, 1.0), AlphaOutOfRange);
  EXPECT_THROW(ellipsoid_containment_holds(one, one, one, one, 0.0), AlphaOutOfRange);
  EXPECT_THROW(ellipsoid_containment_holds(one, one, one, one, 1.5), AlphaOutOfRange);
  EXPECT_THROW(ellipsoid_containment_holds(one, one, one, one, -0.1), AlphaOutOfRange);
}

TEST(Containment, SampledSumLiesInOuterSet) {
  std::mt19937_64 rng(42);
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Mat S = random_spd(2, rng);
    const Mat R = symmetric_sqrt(S);
    const Mat L1 = random_matrix(2, 2, rng), L2 = random_matrix(2, 2, rng);
    const double alpha = 0.3;
    // L3 S L3' = target + margin, target = L1 S L1'/a + L2 S L2'/(1-a)
    const Mat target = L1 * S * L1.transpose() / alpha + L2 * S * L2.transpose() / (1 - alpha);
    const Mat L3 = symmetric_sqrt(target + 1e-3 * Mat::Identity(2, 2)) * Eigen::LLT<Mat>(S).matrixL().solve(Mat::Identity(2, 2));
    ASSERT_LE((L3 * S * L3.transpose() - target - 1e-3 * Mat::Identity(2, 2)).norm(), 1e-8);
    ASSERT_TRUE(ellipsoid_containment_holds(L1, L2, L3, S, alpha));
    const Ellipsoid outer{Vec::Zero(2), L3 * S * L3.transpose()};
    const EllipsoidGauge gauge(outer);
    for (int s = 0; s < 10000; ++s) {
      const Vec y = L1 * boundary_point(R, rng) + L2 * boundary_point(R, rng);
      EXPECT_LE(gauge(y), 1.0 + 1e-9);
    }
    ++checked;
  }
  EXPECT_EQ(checked, 50);
}

TEST(ContractLmi, TrivialPointIsBlockDiagonal) {
  const ProblemInstance inst = short_case_study(2, 3, 2.0);
  const int nX = inst.model.state_traj_dim(), nC = inst.projector.full.rows();
  std::mt19937_64 rng(43);
  const Mat S = random_spd(nX, rng);
  const Mat Z = Mat::Zero(nX, nX);
  const ContractLmi c = assemble_contract_lmi(
      AffineMatrix::constant(Z), AffineMatrix::constant(Z), AffineMatrix::constant(Vec::Zero(nX)),
      AffineMatrix::constant(Vec::Zero(nX)), AffineMatrix::constant(Mat::Ones(1, 1)),
      AffineMatrix::constant(Mat::Constant(1, 1, 0.5)), AffineMatrix::constant(Z), S, inst.projector.full);
  const Mat L = c.lmi.evaluate(Vec());
  ASSERT_EQ(L.rows(), nC + 2 * nX);
  const Mat Pi = inst.projector.full.matrix();
  Mat expect = Mat::Zero(nC + 2 * nX, nC + 2 * nX);
  expect.topLeftCorner(nC, nC) = Pi * S * Pi.transpose();
  expect.block(nC, nC, nX, nX) = S.inverse() / 2;
  expect.bottomRightCorner(nX, nX) = S.inverse() / 2;
  EXPECT_LE((L - expect).norm(), 1e-9 * expect.norm());
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (L + L.transpose())).eigenvalues().minCoeff(), 0.0);
}

TEST(ContractLmi, EmptyCouplingSetThrows) {
  const ProblemInstance inst = short_case_study(1, 3, 2.0);
  const int nX = inst.model.state_traj_dim();
  const AffineMatrix Z = AffineMatrix::constant(Mat::Zero(nX, nX));
  const AffineMatrix z = AffineMatrix::constant(Vec::Zero(nX));
  const AffineMatrix one = AffineMatrix::constant(Mat::Ones(1, 1));
  EXPECT_THROW(assemble_contract_lmi(Z, Z, z, z, one, one, Z, Mat::Identity(nX, nX), inst.projector.full),
               EmptyCouplingSet);
}

TEST(ContractLmi, SchurStepImpliesContainment) {
  // Any point with the LMI PSD satisfies the quadratic inequality at
  // alpha = beta / lambda.
  std::mt19937_64 rng(44);
  const ProblemInstance inst = short_case_study(2, 3, 2.0);
  const int nX = inst.model.state_traj_dim();
  const Mat Pi = inst.projector.full.matrix();
  const Mat& S = inst.disturbance.sigma;
  const PatternMask ymask = effective_y_mask(inst);
  std::uniform_real_distribution<double> scale(0.001, 0.05);
  int feasible = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const double lambda = 1.0 + 3.0 * std::uniform_real_distribution<double>()(rng);
    const double beta = lambda * std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    const Mat Y = random_conforming(ymask, rng, scale(rng));
    const Mat Pw = scale(rng) * random_matrix(nX, nX, rng), Pxi = scale(rng) * random_matrix(nX, nX, rng);
    const ContractLmi c = assemble_contract_lmi(
        AffineMatrix::constant(Pw), AffineMatrix::constant(Pxi), AffineMatrix::constant(Vec::Zero(nX)),
        AffineMatrix::constant(Vec::Zero(nX)), AffineMatrix::constant(Mat::Constant(1, 1, lambda)),
        AffineMatrix::constant(Mat::Constant(1, 1, beta)), AffineMatrix::constant(Y), S, inst.projector.full);
    const Mat L = c.lmi.evaluate(Vec());
    if (Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (L + L.transpose())).eigenvalues().minCoeff() < 0) continue;
    ++feasible;
    const Mat L3 = Pi * (lambda * Mat::Identity(nX, nX) - Y);
    EXPECT_GE(containment_min_eigenvalue(Pi * Pw, Pi * Pxi, L3, S, beta / lambda), -1e-9);
  }
  EXPECT_GT(feasible, 20);
}

TEST(ContractLmi, BetaEqualLambdaForcesZeroCouplingRows) {
  const ProblemInstance inst = short_case_study(2, 3, 2.0);
  const int nX = inst.model.state_traj_dim();
  const Mat& S = inst.disturbance.sigma;
  const Mat Pi = inst.projector.full.matrix();
  std::mt19937_64 rng(45);
  auto min_eig = [&](const Mat& Pxi) {
    const Mat Z = Mat::Zero(nX, nX);
    const ContractLmi c = assemble_contract_lmi(
        AffineMatrix::constant(Z), AffineMatrix::constant(Pxi), AffineMatrix::constant(Vec::Zero(nX)),
        AffineMatrix::constant(Vec::Zero(nX)), AffineMatrix::constant(Mat::Ones(1, 1)),
        AffineMatrix::constant(Mat::Ones(1, 1)), AffineMatrix::constant(Z), S, inst.projector.full);
    const Mat L = c.lmi.evaluate(Vec());
    return Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (L + L.transpose())).eigenvalues().minCoeff();
  };
  Mat Pxi = 1e-3 * random_matrix(nX, nX, rng);
  EXPECT_LT(min_eig(Pxi), -1e-12);
  // zero the coupling rows: the LMI is PSD again
  for (int k : inst.projector.full.index) Pxi.row(k).setZero();
  EXPECT_LE((Pi * Pxi).norm(), 0.0);
  EXPECT_GE(min_eig(Pxi), -1e-12);

  // As a program: beta = lambda = 1 with fixed, nonzero Pi_C Pxi is infeasible.
  ConicProgram p;
  const AffineMatrix t = p.add_scalar("t");
  const Mat Pxi_bad = 1e-3 * random_matrix(nX, nX, rng);
  const ContractLmi c = assemble_contract_lmi(
      AffineMatrix::constant(Mat::Zero(nX, nX)).widened(1), AffineMatrix::constant(Pxi_bad).widened(1),
      AffineMatrix::constant(Vec::Zero(nX)).widened(1), AffineMatrix::constant(Vec::Zero(nX)).widened(1),
      AffineMatrix::constant(Mat::Ones(1, 1)).widened(1), AffineMatrix::constant(Mat::Ones(1, 1)).widened(1),
      AffineMatrix::constant(Mat::Zero(nX, nX)).widened(1), S, inst.projector.full);
  p.add_psd(c.lmi, "beta = lambda");
  p.add_nonnegative(t, "t >= 0");
  p.add_linear_objective(t);
  EXPECT_EQ(solve(p).status, SolveStatus::Infeasible);
}

TEST(Program, GraphTwoDimensions) {
  const ProblemInstance inst = case_study_instance(2.5, 2);
  const ConicProgram p = assemble_program(inst);
  EXPECT_EQ(p.psd_sizes(), (std::vector<int>{32 + 48 + 48}));
  int robust = -1;
  for (const auto& c : p.constraints())
    if (c.label == "robust rows") robust = c.expr.rows();
  EXPECT_EQ(robust, 2 * 48 + 2 * 45);
  for (const char* v : {var::Qw, var::Qxi, var::Y, var::u_bar, var::v_bar, var::x_bar, var::Pw, var::Pxi,
                        var::lambda, var::beta}) {
    EXPECT_TRUE(p.has_variable(v)) << v;
  }
  for (const auto& c : p.constraints()) EXPECT_LE(c.expr.degree(), 1);
  EXPECT_EQ(p.variable(var::Qw).free_count(), inst.qn.free_count());
  EXPECT_EQ(p.variable(var::Qxi).free_count(), inst.qc.free_count());
}

TEST(Program, GraphOneHasNoContractMachinery) {
  const ProblemInstance inst = case_study_instance(2.5, 1);
  const ConicProgram p = assemble_program(inst);
  EXPECT_TRUE(p.psd_sizes().empty());
  for (const char* v : {var::Qxi, var::Y, var::v_bar, var::Pxi, var::lambda, var::beta}) {
    EXPECT_FALSE(p.has_variable(v)) << v;
  }
  EXPECT_EQ(p.count(ConeKind::PSD), 0);
}

TEST(Program, FixedContractValidation) {
  const ProblemInstance inst = short_case_study(2, 3, 2.0);
  const int nX = inst.model.state_traj_dim();
  FixedContract f{1.0, Mat::Zero(nX, nX), Vec::Zero(nX)};
  EXPECT_NO_THROW(assemble_fixed_contract_program(inst, f));
  FixedContract bad = f;
  bad.Y(5, 5) = 1.0;
  EXPECT_THROW(assemble_fixed_contract_program(inst, bad), PatternViolation);
  bad = f;
  bad.v_bar[0] = 1.0;  // x_1 is not a coupling state
  EXPECT_THROW(assemble_fixed_contract_program(inst, bad), PatternViolation);
  bad = f;
  bad.lambda = 0.5;
  EXPECT_THROW(assemble_fixed_contract_program(inst, bad), Error);
  bad = f;
  bad.v_bar.resize(3);
  EXPECT_THROW(assemble_fixed_contract_program(inst, bad), DimensionMismatch);
  EXPECT_FALSE(assemble_fixed_contract_program(inst, f).has_variable(var::lambda));
}

TEST(Program, ProductSupportCoversProduct) {
  const ProblemInstance inst = short_case_study(2, 3, 2.0);
  std::mt19937_64 rng(46);
  const auto flags = product_support(inst.surrogate.Btil, inst.qn, inst.surrogate.Ltil);
  const Mat P = inst.surrogate.Btil * random_conforming(inst.qn, rng) + inst.surrogate.Ltil;
  for (Eigen::Index c = 0; c < P.cols(); ++c)
    for (Eigen::Index r = 0; r < P.rows(); ++r)
      if (P(r, c) != 0.0) EXPECT_TRUE(flags[static_cast<size_t>(c * P.rows() + r)]);
}

TEST(Solve, ShortHorizonCaseStudy) {
  const ProblemInstance inst = short_case_study(2, 4, 2.0);
  const SdpSolution s = synthesize(inst);
  ASSERT_TRUE(s.optimal()) << s.report.raw_status;
  EXPECT_LE(s.report.primal_residual, 1e-8);
  EXPECT_LE(s.report.dual_residual, 1e-8);
  EXPECT_GE(s.lambda, 1.0 - 1e-9);
  EXPECT_GE(s.beta, -1e-9);
  EXPECT_LE(s.beta, s.lambda + 1e-9);
  EXPECT_NEAR(analytic_objective(surrogate_loop(s), inst.cost, inst.disturbance.second_moment,
                                 inst.xi_second_moment),
              s.objective, 1e-9 * std::max(1.0, s.objective));
  EXPECT_GE(contract_schur_margin(s, inst), -1e-7);
  EXPECT_TRUE(inst.qn.conforms(s.Qw));
  EXPECT_TRUE(inst.qc.conforms(s.Qxi));
  EXPECT_TRUE(inst.y.conforms(s.Y));
  const SdpSolution g1 = synthesize(short_case_study(1, 4, 2.0));
  ASSERT_TRUE(g1.optimal());
  EXPECT_LE(g1.objective, s.objective + 1e-6);
}
