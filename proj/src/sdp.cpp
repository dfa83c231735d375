#include "agc/sdp.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "agc/error.hpp"

namespace agc {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

AffineMatrix scalar_const(double v) { return AffineMatrix::constant(Mat::Constant(1, 1, v)); }

Mat indicator(const Mat& m) { return (m.array() != 0.0).cast<double>().matrix(); }

Mat mask_indicator(const PatternMask& q) {
  Mat out = Mat::Zero(q.rows(), q.cols());
  for (auto [r, c] : q.free_entries()) out(r, c) = 1.0;
  return out;
}

std::vector<char> to_flags(const Mat& support) {
  std::vector<char> out(static_cast<size_t>(support.size()));
  for (Eigen::Index c = 0; c < support.cols(); ++c)
    for (Eigen::Index r = 0; r < support.rows(); ++r)
      out[static_cast<size_t>(c * support.rows() + r)] = support(r, c) != 0.0;
  return out;
}

Mat symmetrized(const Mat& m) { return 0.5 * (m + m.transpose()); }

double min_eigenvalue(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrized(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

std::vector<char> coupling_coordinates(const ProblemInstance& inst) {
  std::vector<char> flags(static_cast<size_t>(inst.model.state_traj_dim()), 0);
  for (int k : inst.projector.full.index) flags[static_cast<size_t>(k)] = 1;
  return flags;
}

ConicProgram assemble_impl(const ProblemInstance& inst, const FixedContract* fixed) {
  const SystemModel& model = inst.model;
  const SurrogateOperators& ops = inst.surrogate;
  const int nX = model.state_traj_dim();
  const int nU = model.input_traj_dim();
  const bool coupled = inst.has_coupling();
  const Mat Pi = inst.projector.full.matrix();
  const Mat& sigma = inst.disturbance.sigma;

  ConicProgram prog;
  PolicyExpressions e;
  e.Qw = prog.add_variable(var::Qw, inst.qn);
  e.u_bar = prog.add_variable(var::u_bar, nU, 1);

  AffineMatrix Y, v_bar, lambda, beta;
  PatternMask ymask;
  if (coupled) {
    e.Qxi = prog.add_variable(var::Qxi, inst.qc);
    ymask = effective_y_mask(inst);
    if (fixed) {
      if (fixed->Y.rows() != nX || fixed->Y.cols() != nX || fixed->v_bar.size() != nX) {
        throw DimensionMismatch("fixed contract has the wrong dimensions");
      }
      if (!(fixed->lambda >= 1.0)) throw Error("fixed contract needs lambda >= 1");
      if (!inst.y.conforms(fixed->Y)) {
        throw PatternViolation("fixed Y leaves its sparsity pattern (max off-pattern entry " +
                               std::to_string(inst.y.max_off_pattern(fixed->Y)) + ")");
      }
      const auto cflags = coupling_coordinates(inst);
      for (int k = 0; k < nX; ++k) {
        if (!cflags[static_cast<size_t>(k)] && fixed->v_bar[k] != 0.0) {
          throw PatternViolation("fixed v_bar is nonzero outside the coupling coordinates");
        }
      }
      Y = AffineMatrix::constant(fixed->Y);
      v_bar = AffineMatrix::constant(fixed->v_bar);
      lambda = scalar_const(fixed->lambda);
    } else {
      Y = prog.add_variable(var::Y, ymask);
      v_bar = prog.add_variable(var::v_bar, nX, 1, coupling_coordinates(inst));
      lambda = prog.add_scalar(var::lambda);
    }
    beta = prog.add_scalar(var::beta);
  }

  e.x_bar = prog.add_variable(var::x_bar, nX, 1);
  e.Pw = prog.add_variable(var::Pw, nX, nX, product_support(ops.Btil, inst.qn, ops.Ltil));
  prog.add_equality(e.Pw - ops.Btil * e.Qw - ops.Ltil, "Pw definition");

  if (coupled) {
    const Mat HPi = ops.Htil * Pi;  // N_x x N_x
    Mat zsupport = mask_indicator(ymask) + Mat::Identity(nX, nX);
    if (fixed) zsupport += indicator(fixed->Y);
    const Mat support = indicator(ops.Btil) * mask_indicator(inst.qc) + indicator(HPi) * indicator(zsupport);
    e.Pxi = prog.add_variable(var::Pxi, nX, nX, to_flags(support));
    const AffineMatrix PiZ = AffineMatrix::scaled(lambda, Pi) - Pi * Y;
    prog.add_equality(e.Pxi - ops.Btil * e.Qxi - ops.Htil * PiZ, "Pxi definition");
    prog.add_equality(e.x_bar - ops.Btil * e.u_bar - ops.Htil * (Pi * v_bar), "x_bar definition");
  } else {
    prog.add_equality(e.x_bar - ops.Btil * e.u_bar, "x_bar definition");
  }

  add_robust_rows(prog, assemble_soc_rows(e, inst.constraints, inst.sigma_sqrt));

  if (coupled) {
    const ContractLmi c =
        assemble_contract_lmi(e.Pw, e.Pxi, e.x_bar, v_bar, lambda, beta, Y, sigma, inst.projector.full);
    prog.add_equality(c.equality, "contract center");
    prog.add_psd(c.lmi, "contract LMI");
    if (!fixed) prog.add_nonnegative(lambda - Mat::Ones(1, 1), "lambda >= 1");
    prog.add_nonnegative(lambda - beta, "lambda >= beta");
    prog.add_nonnegative(beta, "beta >= 0");
  }

  const Mat Rx = symmetric_sqrt(inst.cost.Rx);
  const Mat Ru = symmetric_sqrt(inst.cost.Ru);
  const Mat Mw = symmetric_sqrt(inst.disturbance.second_moment);
  prog.add_squared_norm_objective(Rx * e.Pw * Mw, "state w");
  prog.add_squared_norm_objective(Rx * e.x_bar, "state mean");
  prog.add_squared_norm_objective(Ru * e.Qw * Mw, "input w");
  prog.add_squared_norm_objective(Ru * e.u_bar, "input mean");
  if (coupled) {
    const Mat Mxi = symmetric_sqrt(inst.xi_second_moment);
    prog.add_squared_norm_objective(Rx * e.Pxi * Mxi, "state xi");
    prog.add_squared_norm_objective(Ru * e.Qxi * Mxi, "input xi");
  }
  return prog;
}

}  // namespace

std::vector<RobustRow> assemble_soc_rows(const PolicyExpressions& e, const ConstraintSet& cons,
                                         const Eigen::MatrixXd& sigma_sqrt) {
  const AffineMatrix Gw = cons.Fx * e.Pw + cons.Fu * e.Qw + cons.Fw;
  const AffineMatrix rhs = AffineMatrix::constant(cons.g) - cons.Fx * e.x_bar - cons.Fu * e.u_bar;
  AffineMatrix Gxi;
  if (e.has_xi()) Gxi = cons.Fx * e.Pxi + cons.Fu * e.Qxi;
  std::vector<RobustRow> rows;
  rows.reserve(static_cast<size_t>(cons.rows()));
  for (int i = 0; i < cons.rows(); ++i) {
    RobustRow r;
    r.w_term = sigma_sqrt * Gw.row(i).transpose();
    if (e.has_xi()) r.xi_term = sigma_sqrt * Gxi.row(i).transpose();
    r.rhs = rhs.row(i);
    rows.push_back(std::move(r));
  }
  return rows;
}

void add_robust_rows(ConicProgram& program, const std::vector<RobustRow>& rows) {
  const int m = static_cast<int>(rows.size());
  if (m == 0) return;
  std::vector<char> wflags(static_cast<size_t>(m)), xflags(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    wflags[static_cast<size_t>(i)] = !rows[static_cast<size_t>(i)].w_term.is_zero();
    const auto& xt = rows[static_cast<size_t>(i)].xi_term;
    xflags[static_cast<size_t>(i)] = xt.rows() > 0 && !xt.is_zero();
  }
  const AffineMatrix sw = program.add_variable(var::soc_w, m, 1, wflags);
  const AffineMatrix sx = program.add_variable(var::soc_xi, m, 1, xflags);
  std::vector<AffinePiece> rhs;
  rhs.reserve(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    const auto& r = rows[static_cast<size_t>(i)];
    const std::string tag = "robust row " + std::to_string(i + 1);
    if (wflags[static_cast<size_t>(i)]) program.add_soc(sw.row(i), r.w_term, tag + " (w)");
    if (xflags[static_cast<size_t>(i)]) program.add_soc(sx.row(i), r.xi_term, tag + " (xi)");
    rhs.push_back({i, 0, r.rhs});
  }
  program.add_nonnegative(AffineMatrix::assemble(m, 1, rhs) - sw - sx, "robust rows");
}

Eigen::VectorXd robust_row_margins(const std::vector<RobustRow>& rows, const Eigen::VectorXd& x) {
  Vec out(static_cast<Eigen::Index>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    double v = rows[i].w_term.evaluate(x).norm() - rows[i].rhs.evaluate(x)(0, 0);
    if (rows[i].xi_term.rows() > 0) v += rows[i].xi_term.evaluate(x).norm();
    out[static_cast<Eigen::Index>(i)] = v;
  }
  return out;
}

ContractLmi assemble_contract_lmi(const AffineMatrix& Pw, const AffineMatrix& Pxi,
                                  const AffineMatrix& x_bar, const AffineMatrix& v_bar,
                                  const AffineMatrix& lambda, const AffineMatrix& beta,
                                  const AffineMatrix& Y, const Eigen::MatrixXd& sigma,
                                  const Selection& pi_c) {
  const int nC = pi_c.rows();
  if (nC == 0) throw EmptyCouplingSet("no information-coupling states: contract is vacuous");
  const int nX = pi_c.domain_dim;
  if (sigma.rows() != nX || Pw.rows() != nX || Pxi.rows() != nX || Y.rows() != nX) {
    throw DimensionMismatch("contract LMI operands disagree with Pi_C");
  }
  const Mat Pi = pi_c.matrix();
  const Mat sinv = symmetrized(sigma.inverse());
  const AffineMatrix YS = Pi * Y * Mat(sigma * Pi.transpose());
  const AffineMatrix top = AffineMatrix::scaled(lambda, symmetrized(Pi * sigma * Pi.transpose())) - YS - YS.transpose();
  const AffineMatrix W = Pi * Pw;
  const AffineMatrix X = Pi * Pxi;
  ContractLmi out;
  out.equality = Pi * (x_bar - v_bar);
  out.lmi = AffineMatrix::assemble(nC + 2 * nX, nC + 2 * nX,
                                   {{0, 0, top},
                                    {0, nC, W},
                                    {0, nC + nX, X},
                                    {nC, 0, W.transpose()},
                                    {nC + nX, 0, X.transpose()},
                                    {nC, nC, AffineMatrix::scaled(beta, sinv)},
                                    {nC + nX, nC + nX, AffineMatrix::scaled(lambda - beta, sinv)}});
  return out;
}

double containment_min_eigenvalue(const Eigen::MatrixXd& L1, const Eigen::MatrixXd& L2,
                                  const Eigen::MatrixXd& L3, const Eigen::MatrixXd& sigma,
                                  double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw AlphaOutOfRange("alpha must lie in [0, 1]");
  const bool l1_zero = L1.size() == 0 || L1.isZero(0.0);
  const bool l2_zero = L2.size() == 0 || L2.isZero(0.0);
  if (alpha == 0.0 && !l1_zero) throw AlphaOutOfRange("alpha = 0 requires L1 = 0");
  if (alpha == 1.0 && !l2_zero) throw AlphaOutOfRange("alpha = 1 requires L2 = 0");
  Mat d = L3 * sigma * L3.transpose();
  if (!l1_zero) d -= (L1 * sigma * L1.transpose()) / alpha;
  if (!l2_zero) d -= (L2 * sigma * L2.transpose()) / (1.0 - alpha);
  return min_eigenvalue(d);
}

bool ellipsoid_containment_holds(const Eigen::MatrixXd& L1, const Eigen::MatrixXd& L2,
                                 const Eigen::MatrixXd& L3, const Eigen::MatrixXd& sigma,
                                 double alpha, double tol) {
  return containment_min_eigenvalue(L1, L2, L3, sigma, alpha) >= -tol;
}

PatternMask effective_y_mask(const ProblemInstance& inst) {
  const auto& m = inst.model;
  const int N = m.num_subsystems();
  PatternMask mask(PatternMask::Kind::Custom, m.horizon + 1, m.horizon + 1, m.nx, m.nx);
  std::vector<char> in_c(static_cast<size_t>(N), 0);
  for (int i : inst.decomposition.coupling_union) in_c[static_cast<size_t>(i)] = 1;
  for (int t = 0; t <= m.horizon; ++t)
    for (int i = 0; i < N; ++i)
      for (int s = 0; s <= m.horizon; ++s)
        for (int j = 0; j < N; ++j)
          mask.set_block(t, i, s, j, in_c[static_cast<size_t>(i)] && inst.y.allows_block(t, i, s, j));
  return mask;
}

std::vector<char> product_support(const Eigen::MatrixXd& left, const PatternMask& q,
                                  const Eigen::MatrixXd& offset) {
  Mat s = indicator(left) * mask_indicator(q);
  if (offset.size()) s += indicator(offset);
  return to_flags(s);
}

ConicProgram assemble_program(const ProblemInstance& instance) { return assemble_impl(instance, nullptr); }

ConicProgram assemble_fixed_contract_program(const ProblemInstance& instance, const FixedContract& fixed) {
  return assemble_impl(instance, &fixed);
}

SdpSolution extract_solution(const ConicProgram& program, const ProblemInstance& inst,
                             const SolverReport& report, const FixedContract* fixed) {
  const int nX = inst.model.state_traj_dim();
  const int nU = inst.model.input_traj_dim();
  SdpSolution s;
  s.report = report;
  s.has_contract = inst.has_coupling();
  const Vec& x = report.x;
  auto get = [&](const char* name, int r, int c) -> Mat {
    if (program.has_variable(name) && x.size() >= program.num_scalars()) return program.value(name, x);
    return Mat::Zero(r, c);
  };
  s.Qw = get(var::Qw, nU, nX);
  s.u_bar = get(var::u_bar, nU, 1);
  s.x_bar = get(var::x_bar, nX, 1);
  s.Pw = get(var::Pw, nX, nX);
  s.Qxi = get(var::Qxi, nU, nX);
  s.Pxi = get(var::Pxi, nX, nX);
  s.beta = get(var::beta, 1, 1)(0, 0);
  if (fixed && s.has_contract) {
    s.Y = fixed->Y;
    s.v_bar = fixed->v_bar;
    s.lambda = fixed->lambda;
  } else {
    s.Y = get(var::Y, nX, nX);
    s.v_bar = get(var::v_bar, nX, 1);
    s.lambda = program.has_variable(var::lambda) ? get(var::lambda, 1, 1)(0, 0) : 1.0;
  }
  s.objective = report.status == SolveStatus::Optimal ? program.objective_value(x) : 0.0;
  return s;
}

SdpSolution synthesize(const ProblemInstance& instance, const SolverOptions& opts, const ConicSolver* backend) {
  const ConicProgram p = assemble_program(instance);
  return extract_solution(p, instance, solve(p, opts, backend));
}

SdpSolution synthesize_fixed(const ProblemInstance& instance, const FixedContract& fixed,
                             const SolverOptions& opts, const ConicSolver* backend) {
  const ConicProgram p = assemble_fixed_contract_program(instance, fixed);
  return extract_solution(p, instance, solve(p, opts, backend), &fixed);
}

SurrogateLoop surrogate_loop(const SdpSolution& s) {
  return SurrogateLoop{s.x_bar, s.u_bar, s.Pw, s.Qw, s.Pxi, s.Qxi};
}

double analytic_objective(const SurrogateLoop& l, const CostSpec& cost, const Eigen::MatrixXd& Mw,
                          const Eigen::MatrixXd& Mxi) {
  double v = (l.Pw.transpose() * cost.Rx * l.Pw * Mw).trace() + l.x_bar.dot(cost.Rx * l.x_bar) +
             (l.Qw.transpose() * cost.Ru * l.Qw * Mw).trace() + l.u_bar.dot(cost.Ru * l.u_bar);
  if (l.Pxi.size()) v += (l.Pxi.transpose() * cost.Rx * l.Pxi * Mxi).trace();
  if (l.Qxi.size()) v += (l.Qxi.transpose() * cost.Ru * l.Qxi * Mxi).trace();
  return v;
}

double contract_schur_margin(const SdpSolution& s, const ProblemInstance& inst) {
  if (!s.has_contract) return 0.0;
  const Mat Pi = inst.projector.full.matrix();
  const int nX = inst.model.state_traj_dim();
  const Mat L3 = Pi * (s.lambda * Mat::Identity(nX, nX) - s.Y);
  const Mat L1 = Pi * s.Pw;
  const Mat L2 = Pi * s.Pxi;
  return containment_min_eigenvalue(L1, L2, L3, inst.disturbance.sigma, s.beta / s.lambda);
}

}  // namespace agc
