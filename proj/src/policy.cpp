#include "agc/policy.hpp"

#include <cmath>

#include "agc/error.hpp"

namespace agc {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

Vec gaussian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vec z(n);
  for (int k = 0; k < n; ++k) z[k] = nd(rng);
  return z;
}

Mat contract_transform(const ContractPolicy& p, int n) {
  return p.lambda * Mat::Identity(n, n) - p.Y;
}

}  // namespace

double contract_membership(const Eigen::VectorXd& xC, const Ellipsoid& e) {
  if (xC.size() != e.center.size() || e.shape.rows() != xC.size() || e.shape.cols() != xC.size()) {
    throw DimensionMismatch("membership: point and ellipsoid dimensions differ");
  }
  return EllipsoidGauge(e)(xC);
}

EllipsoidGauge::EllipsoidGauge(const Ellipsoid& e) : center_(e.center), llt_(e.shape) {
  if (llt_.info() != Eigen::Success || e.shape.size() == 0) {
    throw SingularShape("ellipsoid shape matrix is not positive definite");
  }
  const Vec d = llt_.matrixLLT().diagonal();
  if (d.minCoeff() <= 1e-12 * d.maxCoeff()) throw SingularShape("ellipsoid shape matrix is singular");
}

double EllipsoidGauge::operator()(const Eigen::VectorXd& y) const {
  const Vec r = llt_.matrixL().solve(y - center_);
  return r.squaredNorm();
}

ContractPolicy recover_policy(const SdpSolution& s, const ProblemInstance& inst) {
  if (!s.optimal()) throw NotSolved("cannot recover a policy from an unsolved program");
  const int nX = inst.model.state_traj_dim();
  const int nU = inst.model.input_traj_dim();
  ContractPolicy p;
  p.u_bar = s.u_bar;
  p.Qw = inst.qn.project(s.Qw);
  p.has_contract = s.has_contract;
  if (!s.has_contract) {
    p.v_bar = Vec::Zero(nX);
    p.Qv = Mat::Zero(nU, nX);
    p.Qxi = Mat::Zero(nU, nX);
    p.Y = Mat::Zero(nX, nX);
    return p;
  }
  p.v_bar = s.v_bar;
  p.Qxi = s.Qxi;
  p.Y = s.Y;
  p.lambda = s.lambda;
  p.beta = s.beta;
  const Mat qv = right_solve_contract_transform(s.Qxi, s.lambda, s.Y, inst.model.state_dim());
  const double off = inst.qc.max_off_pattern(qv);
  if (off >= 1e-9) {
    throw PatternViolation("recovered Q^v leaves its pattern (max off-pattern entry " + std::to_string(off) + ")");
  }
  p.Qv = inst.qc.project(qv);
  const Mat Pi = inst.projector.full.matrix();
  const Mat PZ = Pi * contract_transform(p, nX);
  p.contract.center = Pi * p.v_bar;
  const Mat shape = PZ * inst.disturbance.sigma * PZ.transpose();
  p.contract.shape = 0.5 * (shape + shape.transpose());
  return p;
}

void check_policy_causality(const ContractPolicy& p, const SystemModel& model) {
  const int n = model.state_dim();
  const int m = model.input_dim();
  const int nX = model.state_traj_dim();
  for (int t = 0; t < model.horizon; ++t) {
    const int tail = nX - (t + 1) * n;
    if (tail <= 0) continue;
    for (const Mat* q : {&p.Qw, &p.Qv}) {
      if (q->size() == 0) continue;
      if (q->block(t * m, (t + 1) * n, m, tail).cwiseAbs().maxCoeff() != 0.0) {
        throw CausalityViolation("policy row block " + std::to_string(t) +
                                 " depends on information after time " + std::to_string(t));
      }
    }
  }
}

SimulationResult simulate(const ProblemInstance& inst, const ContractPolicy& p, const Eigen::VectorXd& w) {
  const SystemModel& model = inst.model;
  const int n = model.state_dim();
  const int m = model.input_dim();
  const int nX = model.state_traj_dim();
  if (w.size() != nX) throw DimensionMismatch("disturbance trajectory has the wrong length");
  check_policy_causality(p, model);

  SimulationResult r;
  r.w = w;
  r.x = Vec::Zero(nX);
  r.u = Vec::Zero(model.input_traj_dim());
  r.x.head(n) = w.head(n);
  const Vec x_dev_offset = p.v_bar;
  for (int t = 0; t < model.horizon; ++t) {
    const int known = (t + 1) * n;
    Vec ut = p.u_bar.segment(t * m, m) + p.Qw.block(t * m, 0, m, known) * w.head(known);
    if (p.has_contract) {
      ut += p.Qv.block(t * m, 0, m, known) * (r.x.head(known) - x_dev_offset.head(known));
    }
    r.u.segment(t * m, m) = ut;
    r.x.segment((t + 1) * n, n) =
        model.A[t] * r.x.segment(t * n, n) + model.B[t] * ut + w.segment((t + 1) * n, n);
  }
  const ConstraintSet& c = inst.constraints;
  if (c.rows() > 0) r.constraint_residual = (c.Fx * r.x + c.Fu * r.u + c.Fw * w - c.g).maxCoeff();
  if (p.has_contract) {
    r.contract_margin = contract_membership(inst.projector.full.apply(r.x), p.contract) - 1.0;
  }
  return r;
}

Eigen::VectorXd surrogate_map(const ProblemInstance& inst, const ContractPolicy& p, const Eigen::VectorXd& w,
                              const Eigen::VectorXd& vC) {
  const SurrogateOperators& ops = inst.surrogate;
  const Mat Pi = inst.projector.full.matrix();
  if (vC.size() != Pi.rows()) throw DimensionMismatch("coupling trajectory has the wrong length");
  Vec u = p.u_bar + p.Qw * w;
  if (p.has_contract) u += p.Qv * (Pi.transpose() * vC - p.v_bar);
  Vec x = ops.Btil * u + ops.Ltil * w;
  if (vC.size()) x += ops.Htil * vC;
  return x;
}

bool strict_causality_check(const ContractPolicy& p, const ProblemInstance& inst, std::mt19937_64& rng,
                            int trials, double tol) {
  const int nC = inst.projector.step_dim;
  if (!p.has_contract || nC == 0) return true;
  const int nX = inst.model.state_traj_dim();
  const int nXC = inst.projector.full.rows();
  for (int k = 0; k < trials; ++k) {
    const Vec w = gaussian(nX, rng);
    const Vec v = gaussian(nXC, rng);
    const Vec base = inst.projector.full.apply(surrogate_map(inst, p, w, v));
    for (int t = 0; t <= inst.model.horizon; ++t) {
      Vec v2 = v;
      v2.tail(nXC - nC * t) = gaussian(nXC - nC * t, rng);
      const Vec other = inst.projector.full.apply(surrogate_map(inst, p, w, v2));
      const int len = nC * (t + 1);
      if ((base.head(len) - other.head(len)).cwiseAbs().maxCoeff() > tol) return false;
    }
  }
  return true;
}

double fixed_point_residual(const ProblemInstance& inst, const ContractPolicy& p, const Eigen::VectorXd& w) {
  const SimulationResult sim = simulate(inst, p, w);
  const Vec f = surrogate_map(inst, p, w, inst.projector.full.apply(sim.x));
  return (f - sim.x).cwiseAbs().maxCoeff();
}

SurrogateLoop surrogate_loop(const ContractPolicy& p, const ProblemInstance& inst) {
  const SurrogateOperators& ops = inst.surrogate;
  const int nX = inst.model.state_traj_dim();
  SurrogateLoop l;
  l.u_bar = p.u_bar;
  l.Qw = p.Qw;
  l.Pw = ops.Btil * p.Qw + ops.Ltil;
  if (p.has_contract) {
    const Mat Pi = inst.projector.full.matrix();
    const Mat Z = contract_transform(p, nX);
    l.Qxi = p.Qv * Z;
    l.Pxi = ops.Btil * l.Qxi + ops.Htil * (Pi * Z);
    l.x_bar = ops.Btil * p.u_bar + ops.Htil * (Pi * p.v_bar);
  } else {
    l.Qxi = Mat::Zero(p.Qw.rows(), nX);
    l.Pxi = Mat::Zero(nX, nX);
    l.x_bar = ops.Btil * p.u_bar;
  }
  return l;
}

Eigen::VectorXd worst_case_margins(const SurrogateLoop& l, const ConstraintSet& c, const Eigen::MatrixXd& sigma_sqrt) {
  const Mat G = c.Fx * l.Pw + c.Fu * l.Qw + c.Fw;
  Vec out = (G * sigma_sqrt).rowwise().norm();
  if (l.Pxi.size()) out += ((c.Fx * l.Pxi + c.Fu * l.Qxi) * sigma_sqrt).rowwise().norm();
  return out - (c.g - c.Fx * l.x_bar - c.Fu * l.u_bar);
}

double expected_cost(const SurrogateLoop& l, const Eigen::MatrixXd& Mw, const Eigen::MatrixXd& Mxi,
                     const CostSpec& cost) {
  return analytic_objective(l, cost, Mw, Mxi);
}

Eigen::VectorXd sample_interior(const Eigen::MatrixXd& sigma_sqrt, std::mt19937_64& rng) {
  const int n = static_cast<int>(sigma_sqrt.rows());
  Vec z = gaussian(n, rng);
  z.normalize();
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  return sigma_sqrt * (std::pow(ud(rng), 1.0 / n) * z);
}

Eigen::VectorXd sample_boundary(const Eigen::MatrixXd& sigma_sqrt, std::mt19937_64& rng) {
  Vec z = gaussian(static_cast<int>(sigma_sqrt.rows()), rng);
  return sigma_sqrt * z.normalized();
}

Eigen::VectorXd sample_mixed(const Eigen::MatrixXd& sigma_sqrt, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  return coin(rng) ? sample_boundary(sigma_sqrt, rng) : sample_interior(sigma_sqrt, rng);
}

MonteCarloEstimate monte_carlo_cost(const ProblemInstance& inst, const ContractPolicy& p, LoopKind kind,
                                    int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Mat& S = inst.sigma_sqrt;
  const CostSpec& cost = inst.cost;
  const SurrogateLoop l = surrogate_loop(p, inst);
  double sum = 0.0, sumsq = 0.0;
  for (int k = 0; k < samples; ++k) {
    const Vec w = sample_interior(S, rng);
    Vec x, u;
    if (kind == LoopKind::Surrogate) {
      const Vec xi = sample_interior(S, rng);
      x = l.x_bar + l.Pw * w + l.Pxi * xi;
      u = l.u_bar + l.Qw * w + l.Qxi * xi;
    } else {
      SimulationResult sim = simulate(inst, p, w);
      x = std::move(sim.x);
      u = std::move(sim.u);
    }
    const double c = x.dot(cost.Rx * x) + u.dot(cost.Ru * u);
    sum += c;
    sumsq += c * c;
  }
  MonteCarloEstimate e;
  e.samples = samples;
  if (samples > 0) {
    e.mean = sum / samples;
    const double var = samples > 1 ? std::max(0.0, (sumsq - samples * e.mean * e.mean) / (samples - 1)) : 0.0;
    e.std_error = std::sqrt(var / samples);
  }
  return e;
}

VerificationReport verify_policy(const ProblemInstance& inst, const ContractPolicy& p, int samples,
                                 std::uint64_t seed) {
  VerificationReport r;
  r.samples = samples;
  std::mt19937_64 rng(seed);
  r.max_constraint_residual = -INFINITY;
  for (int k = 0; k < samples; ++k) {
    const SimulationResult sim = simulate(inst, p, sample_mixed(inst.sigma_sqrt, rng));
    r.max_constraint_residual = std::max(r.max_constraint_residual, sim.constraint_residual);
    if (p.has_contract) r.max_contract_membership = std::max(r.max_contract_membership, sim.contract_margin + 1.0);
  }
  const SurrogateLoop l = surrogate_loop(p, inst);
  const Vec margins = worst_case_margins(l, inst.constraints, inst.sigma_sqrt);
  r.max_worst_case_margin = margins.size() ? margins.maxCoeff() : 0.0;
  r.analytic_cost = expected_cost(l, inst.disturbance.second_moment, inst.xi_second_moment, inst.cost);
  r.true_cost = monte_carlo_cost(inst, p, LoopKind::True, samples, seed + 1);
  return r;
}

}  // namespace agc
