#include "agc/conic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include <Eigen/Eigenvalues>

#include "agc/error.hpp"
#include "clarabel_capi.h"

namespace agc {

int VariableBlock::free_count() const {
  return static_cast<int>(std::count_if(index.begin(), index.end(), [](int k) { return k >= 0; }));
}

AffineMatrix ConicProgram::register_block(VariableBlock block) {
  if (blocks_.count(block.name)) throw Error("variable '" + block.name + "' registered twice");
  for (int& k : block.index)
    if (k >= 0) k = num_scalars_++;
  const std::string name = block.name;
  order_.push_back(name);
  blocks_.emplace(name, std::move(block));
  return expression(name);
}

AffineMatrix ConicProgram::add_variable(const std::string& name, int rows, int cols) {
  return add_variable(name, rows, cols, std::vector<char>(static_cast<size_t>(rows) * cols, 1));
}

AffineMatrix ConicProgram::add_variable(const std::string& name, int rows, int cols,
                                        const std::vector<char>& free) {
  if (static_cast<int>(free.size()) != rows * cols) {
    throw DimensionMismatch("mask for '" + name + "' has the wrong size");
  }
  VariableBlock b{name, rows, cols, {}};
  b.index.resize(free.size());
  for (size_t k = 0; k < free.size(); ++k) b.index[k] = free[k] ? 0 : -1;
  return register_block(std::move(b));
}

AffineMatrix ConicProgram::add_variable(const std::string& name, const PatternMask& mask) {
  std::vector<char> free(static_cast<size_t>(mask.rows()) * mask.cols(), 0);
  for (auto [r, c] : mask.free_entries()) free[static_cast<size_t>(c) * mask.rows() + r] = 1;
  return add_variable(name, mask.rows(), mask.cols(), free);
}

const VariableBlock& ConicProgram::variable(const std::string& name) const {
  auto it = blocks_.find(name);
  if (it == blocks_.end()) throw Error("unknown variable '" + name + "'");
  return it->second;
}

AffineMatrix ConicProgram::expression(const std::string& name) const {
  const auto& b = variable(name);
  return AffineMatrix::variables(b.rows, b.cols, b.index, num_scalars_);
}

std::vector<std::string> ConicProgram::variable_names() const { return order_; }

void ConicProgram::add_equality(const AffineMatrix& expr, const std::string& label) {
  constraints_.push_back({ConeKind::Zero, expr.vec(), label});
}

void ConicProgram::add_nonnegative(const AffineMatrix& expr, const std::string& label) {
  constraints_.push_back({ConeKind::Nonnegative, expr.vec(), label});
}

void ConicProgram::add_soc(const AffineMatrix& t, const AffineMatrix& v, const std::string& label) {
  if (t.rows() != 1 || t.cols() != 1) throw DimensionMismatch("SOC bound must be 1x1");
  // identically zero entries do not change the norm
  const AffineMatrix vv = v.select(v.nonzero_entries());
  constraints_.push_back({ConeKind::SecondOrder,
                          AffineMatrix::assemble(1 + vv.rows(), 1, {{0, 0, t}, {1, 0, vv}}),
                          label});
}

void ConicProgram::add_psd(const AffineMatrix& expr, const std::string& label) {
  if (expr.rows() != expr.cols()) throw DimensionMismatch("PSD constraint '" + label + "' not square");
  const AffineMatrix asym = expr - expr.transpose();
  double scale = 1.0;
  if (expr.coefficients().nonZeros() > 0)
    scale = std::max(scale, Eigen::Map<const Eigen::VectorXd>(expr.coefficients().valuePtr(),
                                                              expr.coefficients().nonZeros())
                                .cwiseAbs()
                                .maxCoeff());
  scale = std::max(scale, expr.offset().cwiseAbs().maxCoeff());
  double bad = asym.offset().cwiseAbs().maxCoeff();
  if (asym.coefficients().nonZeros() > 0)
    bad = std::max(bad, Eigen::Map<const Eigen::VectorXd>(asym.coefficients().valuePtr(),
                                                          asym.coefficients().nonZeros())
                            .cwiseAbs()
                            .maxCoeff());
  if (bad > 1e-12 * scale) throw Error("PSD constraint '" + label + "' is not symmetric");
  constraints_.push_back({ConeKind::PSD, expr, label});
}

void ConicProgram::add_linear_objective(const AffineMatrix& term) {
  if (term.rows() != 1 || term.cols() != 1) throw DimensionMismatch("objective term must be 1x1");
  linear_objective_ += term;
}

void ConicProgram::add_squared_norm_objective(const AffineMatrix& e, const std::string& label) {
  if (e.is_zero()) return;
  const AffineMatrix tau = add_scalar("epi:" + label);
  epigraph_vars_.push_back(variable("epi:" + label).index[0]);
  const AffineMatrix ev = e.select(e.nonzero_entries());
  squared_terms_.push_back(ev);
  const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
  add_soc(tau + one, AffineMatrix::assemble(1 + ev.rows(), 1, {{0, 0, tau - one}, {1, 0, 2.0 * ev}}),
          "epi:" + label);
}

int ConicProgram::count(ConeKind kind) const {
  return static_cast<int>(std::count_if(constraints_.begin(), constraints_.end(),
                                        [kind](const ConeConstraint& c) { return c.kind == kind; }));
}

std::vector<int> ConicProgram::psd_sizes() const {
  std::vector<int> out;
  for (const auto& c : constraints_)
    if (c.kind == ConeKind::PSD) out.push_back(c.expr.rows());
  return out;
}

double ConicProgram::objective_value(const Eigen::VectorXd& x) const {
  double v = linear_objective_.evaluate(x)(0, 0);
  for (const auto& e : squared_terms_) v += e.evaluate(x).squaredNorm();
  return v;
}

double ConicProgram::epigraph_objective_value(const Eigen::VectorXd& x) const {
  double v = linear_objective_.evaluate(x)(0, 0);
  for (int k : epigraph_vars_) v += x[k];
  return v;
}

Eigen::MatrixXd ConicProgram::value(const std::string& name, const Eigen::VectorXd& x) const {
  return expression(name).evaluate(x);
}

StandardForm ConicProgram::to_standard_form() const {
  using Triplet = Eigen::Triplet<double>;
  using RowSparse = AffineMatrix::Sparse;
  StandardForm sf;
  sf.num_vars = num_scalars_;
  std::vector<Triplet> trips;
  std::vector<double> b;

  // Appends one standard-form row: sign * (coefficient row k of e) and
  // b = -sign * offset, after combining the listed (row, weight) pairs.
  auto emit = [&](const AffineMatrix& e, std::initializer_list<std::pair<int, double>> src, double sign) {
    const int row = static_cast<int>(b.size());
    const RowSparse& c = e.coefficients();
    double off = 0.0;
    for (auto [k, wgt] : src) {
      for (RowSparse::InnerIterator it(c, k); it; ++it) trips.emplace_back(row, it.col(), sign * wgt * it.value());
      off += wgt * e.offset()[k];
    }
    b.push_back(-sign * off);
  };

  for (const auto& con : constraints_) {
    const AffineMatrix& e = con.expr;
    switch (con.kind) {
      case ConeKind::Zero: {
        // 0 = 0 rows carry no information and leave the KKT system singular
        const std::vector<int> keep = e.nonzero_entries();
        if (keep.empty()) break;
        for (int k : keep) emit(e, {{k, 1.0}}, 1.0);
        sf.cones.push_back({ConeKind::Zero, static_cast<int>(keep.size())});
        break;
      }
      case ConeKind::Nonnegative:
      case ConeKind::SecondOrder:
        for (int k = 0; k < e.rows() * e.cols(); ++k) emit(e, {{k, 1.0}}, -1.0);
        sf.cones.push_back({con.kind, e.rows() * e.cols()});
        break;
      case ConeKind::PSD: {
        const int n = e.rows();
        const double r2 = std::sqrt(2.0);
        for (int c = 0; c < n; ++c) {
          for (int r = 0; r <= c; ++r) {
            if (r == c) {
              emit(e, {{c * n + r, 1.0}}, -1.0);
            } else {
              emit(e, {{c * n + r, 0.5 * r2}, {r * n + c, 0.5 * r2}}, -1.0);
            }
          }
        }
        sf.cones.push_back({ConeKind::PSD, n});
        break;
      }
    }
  }

  sf.A.resize(static_cast<int>(b.size()), num_scalars_);
  sf.A.setFromTriplets(trips.begin(), trips.end());
  sf.A.makeCompressed();
  sf.b = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));

  sf.q = Eigen::VectorXd::Zero(num_scalars_);
  const RowSparse& c = linear_objective_.coefficients();
  for (RowSparse::InnerIterator it(c, 0); it; ++it) sf.q[it.col()] += it.value();
  for (int k : epigraph_vars_) sf.q[k] += 1.0;
  sf.constant = linear_objective_.offset()[0];
  return sf;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "numerical-failure";
}

SolverOptions SolverOptions::from_env() {
  SolverOptions o;
  if (const char* env = std::getenv("AGC_SOLVER_TOL")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && v > 0.0 && std::isfinite(v)) o.tol = v;
  }
  return o;
}

void compute_residuals(const StandardForm& p, SolverReport& r) {
  if (r.x.size() != p.num_vars || r.z.size() != p.b.size()) return;
  auto inf = [](const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; };
  // primal: distance of b - Ax from the cone, measured per cone
  const Eigen::VectorXd slack = p.b - p.A * r.x;
  double viol = 0.0;
  int row = 0;
  for (const auto& c : p.cones) {
    switch (c.kind) {
      case ConeKind::Zero:
        viol = std::max(viol, inf(slack.segment(row, c.dim)));
        row += c.dim;
        break;
      case ConeKind::Nonnegative:
        viol = std::max(viol, std::max(0.0, -slack.segment(row, c.dim).minCoeff()));
        row += c.dim;
        break;
      case ConeKind::SecondOrder:
        viol = std::max(viol, std::max(0.0, slack.segment(row + 1, c.dim - 1).norm() - slack[row]));
        row += c.dim;
        break;
      case ConeKind::PSD: {
        const int n = c.dim;
        Eigen::MatrixXd S(n, n);
        int k = row;
        for (int j = 0; j < n; ++j)
          for (int i = 0; i <= j; ++i, ++k) S(i, j) = S(j, i) = (i == j) ? slack[k] : slack[k] / std::sqrt(2.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
        viol = std::max(viol, std::max(0.0, -es.eigenvalues().minCoeff()));
        row = k;
        break;
      }
    }
  }
  r.primal_residual = viol / std::max(1.0, inf(p.b) + inf(r.x));
  const Eigen::VectorXd rd = p.A.transpose() * r.z + p.q;
  r.dual_residual = inf(rd) / std::max(1.0, inf(p.q) + inf(r.z));
}

namespace {

const char* clarabel_status_name(int s) {
  static const char* names[] = {"Unsolved",        "Solved",
                                "PrimalInfeasible", "DualInfeasible",
                                "AlmostSolved",     "AlmostPrimalInfeasible",
                                "AlmostDualInfeasible", "MaxIterations",
                                "MaxTime",          "NumericalError",
                                "InsufficientProgress", "CallbackTerminated"};
  return (s >= 0 && s <= 11) ? names[s] : "Unknown";
}

}  // namespace

SolverReport ClarabelSolver::solve(const StandardForm& p, const SolverOptions& opts) const {
  const size_t n = static_cast<size_t>(p.num_vars);
  const size_t m = static_cast<size_t>(p.b.size());

  std::vector<size_t> p_colptr(n + 1, 0);
  clarabel_capi_csc pmat{n, n, p_colptr.data(), nullptr, nullptr};

  std::vector<size_t> colptr(n + 1), rowval(static_cast<size_t>(p.A.nonZeros()));
  std::vector<double> nzval(p.A.valuePtr(), p.A.valuePtr() + p.A.nonZeros());
  for (size_t j = 0; j <= n; ++j) colptr[j] = static_cast<size_t>(p.A.outerIndexPtr()[j]);
  for (size_t k = 0; k < rowval.size(); ++k) rowval[k] = static_cast<size_t>(p.A.innerIndexPtr()[k]);
  clarabel_capi_csc amat{m, n, colptr.data(), rowval.data(), nzval.data()};

  std::vector<int32_t> types;
  std::vector<size_t> dims;
  for (const auto& c : p.cones) {
    switch (c.kind) {
      case ConeKind::Zero: types.push_back(CLARABEL_CAPI_CONE_ZERO); break;
      case ConeKind::Nonnegative: types.push_back(CLARABEL_CAPI_CONE_NONNEG); break;
      case ConeKind::SecondOrder: types.push_back(CLARABEL_CAPI_CONE_SOC); break;
      case ConeKind::PSD: types.push_back(CLARABEL_CAPI_CONE_PSD_TRIANGLE); break;
    }
    dims.push_back(static_cast<size_t>(c.dim));
  }

  clarabel_capi_settings st{};
  st.max_iter = static_cast<uint32_t>(opts.max_iter);
  st.time_limit = opts.time_limit > 0.0 ? opts.time_limit : INFINITY;
  st.verbose = opts.verbose ? 1 : 0;
  st.tol_gap_abs = opts.tol;
  st.tol_gap_rel = opts.tol;
  st.tol_feas = opts.tol;
  st.use_faer = opts.use_faer ? 1 : 0;
  st.chordal = opts.chordal ? 1 : 0;

  SolverReport r;
  r.backend = name();
  r.x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  r.z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  r.s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  clarabel_capi_result res{};
  const int rc = clarabel_capi_solve(&pmat, p.q.data(), &amat, p.b.data(), types.size(), types.data(),
                                     dims.data(), &st, r.x.data(), r.z.data(), r.s.data(), &res);
  if (rc != 0) {
    throw SolverFailure(rc == -1 ? "clarabel: unsupported cone type"
                                 : "clarabel: solver setup rejected the problem data");
  }
  r.raw_status = clarabel_status_name(res.status);
  r.iterations = static_cast<int>(res.iterations);
  r.solve_time = res.solve_time;
  switch (res.status) {
    case CLARABEL_CAPI_SOLVED: r.status = SolveStatus::Optimal; break;
    case CLARABEL_CAPI_PRIMAL_INFEASIBLE: r.status = SolveStatus::Infeasible; break;
    case CLARABEL_CAPI_DUAL_INFEASIBLE: r.status = SolveStatus::Unbounded; break;
    default: r.status = SolveStatus::NumericalFailure; break;
  }
  r.objective = p.q.dot(r.x) + p.constant;
  compute_residuals(p, r);
  return r;
}

std::unique_ptr<ConicSolver> default_solver() { return std::make_unique<ClarabelSolver>(); }

SolverReport solve(const ConicProgram& program, const SolverOptions& opts, const ConicSolver* backend) {
  const StandardForm sf = program.to_standard_form();
  std::unique_ptr<ConicSolver> owned;
  if (!backend) {
    owned = default_solver();
    backend = owned.get();
  }
  SolverReport r = backend->solve(sf, opts);
  if (r.status == SolveStatus::NumericalFailure && opts.use_faer && opts.retry_qdldl) {
    SolverOptions again = opts;
    again.use_faer = false;
    SolverReport second = backend->solve(sf, again);
    second.solve_time += r.solve_time;
    second.iterations += r.iterations;
    second.raw_status = r.raw_status + " -> " + second.raw_status;
    r = std::move(second);
  }
  if (r.status == SolveStatus::Optimal) r.objective = program.objective_value(r.x);
  return r;
}

}  // namespace agc
