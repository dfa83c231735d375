#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "agc/affine.hpp"
#include "agc/surrogate.hpp"

namespace agc {

/// A named decision block. index[c * rows + r] is the scalar variable of
/// entry (r, c), or -1 for an entry fixed to zero by the block's mask.
struct VariableBlock {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::vector<int> index;

  int free_count() const;
};

enum class ConeKind { Zero, Nonnegative, SecondOrder, PSD };

/// Constraint on an affine expression:
///   Zero:        vec(expr) = 0
///   Nonnegative: vec(expr) >= 0
///   SecondOrder: expr is a column (t; v) with ||v||_2 <= t
///   PSD:         expr is square, symmetric, positive semidefinite
struct ConeConstraint {
  ConeKind kind;
  AffineMatrix expr;
  std::string label;
};

/// Cone-partitioned standard form: minimize q'x + constant subject to
/// A x + s = b with s in the product of `cones`. PSD cones use the
/// column-major upper triangle with off-diagonal entries scaled by sqrt(2).
struct StandardForm {
  struct Cone {
    ConeKind kind;
    int dim;  // vector length; matrix side for PSD
  };
  int num_vars = 0;
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;
  Eigen::VectorXd q;
  double constant = 0.0;
  std::vector<Cone> cones;
};

/// Registry of masked matrix variables plus conic constraints and an
/// objective made of linear terms and squared Frobenius norms of affine
/// expressions (each passed to the solver through an epigraph cone).
class ConicProgram {
 public:
  AffineMatrix add_variable(const std::string& name, int rows, int cols);
  /// `free` is column-major; false entries are fixed at zero.
  AffineMatrix add_variable(const std::string& name, int rows, int cols,
                            const std::vector<char>& free);
  AffineMatrix add_variable(const std::string& name, const PatternMask& mask);
  AffineMatrix add_scalar(const std::string& name) { return add_variable(name, 1, 1); }

  bool has_variable(const std::string& name) const { return blocks_.count(name) != 0; }
  const VariableBlock& variable(const std::string& name) const;
  /// Current expression of a registered block.
  AffineMatrix expression(const std::string& name) const;
  std::vector<std::string> variable_names() const;  // registration order
  int num_scalars() const { return num_scalars_; }

  void add_equality(const AffineMatrix& expr, const std::string& label);
  void add_nonnegative(const AffineMatrix& expr, const std::string& label);
  /// ||v||_2 <= t for a 1x1 expression t and a column or row expression v.
  void add_soc(const AffineMatrix& t, const AffineMatrix& v, const std::string& label);
  /// Throws DimensionMismatch if expr is not square and Error if its
  /// coefficients are not symmetric.
  void add_psd(const AffineMatrix& expr, const std::string& label);

  void add_linear_objective(const AffineMatrix& term);
  /// Adds ||vec(e)||^2 to the objective through an epigraph variable tau
  /// with ||(2 vec(e), tau - 1)|| <= tau + 1.
  void add_squared_norm_objective(const AffineMatrix& e, const std::string& label);

  const std::vector<ConeConstraint>& constraints() const { return constraints_; }
  int count(ConeKind kind) const;
  std::vector<int> psd_sizes() const;

  /// Objective with the squared norms evaluated directly (not via tau).
  double objective_value(const Eigen::VectorXd& x) const;
  /// Objective through the epigraph variables, as seen by the solver.
  double epigraph_objective_value(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd value(const std::string& name, const Eigen::VectorXd& x) const;

  StandardForm to_standard_form() const;

 private:
  AffineMatrix register_block(VariableBlock block);
  AffineMatrix widen(const AffineMatrix& e) const { return e.widened(num_scalars_); }

  std::map<std::string, VariableBlock> blocks_;
  std::vector<std::string> order_;
  int num_scalars_ = 0;
  std::vector<ConeConstraint> constraints_;
  AffineMatrix linear_objective_ = AffineMatrix::constant(Eigen::MatrixXd::Zero(1, 1));
  std::vector<AffineMatrix> squared_terms_;
  std::vector<int> epigraph_vars_;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

const char* to_string(SolveStatus s);

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 200;
  double time_limit = 0.0;  // seconds, 0 = unlimited
  bool verbose = false;
  bool use_faer = true;  // sparse LDL backend: faer, or qdldl when false
  bool chordal = true;   // backend-side chordal decomposition of PSD cones
  /// Re-solve with qdldl when the faer run ends without a verdict.
  bool retry_qdldl = true;

  /// Defaults, with `tol` taken from AGC_SOLVER_TOL when it is set.
  static SolverOptions from_env();
};

struct SolverReport {
  SolveStatus status = SolveStatus::NumericalFailure;
  std::string raw_status;  // backend wording
  double objective = 0.0;  // primal objective incl. constant
  Eigen::VectorXd x;
  Eigen::VectorXd s;
  Eigen::VectorXd z;
  int iterations = 0;
  double solve_time = 0.0;
  /// Largest cone violation of b - Ax (entry, negative part, SOC excess or
  /// negative eigenvalue) over max(1, ||b||_inf + ||x||_inf).
  double primal_residual = 0.0;
  /// ||A'z + q||_inf / max(1, ||q||_inf + ||z||_inf)
  double dual_residual = 0.0;
  std::string backend;
};

/// Solver port: standard form in, report out.
class ConicSolver {
 public:
  virtual ~ConicSolver() = default;
  virtual std::string name() const = 0;
  /// Throws SolverFailure when the backend rejects the data.
  virtual SolverReport solve(const StandardForm& problem, const SolverOptions& opts) const = 0;
};

/// Interior-point backend (Clarabel) with native PSD cone support.
class ClarabelSolver final : public ConicSolver {
 public:
  std::string name() const override { return "clarabel"; }
  SolverReport solve(const StandardForm& problem, const SolverOptions& opts) const override;
};

std::unique_ptr<ConicSolver> default_solver();

/// Solves with the given backend (Clarabel when null). The report's
/// objective is recomputed from the program at the returned point. A faer run
/// that ends in numerical failure is repeated with qdldl (opts.retry_qdldl).
SolverReport solve(const ConicProgram& program, const SolverOptions& opts = SolverOptions::from_env(),
                   const ConicSolver* backend = nullptr);

/// Fills in primal_residual / dual_residual for a standard-form point.
void compute_residuals(const StandardForm& problem, SolverReport& report);

}  // namespace agc
