#pragma once

#include <Eigen/Dense>
#include <vector>

#include "agc/affine.hpp"
#include "agc/conic.hpp"
#include "agc/problem.hpp"

namespace agc {

/// Closed-loop surrogate quantities as affine expressions:
///   x~ = x_bar + Pw w + Pxi xi,  u~ = u_bar + Qw w + Qxi xi.
/// Pxi and Qxi are empty (0 x 0) when there are no coupling states.
struct PolicyExpressions {
  AffineMatrix x_bar;
  AffineMatrix u_bar;
  AffineMatrix Pw;
  AffineMatrix Qw;
  AffineMatrix Pxi;
  AffineMatrix Qxi;

  bool has_xi() const { return Pxi.rows() > 0; }
};

/// One robust constraint row: ||w_term|| + ||xi_term|| <= rhs, where the
/// terms are Sigma^{1/2} (Fx P + Fu Q + Fw)' e_i. An empty xi_term means the
/// row has no xi dependence.
struct RobustRow {
  AffineMatrix w_term;
  AffineMatrix xi_term;
  AffineMatrix rhs;
};

std::vector<RobustRow> assemble_soc_rows(const PolicyExpressions& e, const ConstraintSet& cons,
                                         const Eigen::MatrixXd& sigma_sqrt);

/// Emits each row as two epigraph SOCs plus the linear bound on their sum.
void add_robust_rows(ConicProgram& program, const std::vector<RobustRow>& rows);

/// Evaluates row-wise ||w_term|| + ||xi_term|| - rhs at x.
Eigen::VectorXd robust_row_margins(const std::vector<RobustRow>& rows, const Eigen::VectorXd& x);

struct ContractLmi {
  AffineMatrix equality;  // Pi_C (x_bar - v_bar) = 0
  AffineMatrix lmi;       // (N_x^C + 2 N_x) square, PSD
};

/// Throws EmptyCouplingSet when Pi_C has no rows.
ContractLmi assemble_contract_lmi(const AffineMatrix& Pw, const AffineMatrix& Pxi,
                                  const AffineMatrix& x_bar, const AffineMatrix& v_bar,
                                  const AffineMatrix& lambda, const AffineMatrix& beta,
                                  const AffineMatrix& Y, const Eigen::MatrixXd& sigma,
                                  const Selection& pi_c);

/// Whether a^-1 L1 S L1' + (1-a)^-1 L2 S L2' <= L3 S L3' (smallest
/// eigenvalue of the difference >= -tol). alpha must lie in (0, 1); the
/// endpoints are accepted only when the matching summand (L2 for alpha = 1,
/// L1 for alpha = 0) is zero. Throws AlphaOutOfRange otherwise.
bool ellipsoid_containment_holds(const Eigen::MatrixXd& L1, const Eigen::MatrixXd& L2,
                                 const Eigen::MatrixXd& L3, const Eigen::MatrixXd& sigma,
                                 double alpha, double tol = 1e-9);

/// Smallest eigenvalue of L3 S L3' - a^-1 L1 S L1' - (1-a)^-1 L2 S L2'.
double containment_min_eigenvalue(const Eigen::MatrixXd& L1, const Eigen::MatrixXd& L2,
                                  const Eigen::MatrixXd& L3, const Eigen::MatrixXd& sigma,
                                  double alpha);

namespace var {
inline constexpr const char* Qw = "Qw";
inline constexpr const char* Qxi = "Qxi";
inline constexpr const char* Y = "Y";
inline constexpr const char* u_bar = "u_bar";
inline constexpr const char* v_bar = "v_bar";
inline constexpr const char* x_bar = "x_bar";
inline constexpr const char* Pw = "Pw";
inline constexpr const char* Pxi = "Pxi";
inline constexpr const char* lambda = "lambda";
inline constexpr const char* beta = "beta";
inline constexpr const char* soc_w = "soc_w";
inline constexpr const char* soc_xi = "soc_xi";
}  // namespace var

/// Contract parameters held fixed in the restricted program.
struct FixedContract {
  double lambda = 1.0;
  Eigen::MatrixXd Y;      // N_x x N_x
  Eigen::VectorXd v_bar;  // N_x
};

/// The joint policy/contract program. With no coupling states it reduces to
/// an SOC program in (u_bar, Qw, x_bar, Pw).
ConicProgram assemble_program(const ProblemInstance& instance);

/// Same program with (lambda, Y, v_bar) held constant. Throws
/// PatternViolation if Y leaves its mask or v_bar is nonzero outside the
/// coupling coordinates, and Error if lambda < 1.
ConicProgram assemble_fixed_contract_program(const ProblemInstance& instance,
                                             const FixedContract& fixed);

/// Mask of Y entries that enter the program: the Y pattern restricted to
/// rows of coupling subsystems.
PatternMask effective_y_mask(const ProblemInstance& instance);

/// Structural support of B~ Q + L~ for Q in mask q (column-major flags).
std::vector<char> product_support(const Eigen::MatrixXd& left, const PatternMask& q,
                                  const Eigen::MatrixXd& offset);

/// Numerical values of a solved (or fixed-contract) program.
struct SdpSolution {
  SolverReport report;
  bool has_contract = false;
  Eigen::VectorXd u_bar, v_bar, x_bar;
  Eigen::MatrixXd Qw, Qxi, Y, Pw, Pxi;
  double lambda = 1.0;
  double beta = 0.0;
  double objective = 0.0;

  bool optimal() const { return report.status == SolveStatus::Optimal; }
};

/// Reads the variable blocks back. Blocks absent from the program are taken
/// from `fixed` when given, and zero (lambda = 1) otherwise.
SdpSolution extract_solution(const ConicProgram& program, const ProblemInstance& instance,
                             const SolverReport& report, const FixedContract* fixed = nullptr);

SdpSolution synthesize(const ProblemInstance& instance,
                       const SolverOptions& opts = SolverOptions::from_env(),
                       const ConicSolver* backend = nullptr);

SdpSolution synthesize_fixed(const ProblemInstance& instance, const FixedContract& fixed,
                             const SolverOptions& opts = SolverOptions::from_env(),
                             const ConicSolver* backend = nullptr);

/// Closed-loop surrogate matrices from numerical values.
struct SurrogateLoop {
  Eigen::VectorXd x_bar;
  Eigen::VectorXd u_bar;
  Eigen::MatrixXd Pw, Qw, Pxi, Qxi;
};
SurrogateLoop surrogate_loop(const SdpSolution& s);

/// Objective value recomputed from the numerical solution.
double analytic_objective(const SurrogateLoop& loop, const CostSpec& cost, const Eigen::MatrixXd& Mw,
                          const Eigen::MatrixXd& Mxi);

/// Smallest eigenvalue of Pi (lI-Y) S (lI-Y)' Pi' - b^-1 Pi Pw S Pw' Pi'
/// - (l-b)^-1 Pi Pxi S Pxi' Pi' at the solution (alpha = b / l), i.e. the
/// quadratic containment inequality the contract LMI is meant to imply.
double contract_schur_margin(const SdpSolution& s, const ProblemInstance& instance);

}  // namespace agc
