#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <utility>

#include "agc/problem.hpp"
#include "agc/sdp.hpp"

namespace agc {

/// {y : (y - c)' S^-1 (y - c) <= 1}.
struct Ellipsoid {
  Eigen::VectorXd center;
  Eigen::MatrixXd shape;
};

/// (xC - c)' S^-1 (xC - c). Throws DimensionMismatch or SingularShape.
double contract_membership(const Eigen::VectorXd& xC, const Ellipsoid& e);

/// Factorised form for repeated membership evaluations.
class EllipsoidGauge {
 public:
  explicit EllipsoidGauge(const Ellipsoid& e);  // throws SingularShape
  double operator()(const Eigen::VectorXd& y) const;

 private:
  Eigen::VectorXd center_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// Implementable policy u = u_bar + Qw w + Qv (x - v_bar) together with its
/// contract. Without coupling states Qv = 0 and there is no contract.
struct ContractPolicy {
  Eigen::VectorXd u_bar;
  Eigen::VectorXd v_bar;
  Eigen::MatrixXd Qw;
  Eigen::MatrixXd Qv;
  Eigen::MatrixXd Qxi;
  Eigen::MatrixXd Y;
  double lambda = 1.0;
  double beta = 0.0;
  bool has_contract = false;
  Ellipsoid contract;  // over Pi_C x
};

/// Q^v = Q^xi (lambda I - Y)^-1 and the contract set. Off-pattern entries of
/// Q^v below 1e-9 are zeroed; larger ones throw PatternViolation. Throws
/// NotSolved unless the solution is optimal.
ContractPolicy recover_policy(const SdpSolution& solution, const ProblemInstance& instance);

struct SimulationResult {
  Eigen::VectorXd x;
  Eigen::VectorXd u;
  Eigen::VectorXd w;
  double contract_margin = 0.0;      // membership - 1 (0 without contract)
  double constraint_residual = 0.0;  // max_i (Fx x + Fu u + Fw w - g)_i
};

/// Throws CausalityViolation if Qw or Qv has a nonzero block (t, s) with
/// s > t.
void check_policy_causality(const ContractPolicy& policy, const SystemModel& model);

/// Closed loop on the true dynamics, one period at a time.
SimulationResult simulate(const ProblemInstance& instance, const ContractPolicy& policy,
                          const Eigen::VectorXd& w);

/// Surrogate map f(w, vC) = B~ phi(w, vC) + L~ w + H~ vC with
/// phi(w, vC) = u_bar + Qw w + Qv (Pi_C' vC - v_bar).
Eigen::VectorXd surrogate_map(const ProblemInstance& instance, const ContractPolicy& policy,
                              const Eigen::VectorXd& w, const Eigen::VectorXd& vC);

/// Checks that coupling-state prefixes up to t do not depend on vC beyond
/// t - 1, for every t, on `trials` random draws.
bool strict_causality_check(const ContractPolicy& policy, const ProblemInstance& instance,
                            std::mt19937_64& rng, int trials = 100, double tol = 1e-9);

/// || f(w, Pi_C x) - x || for the true closed-loop trajectory x driven by w.
double fixed_point_residual(const ProblemInstance& instance, const ContractPolicy& policy,
                            const Eigen::VectorXd& w);

/// Surrogate closed-loop matrices of a recovered policy.
SurrogateLoop surrogate_loop(const ContractPolicy& policy, const ProblemInstance& instance);

/// Row-wise ||S^1/2 (Fx Pw + Fu Qw + Fw)' e_i|| + ||S^1/2 (Fx Pxi + Fu Qxi)' e_i||
/// - (g - Fx x_bar - Fu u_bar)_i.
Eigen::VectorXd worst_case_margins(const SurrogateLoop& loop, const ConstraintSet& constraints,
                                   const Eigen::MatrixXd& sigma_sqrt);

double expected_cost(const SurrogateLoop& loop, const Eigen::MatrixXd& Mw, const Eigen::MatrixXd& Mxi,
                     const CostSpec& cost);

/// Samplers over {z : z' Sigma^-1 z <= 1} given Sigma^{1/2}.
Eigen::VectorXd sample_interior(const Eigen::MatrixXd& sigma_sqrt, std::mt19937_64& rng);
Eigen::VectorXd sample_boundary(const Eigen::MatrixXd& sigma_sqrt, std::mt19937_64& rng);
/// Interior or boundary with probability 1/2 each.
Eigen::VectorXd sample_mixed(const Eigen::MatrixXd& sigma_sqrt, std::mt19937_64& rng);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int samples = 0;
};

enum class LoopKind { Surrogate, True };

/// Cost x'Rx x + u'Ru u averaged over uniform disturbances. The surrogate
/// loop draws (w, xi) independently; the true loop simulates the policy.
MonteCarloEstimate monte_carlo_cost(const ProblemInstance& instance, const ContractPolicy& policy,
                                    LoopKind kind, int samples, std::uint64_t seed);

struct VerificationReport {
  int samples = 0;
  double max_constraint_residual = 0.0;
  double max_contract_membership = 0.0;  // 0 without contract
  double max_worst_case_margin = 0.0;
  double analytic_cost = 0.0;
  MonteCarloEstimate true_cost;
};

/// Simulates `samples` true-loop runs on mixed interior/boundary draws.
VerificationReport verify_policy(const ProblemInstance& instance, const ContractPolicy& policy,
                                 int samples, std::uint64_t seed);

}  // namespace agc
