#pragma once

#include <Eigen/Dense>
#include <vector>

namespace agc {

/// Networked linear time-varying system
///   x_i(t+1) = sum_j A_ij(t) x_j(t) + B_ij(t) u_j(t) + w_i(t).
///
/// A[t] and B[t] are full-system matrices; their block boundaries are given
/// by nx (rows, and columns of A) and nu (columns of B). Subsystems are
/// indexed 0..N-1 internally.
struct SystemModel {
  std::vector<int> nx;
  std::vector<int> nu;
  int horizon = 0;
  std::vector<Eigen::MatrixXd> A;
  std::vector<Eigen::MatrixXd> B;

  int num_subsystems() const { return static_cast<int>(nx.size()); }
  int state_dim() const;  // n_x
  int input_dim() const;  // n_u
  /// Length of the stacked state (and disturbance) trajectory, n_x (T+1).
  int state_traj_dim() const { return state_dim() * (horizon + 1); }
  /// Length of the stacked input trajectory, n_u T.
  int input_traj_dim() const { return input_dim() * horizon; }

  int state_offset(int i) const;
  int input_offset(int i) const;

  /// Index of local state coordinate k of subsystem i at time t inside the
  /// stacked trajectory (x(0), ..., x(T)). The disturbance trajectory
  /// (w(-1), ..., w(T-1)) uses the same layout, with block t holding w(t-1).
  int state_index(int t, int i, int k) const { return t * state_dim() + state_offset(i) + k; }
  int input_index(int t, int i, int k) const { return t * input_dim() + input_offset(i) + k; }

  Eigen::MatrixXd A_block(int t, int i, int j) const;
  Eigen::MatrixXd B_block(int t, int i, int j) const;
};

/// Throws DimensionMismatch or EmptyHorizon when the model is malformed.
void validate_system(const SystemModel& model);

/// Stacked trajectory maps x = B u + L w, with w = (x(0), w(0), ..., w(T-1)).
struct TrajectoryOperators {
  Eigen::MatrixXd B;  // N_x x N_u
  Eigen::MatrixXd L;  // N_x x N_x
};

TrajectoryOperators build_trajectory_operators(const SystemModel& model);

/// Time-steps the true dynamics. `u` has length N_u, `w` length N_x.
Eigen::VectorXd simulate_open_loop(const SystemModel& model, const Eigen::VectorXd& u,
                                   const Eigen::VectorXd& w);

/// Ellipsoidal support {z : z' Sigma^-1 z <= 1} of the disturbance trajectory
/// together with its second moment matrix.
struct EllipsoidalUncertainty {
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd second_moment;

  /// Uniform distribution over the ellipsoid; M = Sigma / (n + 2).
  static EllipsoidalUncertainty uniform(const Eigen::MatrixXd& sigma);
};

/// Throws NotPositiveDefinite unless Sigma is symmetric and its smallest
/// eigenvalue is at least 1e-9 ||Sigma||_2.
void check_positive_definite(const Eigen::MatrixXd& sigma);

/// Second moment of the uniform distribution on {z : z' Sigma^-1 z <= 1}.
Eigen::MatrixXd second_moment_uniform(const Eigen::MatrixXd& sigma);

/// Polyhedral trajectory constraints F_x x + F_u u + F_w w <= g.
struct ConstraintSet {
  Eigen::MatrixXd Fx;
  Eigen::MatrixXd Fu;
  Eigen::MatrixXd Fw;
  Eigen::VectorXd g;

  int rows() const { return static_cast<int>(g.size()); }
  void validate(int state_traj_dim, int input_traj_dim) const;

  /// ||x||_inf <= x_max and ||u||_inf <= u_max, one row per coordinate and
  /// sign (state rows first, +x before -x), with F_w = 0.
  static ConstraintSet box(const SystemModel& model, double x_max, double u_max);
};

/// Quadratic cost E[x' Rx x + u' Ru u].
struct CostSpec {
  Eigen::MatrixXd Rx;
  Eigen::MatrixXd Ru;

  void validate(int state_traj_dim, int input_traj_dim) const;

  /// Rx = I_{T+1} kron diag(state_weights), Ru = I_T kron diag(input_weights).
  static CostSpec per_period(const SystemModel& model, const Eigen::VectorXd& state_weights,
                             const Eigen::VectorXd& input_weights);
};

/// Symmetric PSD square root by eigendecomposition; eigenvalues below
/// `floor` are clamped to zero.
Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& m, double floor = 1e-12);

}  // namespace agc
