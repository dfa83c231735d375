#include "agc/model.hpp"

#include <numeric>
#include <sstream>

#include "agc/error.hpp"

namespace agc {

int SystemModel::state_dim() const { return std::accumulate(nx.begin(), nx.end(), 0); }

int SystemModel::input_dim() const { return std::accumulate(nu.begin(), nu.end(), 0); }

int SystemModel::state_offset(int i) const {
  return std::accumulate(nx.begin(), nx.begin() + i, 0);
}

int SystemModel::input_offset(int i) const {
  return std::accumulate(nu.begin(), nu.begin() + i, 0);
}

Eigen::MatrixXd SystemModel::A_block(int t, int i, int j) const {
  return A[t].block(state_offset(i), state_offset(j), nx[i], nx[j]);
}

Eigen::MatrixXd SystemModel::B_block(int t, int i, int j) const {
  return B[t].block(state_offset(i), input_offset(j), nx[i], nu[j]);
}

void validate_system(const SystemModel& model) {
  if (model.horizon < 1) throw EmptyHorizon("horizon must be at least 1");
  if (model.nx.empty()) throw DimensionMismatch("system has no subsystems");
  if (model.nu.size() != model.nx.size()) {
    throw DimensionMismatch("nx and nu list different subsystem counts");
  }
  for (int i = 0; i < model.num_subsystems(); ++i) {
    if (model.nx[i] < 1) {
      throw DimensionMismatch("subsystem " + std::to_string(i + 1) + " has nx < 1");
    }
    if (model.nu[i] < 0) {
      throw DimensionMismatch("subsystem " + std::to_string(i + 1) + " has nu < 0");
    }
  }
  const auto T = static_cast<size_t>(model.horizon);
  if (model.A.size() != T || model.B.size() != T) {
    std::ostringstream os;
    os << "expected " << T << " A and B matrices, got " << model.A.size() << " and "
       << model.B.size();
    throw DimensionMismatch(os.str());
  }
  const int n = model.state_dim();
  const int m = model.input_dim();
  for (size_t t = 0; t < T; ++t) {
    if (model.A[t].rows() != n || model.A[t].cols() != n) {
      std::ostringstream os;
      os << "A[" << t << "] is " << model.A[t].rows() << "x" << model.A[t].cols()
         << ", block layout requires " << n << "x" << n;
      throw DimensionMismatch(os.str());
    }
    if (model.B[t].rows() != n || model.B[t].cols() != m) {
      std::ostringstream os;
      os << "B[" << t << "] is " << model.B[t].rows() << "x" << model.B[t].cols()
         << ", block layout requires " << n << "x" << m;
      throw DimensionMismatch(os.str());
    }
  }
}

TrajectoryOperators build_trajectory_operators(const SystemModel& model) {
  validate_system(model);
  const int n = model.state_dim();
  const int m = model.input_dim();
  const int T = model.horizon;
  TrajectoryOperators ops;
  ops.B = Eigen::MatrixXd::Zero(n * (T + 1), m * T);
  ops.L = Eigen::MatrixXd::Zero(n * (T + 1), n * (T + 1));
  ops.L.topLeftCorner(n, n).setIdentity();
  // Row block t+1 = A(t) * row block t, plus B(t) against u(t) and identity
  // against w(t) (block column t+1).
  for (int t = 0; t < T; ++t) {
    ops.L.middleRows((t + 1) * n, n).leftCols((t + 1) * n) =
        model.A[t] * ops.L.middleRows(t * n, n).leftCols((t + 1) * n);
    ops.L.block((t + 1) * n, (t + 1) * n, n, n).setIdentity();
    if (m > 0) {
      ops.B.middleRows((t + 1) * n, n).leftCols(t * m) =
          model.A[t] * ops.B.middleRows(t * n, n).leftCols(t * m);
      ops.B.block((t + 1) * n, t * m, n, m) = model.B[t];
    }
  }
  return ops;
}

Eigen::VectorXd simulate_open_loop(const SystemModel& model, const Eigen::VectorXd& u,
                                   const Eigen::VectorXd& w) {
  const int n = model.state_dim();
  const int m = model.input_dim();
  if (u.size() != model.input_traj_dim() || w.size() != model.state_traj_dim()) {
    throw DimensionMismatch("simulate_open_loop: trajectory length mismatch");
  }
  Eigen::VectorXd x(model.state_traj_dim());
  x.head(n) = w.head(n);
  for (int t = 0; t < model.horizon; ++t) {
    x.segment((t + 1) * n, n) = model.A[t] * x.segment(t * n, n) + w.segment((t + 1) * n, n);
    if (m > 0) x.segment((t + 1) * n, n) += model.B[t] * u.segment(t * m, m);
  }
  return x;
}

void check_positive_definite(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0) {
    throw NotPositiveDefinite("shape matrix must be square and nonempty");
  }
  const double asym = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(1.0, sigma.cwiseAbs().maxCoeff())) {
    throw NotPositiveDefinite("shape matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (!(lo >= 1e-9 * hi) || hi == 0.0) {
    std::ostringstream os;
    os << "smallest eigenvalue " << lo << " below 1e-9 * ||Sigma||_2 = " << 1e-9 * hi;
    throw NotPositiveDefinite(os.str());
  }
}

Eigen::MatrixXd second_moment_uniform(const Eigen::MatrixXd& sigma) {
  check_positive_definite(sigma);
  return sigma / static_cast<double>(sigma.rows() + 2);
}

EllipsoidalUncertainty EllipsoidalUncertainty::uniform(const Eigen::MatrixXd& sigma) {
  return {sigma, second_moment_uniform(sigma)};
}

void ConstraintSet::validate(int state_traj_dim, int input_traj_dim) const {
  const auto m = g.size();
  if (Fx.rows() != m || Fu.rows() != m || Fw.rows() != m) {
    throw DimensionMismatch("constraint row counts disagree across Fx, Fu, Fw, g");
  }
  if (Fx.cols() != state_traj_dim || Fw.cols() != state_traj_dim ||
      Fu.cols() != input_traj_dim) {
    throw DimensionMismatch("constraint column counts do not match trajectory dimensions");
  }
}

ConstraintSet ConstraintSet::box(const SystemModel& model, double x_max, double u_max) {
  const int nX = model.state_traj_dim();
  const int nU = model.input_traj_dim();
  const int m = 2 * nX + 2 * nU;
  ConstraintSet c;
  c.Fx = Eigen::MatrixXd::Zero(m, nX);
  c.Fu = Eigen::MatrixXd::Zero(m, nU);
  c.Fw = Eigen::MatrixXd::Zero(m, nX);
  c.g.resize(m);
  c.Fx.topRows(nX).setIdentity();
  c.Fx.middleRows(nX, nX) = -Eigen::MatrixXd::Identity(nX, nX);
  c.Fu.middleRows(2 * nX, nU).setIdentity();
  c.Fu.bottomRows(nU) = -Eigen::MatrixXd::Identity(nU, nU);
  c.g.head(2 * nX).setConstant(x_max);
  c.g.tail(2 * nU).setConstant(u_max);
  return c;
}

namespace {

void check_cost_matrix(const Eigen::MatrixXd& r, int dim, const char* name) {
  if (r.rows() != dim || r.cols() != dim) {
    throw DimensionMismatch(std::string(name) + " has wrong dimensions");
  }
  if (dim == 0) return;
  if ((r - r.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw NotPositiveDefinite(std::string(name) + " is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-9) {
    throw NotPositiveDefinite(std::string(name) + " is not positive semidefinite");
  }
}

}  // namespace

void CostSpec::validate(int state_traj_dim, int input_traj_dim) const {
  check_cost_matrix(Rx, state_traj_dim, "Rx");
  check_cost_matrix(Ru, input_traj_dim, "Ru");
}

CostSpec CostSpec::per_period(const SystemModel& model, const Eigen::VectorXd& state_weights,
                              const Eigen::VectorXd& input_weights) {
  const int n = model.state_dim();
  const int m = model.input_dim();
  if (state_weights.size() != n || input_weights.size() != m) {
    throw DimensionMismatch("per-period weights do not match n_x / n_u");
  }
  CostSpec c;
  c.Rx = Eigen::MatrixXd::Zero(model.state_traj_dim(), model.state_traj_dim());
  c.Ru = Eigen::MatrixXd::Zero(model.input_traj_dim(), model.input_traj_dim());
  for (int t = 0; t <= model.horizon; ++t) {
    c.Rx.block(t * n, t * n, n, n) = state_weights.asDiagonal();
  }
  for (int t = 0; t < model.horizon; ++t) {
    c.Ru.block(t * m, t * m, m, m) = input_weights.asDiagonal();
  }
  return c;
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& m, double floor) {
  if (m.size() == 0) return m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()));
  Eigen::VectorXd d = eig.eigenvalues();
  for (auto& v : d) v = v > floor ? std::sqrt(v) : 0.0;
  return eig.eigenvectors() * d.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace agc
