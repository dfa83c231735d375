#include "agc/surrogate.hpp"

#include <algorithm>
#include <sstream>

#include "agc/error.hpp"

namespace agc {

namespace {

// A(t) split by row block i into the part acting on x~ (columns outside
// C(i)) and the part acting on v (columns in C(i)).
void split_dynamics(const SystemModel& model, const Decomposition& d, int t,
                    Eigen::MatrixXd& a_state, Eigen::MatrixXd& a_fict) {
  a_state = model.A[t];
  a_fict = Eigen::MatrixXd::Zero(a_state.rows(), a_state.cols());
  for (int i = 0; i < model.num_subsystems(); ++i) {
    for (int j : d.coupling[i]) {
      auto blk = a_state.block(model.state_offset(i), model.state_offset(j), model.nx[i],
                               model.nx[j]);
      a_fict.block(model.state_offset(i), model.state_offset(j), model.nx[i], model.nx[j]) = blk;
      blk.setZero();
    }
  }
}

}  // namespace

SurrogateOperators build_surrogate_operators(const SystemModel& model, const Decomposition& d) {
  validate_system(model);
  if (d.information.size() != model.num_subsystems()) {
    throw DimensionMismatch("decomposition and model disagree on subsystem count");
  }
  const int n = model.state_dim();
  const int m = model.input_dim();
  const int T = model.horizon;
  const int nX = model.state_traj_dim();
  SurrogateOperators ops;
  ops.Btil = Eigen::MatrixXd::Zero(nX, model.input_traj_dim());
  ops.Ltil = Eigen::MatrixXd::Zero(nX, nX);
  ops.Hfull = Eigen::MatrixXd::Zero(nX, nX);
  ops.Ltil.topLeftCorner(n, n).setIdentity();
  Eigen::MatrixXd a_state, a_fict;
  for (int t = 0; t < T; ++t) {
    split_dynamics(model, d, t, a_state, a_fict);
    const auto prev = [&](Eigen::MatrixXd& op, int cols) {
      return Eigen::MatrixXd(a_state * op.middleRows(t * n, n).leftCols(cols));
    };
    ops.Ltil.middleRows((t + 1) * n, n).leftCols((t + 1) * n) = prev(ops.Ltil, (t + 1) * n);
    ops.Ltil.block((t + 1) * n, (t + 1) * n, n, n).setIdentity();
    ops.Hfull.middleRows((t + 1) * n, n).leftCols(t * n) = prev(ops.Hfull, t * n);
    ops.Hfull.block((t + 1) * n, t * n, n, n) = a_fict;
    if (m > 0) {
      ops.Btil.middleRows((t + 1) * n, n).leftCols(t * m) = prev(ops.Btil, t * m);
      ops.Btil.block((t + 1) * n, t * m, n, m) = model.B[t];
    }
  }
  const CouplingProjector pc = coupling_projector(d, model);
  ops.Htil.resize(nX, pc.full.rows());
  for (int r = 0; r < pc.full.rows(); ++r) ops.Htil.col(r) = ops.Hfull.col(pc.full.index[r]);
  return ops;
}

Eigen::VectorXd simulate_surrogate(const SystemModel& model, const Decomposition& d,
                                   const Eigen::VectorXd& u, const Eigen::VectorXd& w,
                                   const Eigen::VectorXd& v_full) {
  const int N = model.num_subsystems();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(model.state_traj_dim());
  for (int i = 0; i < N; ++i) {
    x.segment(model.state_index(0, i, 0), model.nx[i]) =
        w.segment(model.state_index(0, i, 0), model.nx[i]);
  }
  for (int t = 0; t < model.horizon; ++t) {
    for (int i = 0; i < N; ++i) {
      Eigen::VectorXd next = w.segment(model.state_index(t + 1, i, 0), model.nx[i]);
      for (int j = 0; j < N; ++j) {
        const Eigen::VectorXd& src = d.is_coupling(i, j) ? v_full : x;
        next += model.A_block(t, i, j) * src.segment(model.state_index(t, j, 0), model.nx[j]);
        if (model.nu[j] > 0) {
          next += model.B_block(t, i, j) * u.segment(model.input_index(t, j, 0), model.nu[j]);
        }
      }
      x.segment(model.state_index(t + 1, i, 0), model.nx[i]) = next;
    }
  }
  return x;
}

PatternMask::PatternMask(Kind kind, int row_steps, int col_steps, std::vector<int> row_sizes,
                         std::vector<int> col_sizes)
    : kind_(kind),
      row_steps_(row_steps),
      col_steps_(col_steps),
      row_sizes_(std::move(row_sizes)),
      col_sizes_(std::move(col_sizes)) {
  if (row_sizes_.size() != col_sizes_.size()) {
    throw DimensionMismatch("pattern row and column subsystem counts differ");
  }
  const int N = subsystems();
  row_offsets_.assign(N + 1, 0);
  col_offsets_.assign(N + 1, 0);
  for (int i = 0; i < N; ++i) {
    row_offsets_[i + 1] = row_offsets_[i] + row_sizes_[i];
    col_offsets_[i + 1] = col_offsets_[i] + col_sizes_[i];
  }
  rows_ = row_steps_ * row_offsets_[N];
  cols_ = col_steps_ * col_offsets_[N];
  grid_.assign(static_cast<size_t>(row_steps_) * N * col_steps_ * N, 0);
  for (int t = 0; t < row_steps_; ++t)
    for (int i = 0; i < N; ++i)
      for (int k = 0; k < row_sizes_[i]; ++k) row_owner_.emplace_back(t, i);
  for (int s = 0; s < col_steps_; ++s)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < col_sizes_[j]; ++k) col_owner_.emplace_back(s, j);
}

void PatternMask::locate(int r, int c, int& t, int& i, int& s, int& j) const {
  std::tie(t, i) = row_owner_[r];
  std::tie(s, j) = col_owner_[c];
}

bool PatternMask::allows(int r, int c) const {
  int t, i, s, j;
  locate(r, c, t, i, s, j);
  return allows_block(t, i, s, j);
}

std::vector<std::pair<int, int>> PatternMask::free_entries() const {
  std::vector<std::pair<int, int>> out;
  for (int c = 0; c < cols_; ++c)
    for (int r = 0; r < rows_; ++r)
      if (allows(r, c)) out.emplace_back(r, c);
  return out;
}

int PatternMask::free_count() const {
  int count = 0;
  for (int c = 0; c < cols_; ++c)
    for (int r = 0; r < rows_; ++r) count += allows(r, c) ? 1 : 0;
  return count;
}

double PatternMask::max_off_pattern(const Eigen::MatrixXd& m) const {
  if (m.rows() != rows_ || m.cols() != cols_) {
    throw DimensionMismatch("matrix does not match pattern dimensions");
  }
  double worst = 0.0;
  for (int c = 0; c < cols_; ++c)
    for (int r = 0; r < rows_; ++r)
      if (!allows(r, c)) worst = std::max(worst, std::abs(m(r, c)));
  return worst;
}

Eigen::MatrixXd PatternMask::project(const Eigen::MatrixXd& m) const {
  Eigen::MatrixXd out = m;
  for (int c = 0; c < cols_; ++c)
    for (int r = 0; r < rows_; ++r)
      if (!allows(r, c)) out(r, c) = 0.0;
  return out;
}

PatternMask PatternMask::intersect(const PatternMask& other) const {
  if (other.row_steps_ != row_steps_ || other.col_steps_ != col_steps_ ||
      other.row_sizes_ != row_sizes_ || other.col_sizes_ != col_sizes_) {
    throw DimensionMismatch("cannot intersect masks of different geometry");
  }
  PatternMask out = *this;
  for (size_t k = 0; k < grid_.size(); ++k) out.grid_[k] = grid_[k] && other.grid_[k];
  return out;
}

std::string PatternMask::render() const {
  const int N = subsystems();
  std::ostringstream os;
  const char* name = kind_ == Kind::QN ? "Q_N" : kind_ == Kind::QC ? "Q_C" : kind_ == Kind::Y ? "Y" : "mask";
  os << name << ": " << row_steps_ << "x" << col_steps_ << " time blocks, " << N << "x" << N
     << " subsystem blocks each, " << free_count() << " free entries\n";
  for (int t = 0; t < row_steps_; ++t) {
    for (int i = 0; i < N; ++i) {
      for (int s = 0; s < col_steps_; ++s) {
        for (int j = 0; j < N; ++j) os << (allows_block(t, i, s, j) ? '#' : '.');
        os << (s + 1 < col_steps_ ? " " : "");
      }
      os << "\n";
    }
    if (t + 1 < row_steps_) os << "\n";
  }
  return os.str();
}

PatternMask pattern_QN(const Decomposition& d, const SystemModel& model) {
  PatternMask mask(PatternMask::Kind::QN, model.horizon, model.horizon + 1, model.nu, model.nx);
  for (int t = 0; t < model.horizon; ++t)
    for (int s = 0; s <= t; ++s)
      for (int i = 0; i < model.num_subsystems(); ++i)
        for (int j : d.nested[i]) mask.set_block(t, i, s, j, true);
  return mask;
}

PatternMask pattern_QC(const Decomposition& d, const SystemModel& model) {
  PatternMask mask(PatternMask::Kind::QC, model.horizon, model.horizon + 1, model.nu, model.nx);
  for (int t = 0; t < model.horizon; ++t)
    for (int s = 0; s <= t; ++s)
      for (int i = 0; i < model.num_subsystems(); ++i)
        for (int j : d.coupling[i]) mask.set_block(t, i, s, j, true);
  return mask;
}

PatternMask pattern_Y(const DirectedGraph& coupling_graph, const SystemModel& model) {
  const int N = model.num_subsystems();
  if (coupling_graph.size() != N) {
    throw NodeCountMismatch("coupling graph node count does not match the model");
  }
  PatternMask mask(PatternMask::Kind::Y, model.horizon + 1, model.horizon + 1, model.nx,
                   model.nx);
  std::vector<std::vector<int>> out(N);
  for (int i = 0; i < N; ++i) out[i] = coupling_graph.out_neighbors(i);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      if (!std::includes(out[j].begin(), out[j].end(), out[i].begin(), out[i].end())) continue;
      for (int t = 0; t <= model.horizon; ++t)
        for (int s = 0; s < t; ++s) mask.set_block(t, i, s, j, true);
    }
  }
  return mask;
}

bool check_closure(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& Y, const PatternMask& qc,
                   const PatternMask& ymask) {
  if (!qc.conforms(Q)) throw PatternViolation("Q does not conform to the Q_C pattern");
  if (!ymask.conforms(Y)) throw PatternViolation("Y does not conform to the Y pattern");
  const Eigen::MatrixXd QY = Q * Y;
  return qc.conforms(QY, 0.0);
}

Eigen::MatrixXd right_solve_contract_transform(const Eigen::MatrixXd& Q, double lambda,
                                               const Eigen::MatrixXd& Y, int step_dim) {
  if (Y.rows() != Y.cols() || Q.cols() != Y.rows() || step_dim <= 0 ||
      Y.rows() % step_dim != 0) {
    throw DimensionMismatch("right_solve_contract_transform: incompatible dimensions");
  }
  if (!(lambda > 0.0)) throw Error("contract scale lambda must be positive");
  const int steps = static_cast<int>(Y.rows()) / step_dim;
  for (int r = 0; r < steps; ++r) {
    for (int s = r; s < steps; ++s) {
      if (Y.block(r * step_dim, s * step_dim, step_dim, step_dim).cwiseAbs().maxCoeff() != 0.0) {
        throw PatternViolation("Y is not strictly block lower triangular in time");
      }
    }
  }
  Eigen::MatrixXd X(Q.rows(), Q.cols());
  // X (lambda I - Y) = Q  =>  X_s = (Q_s + sum_{r > s} X_r Y(r, s)) / lambda
  for (int s = steps - 1; s >= 0; --s) {
    Eigen::MatrixXd acc = Q.middleCols(s * step_dim, step_dim);
    for (int r = s + 1; r < steps; ++r) {
      acc.noalias() += X.middleCols(r * step_dim, step_dim) *
                       Y.block(r * step_dim, s * step_dim, step_dim, step_dim);
    }
    X.middleCols(s * step_dim, step_dim) = acc / lambda;
  }
  return X;
}

}  // namespace agc
