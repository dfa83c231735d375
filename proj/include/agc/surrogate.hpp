#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "agc/infograph.hpp"
#include "agc/model.hpp"

namespace agc {

/// Trajectory form of the surrogate dynamics
///   x~ = Btil u~ + Ltil w + Htil v_C,
/// where row block i substitutes the fictitious value v_j(t) for x~_j(t)
/// exactly for j in C(i).
struct SurrogateOperators {
  Eigen::MatrixXd Btil;  // N_x x N_u
  Eigen::MatrixXd Ltil;  // N_x x N_x
  Eigen::MatrixXd Htil;  // N_x x N_x^C
  /// Htil acting on the full fictitious trajectory v in R^{N_x};
  /// Htil = Hfull * Pi_C'.
  Eigen::MatrixXd Hfull;
};

SurrogateOperators build_surrogate_operators(const SystemModel& model, const Decomposition& d);

/// Evaluates the surrogate state equation step by step (test oracle and
/// reference for the stacked operators). `v_full` has length N_x; only
/// coordinates of subsystems in C(i) feed row i.
Eigen::VectorXd simulate_surrogate(const SystemModel& model, const Decomposition& d,
                                   const Eigen::VectorXd& u, const Eigen::VectorXd& w,
                                   const Eigen::VectorXd& v_full);

/// Boolean mask over a grid of (time, subsystem) blocks. Row block
/// t * N + i has height row_sizes[i]; column block s * N + j has width
/// col_sizes[j].
class PatternMask {
 public:
  enum class Kind { QN, QC, Y, Custom };

  PatternMask() = default;
  PatternMask(Kind kind, int row_steps, int col_steps, std::vector<int> row_sizes,
              std::vector<int> col_sizes);

  Kind kind() const { return kind_; }
  int row_steps() const { return row_steps_; }
  int col_steps() const { return col_steps_; }
  int subsystems() const { return static_cast<int>(row_sizes_.size()); }
  int rows() const { return rows_; }
  int cols() const { return cols_; }

  bool allows_block(int t, int i, int s, int j) const {
    return grid_[block_id(t, i, s, j)] != 0;
  }
  void set_block(int t, int i, int s, int j, bool allowed) {
    grid_[block_id(t, i, s, j)] = allowed ? 1 : 0;
  }
  bool allows(int r, int c) const;

  /// Free scalar entries in column-major order.
  std::vector<std::pair<int, int>> free_entries() const;
  int free_count() const;

  /// Largest |entry| outside the mask (0 if the mask is respected exactly).
  double max_off_pattern(const Eigen::MatrixXd& m) const;
  bool conforms(const Eigen::MatrixXd& m, double tol = 0.0) const {
    return m.rows() == rows_ && m.cols() == cols_ && max_off_pattern(m) <= tol;
  }
  Eigen::MatrixXd project(const Eigen::MatrixXd& m) const;

  /// Element-wise AND with another mask of identical geometry.
  PatternMask intersect(const PatternMask& other) const;

  /// Text art: one character cell per (t, s) block pair, showing the
  /// allowed (i, j) sub-blocks as a small N x N glyph matrix.
  std::string render() const;

 private:
  size_t block_id(int t, int i, int s, int j) const {
    const int N = subsystems();
    return (static_cast<size_t>(t) * N + i) * (static_cast<size_t>(col_steps_) * N) +
           static_cast<size_t>(s) * N + j;
  }
  void locate(int r, int c, int& t, int& i, int& s, int& j) const;

  Kind kind_ = Kind::Custom;
  int row_steps_ = 0;
  int col_steps_ = 0;
  std::vector<int> row_sizes_;
  std::vector<int> col_sizes_;
  std::vector<int> row_offsets_;
  std::vector<int> col_offsets_;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<char> grid_;
  // per scalar row/col: owning (step, subsystem)
  std::vector<std::pair<int, int>> row_owner_;
  std::vector<std::pair<int, int>> col_owner_;
};

/// Q^w pattern: T x (T+1) blocks, (i, j) allowed iff j in N(i) and t >= s.
PatternMask pattern_QN(const Decomposition& d, const SystemModel& model);
/// Q^v / Q^xi pattern: as pattern_QN with C(i) in place of N(i).
PatternMask pattern_QC(const Decomposition& d, const SystemModel& model);
/// Y pattern: (T+1) x (T+1) blocks, allowed iff t > s and
/// V_C^+(i) is a subset of V_C^+(j) in the coupling graph.
PatternMask pattern_Y(const DirectedGraph& coupling_graph, const SystemModel& model);

/// Returns whether Q * Y conforms exactly to `qc`. Throws PatternViolation
/// if Q or Y does not conform to its own mask.
bool check_closure(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& Y, const PatternMask& qc,
                   const PatternMask& ymask);

/// Q (lambda I - Y)^{-1} for Y strictly block lower triangular in time, by
/// block substitution over the time steps (no general inverse).
Eigen::MatrixXd right_solve_contract_transform(const Eigen::MatrixXd& Q, double lambda,
                                               const Eigen::MatrixXd& Y, int step_dim);

}  // namespace agc
