#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "agc/model.hpp"

namespace agc {

/// Directed graph on nodes 0..n-1. An edge (j, i) from j to i; in an
/// information graph it means subsystem i observes subsystem j's state.
/// File formats and printed output use 1-based node labels.
class DirectedGraph {
 public:
  DirectedGraph() = default;
  explicit DirectedGraph(int n);
  /// Throws Error on out-of-range nodes or duplicate edges.
  DirectedGraph(int n, const std::vector<std::pair<int, int>>& edges);

  int size() const { return n_; }
  bool has_edge(int from, int to) const { return adj_[from * n_ + to] != 0; }
  /// Inserts (from, to); returns false if it was already present.
  bool add_edge(int from, int to);
  std::vector<std::pair<int, int>> edges() const;  // sorted (from, to)
  std::vector<int> in_neighbors(int i) const;      // ascending
  std::vector<int> out_neighbors(int i) const;     // ascending

 private:
  int n_ = 0;
  std::vector<char> adj_;
};

/// Physical coupling graphs: E_A has (j, i) iff some block A_ij(t) has an
/// entry with magnitude above tol; E_B likewise from B_ij(t).
struct PhysicalGraphs {
  DirectedGraph A;
  DirectedGraph B;
};

PhysicalGraphs physical_graphs(const SystemModel& model, double tol = 1e-12);

/// Row-selection map from R^domain_dim: row r picks coordinate index[r].
struct Selection {
  int domain_dim = 0;
  std::vector<int> index;

  int rows() const { return static_cast<int>(index.size()); }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd matrix() const;
};

/// Information decomposition V_I^-(i) = N(i) u C(i).
struct Decomposition {
  DirectedGraph information;
  PhysicalGraphs physical;
  std::vector<std::vector<int>> nested;    // N(i), ascending
  std::vector<std::vector<int>> coupling;  // C(i), ascending
  std::vector<int> coupling_union;         // C, ascending
  DirectedGraph coupling_graph;            // G_C

  bool is_nested(int i, int j) const;
  bool is_coupling(int i, int j) const;
};

/// Throws NodeCountMismatch when the graphs disagree on node count.
Decomposition decompose(const DirectedGraph& information, const PhysicalGraphs& physical);

/// Partially nested iff no information-coupling states exist.
bool is_partially_nested(const Decomposition& d);

/// Pi_C and its time prefixes Pi_C^{0:t}, t = 0..T. Rows are ordered by
/// time, then subsystem in C, then local coordinate.
struct CouplingProjector {
  Selection full;
  std::vector<Selection> prefix;
  int step_dim = 0;  // n_x^C
};

CouplingProjector coupling_projector(const Decomposition& d, const SystemModel& model);

/// x_j(t+1) - sum_k A_jk(t) x_k(t) - sum_k B_jk(t) u_k(t) over the physical
/// in-neighbours of j. Subsystem i can evaluate it from its own information
/// whenever j is in N(i); throws NotNested otherwise.
Eigen::VectorXd reconstruct_nested_disturbance(const Decomposition& d, const SystemModel& model,
                                               const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                               int i, int j, int t);

/// Decomposition table (one row per subsystem) for the `analyze` command.
std::string describe_decomposition(const Decomposition& d);

/// Graphviz rendering; coupling edges are drawn dashed.
std::string to_dot(const Decomposition& d);

}  // namespace agc
