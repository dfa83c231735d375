#include "agc/infograph.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "agc/error.hpp"

namespace agc {

DirectedGraph::DirectedGraph(int n) : n_(n), adj_(static_cast<size_t>(n) * n, 0) {}

DirectedGraph::DirectedGraph(int n, const std::vector<std::pair<int, int>>& edges)
    : DirectedGraph(n) {
  for (const auto& [from, to] : edges) {
    if (from < 0 || from >= n || to < 0 || to >= n) {
      throw Error("graph edge (" + std::to_string(from + 1) + ", " + std::to_string(to + 1) +
                  ") references a node outside 1.." + std::to_string(n));
    }
    if (!add_edge(from, to)) {
      throw Error("duplicate graph edge (" + std::to_string(from + 1) + ", " +
                  std::to_string(to + 1) + ")");
    }
  }
}

bool DirectedGraph::add_edge(int from, int to) {
  char& slot = adj_[from * n_ + to];
  if (slot) return false;
  slot = 1;
  return true;
}

std::vector<std::pair<int, int>> DirectedGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int j = 0; j < n_; ++j)
    for (int i = 0; i < n_; ++i)
      if (has_edge(j, i)) out.emplace_back(j, i);
  return out;
}

std::vector<int> DirectedGraph::in_neighbors(int i) const {
  std::vector<int> out;
  for (int j = 0; j < n_; ++j)
    if (has_edge(j, i)) out.push_back(j);
  return out;
}

std::vector<int> DirectedGraph::out_neighbors(int i) const {
  std::vector<int> out;
  for (int j = 0; j < n_; ++j)
    if (has_edge(i, j)) out.push_back(j);
  return out;
}

PhysicalGraphs physical_graphs(const SystemModel& model, double tol) {
  validate_system(model);
  const int N = model.num_subsystems();
  PhysicalGraphs g{DirectedGraph(N), DirectedGraph(N)};
  for (int t = 0; t < model.horizon; ++t) {
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < N; ++j) {
        if (model.A_block(t, i, j).cwiseAbs().maxCoeff() > tol) g.A.add_edge(j, i);
        if (model.nu[j] > 0 && model.B_block(t, i, j).cwiseAbs().maxCoeff() > tol) {
          g.B.add_edge(j, i);
        }
      }
    }
  }
  return g;
}

Eigen::VectorXd Selection::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y(rows());
  for (int r = 0; r < rows(); ++r) y[r] = x[index[r]];
  return y;
}

Eigen::MatrixXd Selection::matrix() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows(), domain_dim);
  for (int r = 0; r < rows(); ++r) m(r, index[r]) = 1.0;
  return m;
}

bool Decomposition::is_nested(int i, int j) const {
  return std::binary_search(nested[i].begin(), nested[i].end(), j);
}

bool Decomposition::is_coupling(int i, int j) const {
  return std::binary_search(coupling[i].begin(), coupling[i].end(), j);
}

namespace {

bool subset(const std::vector<int>& a, const std::vector<int>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

Decomposition decompose(const DirectedGraph& information, const PhysicalGraphs& physical) {
  const int N = information.size();
  if (physical.A.size() != N || physical.B.size() != N) {
    throw NodeCountMismatch("information graph has " + std::to_string(N) +
                            " nodes, physical graphs have " + std::to_string(physical.A.size()) +
                            " and " + std::to_string(physical.B.size()));
  }
  Decomposition d;
  d.information = information;
  d.physical = physical;
  d.nested.resize(N);
  d.coupling.resize(N);
  d.coupling_graph = DirectedGraph(N);

  std::vector<std::vector<int>> info_in(N);
  for (int i = 0; i < N; ++i) info_in[i] = information.in_neighbors(i);

  for (int i = 0; i < N; ++i) {
    for (int j : info_in[i]) {
      bool ok = subset(physical.A.in_neighbors(j), info_in[i]);
      for (int k : physical.B.in_neighbors(j)) {
        if (!ok) break;
        ok = subset(info_in[k], info_in[i]);
      }
      if (ok) {
        d.nested[i].push_back(j);
      } else {
        d.coupling[i].push_back(j);
        d.coupling_graph.add_edge(j, i);
      }
    }
  }
  for (int j = 0; j < N; ++j) {
    for (int i = 0; i < N; ++i) {
      if (d.is_coupling(i, j)) {
        d.coupling_union.push_back(j);
        break;
      }
    }
  }
  return d;
}

bool is_partially_nested(const Decomposition& d) { return d.coupling_union.empty(); }

CouplingProjector coupling_projector(const Decomposition& d, const SystemModel& model) {
  CouplingProjector p;
  p.full.domain_dim = model.state_traj_dim();
  for (int j : d.coupling_union) p.step_dim += model.nx[j];
  for (int t = 0; t <= model.horizon; ++t) {
    for (int j : d.coupling_union) {
      for (int k = 0; k < model.nx[j]; ++k) p.full.index.push_back(model.state_index(t, j, k));
    }
  }
  for (int t = 0; t <= model.horizon; ++t) {
    Selection s;
    s.domain_dim = p.full.domain_dim;
    s.index.assign(p.full.index.begin(), p.full.index.begin() + p.step_dim * (t + 1));
    p.prefix.push_back(std::move(s));
  }
  return p;
}

Eigen::VectorXd reconstruct_nested_disturbance(const Decomposition& d, const SystemModel& model,
                                               const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                               int i, int j, int t) {
  if (!d.is_nested(i, j)) {
    throw NotNested("subsystem " + std::to_string(j + 1) + " is not in N(" +
                    std::to_string(i + 1) + ")");
  }
  if (t < 0 || t >= model.horizon) throw Error("reconstruction time out of range");
  Eigen::VectorXd w = x.segment(model.state_index(t + 1, j, 0), model.nx[j]);
  for (int k : d.physical.A.in_neighbors(j)) {
    w -= model.A_block(t, j, k) * x.segment(model.state_index(t, k, 0), model.nx[k]);
  }
  for (int k : d.physical.B.in_neighbors(j)) {
    w -= model.B_block(t, j, k) * u.segment(model.input_index(t, k, 0), model.nu[k]);
  }
  return w;
}

namespace {

std::string set_string(const std::vector<int>& s) {
  std::ostringstream os;
  os << "{";
  for (size_t k = 0; k < s.size(); ++k) os << (k ? "," : "") << s[k] + 1;
  os << "}";
  return os.str();
}

}  // namespace

std::string describe_decomposition(const Decomposition& d) {
  std::ostringstream os;
  os << "subsystem  V_I^-(i)     N(i)         C(i)\n";
  for (int i = 0; i < d.information.size(); ++i) {
    char line[160];
    std::snprintf(line, sizeof line, "%-10d %-12s %-12s %-12s\n", i + 1,
                  set_string(d.information.in_neighbors(i)).c_str(),
                  set_string(d.nested[i]).c_str(), set_string(d.coupling[i]).c_str());
    os << line;
  }
  os << "coupling set C = " << set_string(d.coupling_union) << "\n";
  os << "coupling graph edges E_C = {";
  bool first = true;
  for (const auto& [j, i] : d.coupling_graph.edges()) {
    os << (first ? "" : ", ") << "(" << j + 1 << "," << i + 1 << ")";
    first = false;
  }
  os << "}\n";
  os << "information structure: "
     << (is_partially_nested(d) ? "partially nested" : "nonclassical (not partially nested)")
     << "\n";
  return os.str();
}

std::string to_dot(const Decomposition& d) {
  std::ostringstream os;
  os << "digraph information {\n";
  for (int i = 0; i < d.information.size(); ++i) os << "  n" << i + 1 << " [label=\"" << i + 1 << "\"];\n";
  for (const auto& [j, i] : d.information.edges()) {
    os << "  n" << j + 1 << " -> n" << i + 1;
    if (d.coupling_graph.has_edge(j, i)) os << " [style=dashed, color=red]";
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace agc
