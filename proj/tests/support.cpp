#include "support.hpp"

namespace agc::test {

Vec random_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vec v(n);
  for (int k = 0; k < n; ++k) v[k] = nd(rng);
  return v;
}

Mat random_matrix(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Mat m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = nd(rng);
  return m;
}

SystemModel random_model(std::mt19937_64& rng, int N, int T, int max_nx, int max_nu, double sparsity) {
  std::uniform_int_distribution<int> dx(1, max_nx), du(0, max_nu);
  std::bernoulli_distribution drop(sparsity);
  SystemModel m;
  m.horizon = T;
  for (int i = 0; i < N; ++i) {
    m.nx.push_back(dx(rng));
    m.nu.push_back(du(rng));
  }
  int n = 0, p = 0;
  std::vector<int> xo, uo;
  for (int i = 0; i < N; ++i) {
    xo.push_back(n);
    uo.push_back(p);
    n += m.nx[i];
    p += m.nu[i];
  }
  std::vector<std::vector<char>> keepA(N, std::vector<char>(N)), keepB(N, std::vector<char>(N));
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      keepA[i][j] = i == j || !drop(rng);
      keepB[i][j] = i == j || !drop(rng);
    }
  for (int t = 0; t < T; ++t) {
    Mat A = 0.6 * random_matrix(n, n, rng);
    Mat B = random_matrix(n, p, rng);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        if (!keepA[i][j]) A.block(xo[i], xo[j], m.nx[i], m.nx[j]).setZero();
        if (!keepB[i][j]) B.block(xo[i], uo[j], m.nx[i], m.nu[j]).setZero();
      }
    m.A.push_back(A);
    m.B.push_back(B);
  }
  return m;
}

DirectedGraph random_graph(std::mt19937_64& rng, int N, double density) {
  std::bernoulli_distribution edge(density);
  DirectedGraph g(N);
  for (int i = 0; i < N; ++i) g.add_edge(i, i);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      if (i != j && edge(rng)) g.add_edge(j, i);
  return g;
}

Vec stepwise_states(const SystemModel& m, const Vec& u, const Vec& w) {
  const int n = m.A[0].rows();
  const int p = m.B[0].cols();
  Vec x(n * (m.horizon + 1));
  x.head(n) = w.head(n);
  for (int t = 0; t < m.horizon; ++t) {
    x.segment((t + 1) * n, n) = m.A[t] * x.segment(t * n, n) + m.B[t] * u.segment(t * p, p) + w.segment((t + 1) * n, n);
  }
  return x;
}

Vec stepwise_surrogate(const SystemModel& m, const std::vector<std::vector<int>>& coupling, const Vec& u,
                       const Vec& w, const Vec& v) {
  const int N = m.num_subsystems();
  const int n = m.A[0].rows();
  const int p = m.B[0].cols();
  std::vector<int> off(N, 0);
  for (int i = 1; i < N; ++i) off[i] = off[i - 1] + m.nx[i - 1];
  Vec x(n * (m.horizon + 1));
  x.head(n) = w.head(n);
  for (int t = 0; t < m.horizon; ++t) {
    for (int i = 0; i < N; ++i) {
      Vec next = m.B[t].middleRows(off[i], m.nx[i]) * u.segment(t * p, p) + w.segment((t + 1) * n + off[i], m.nx[i]);
      for (int j = 0; j < N; ++j) {
        const bool substituted = std::find(coupling[i].begin(), coupling[i].end(), j) != coupling[i].end();
        const Vec& src = substituted ? v : x;
        next += m.A[t].block(off[i], off[j], m.nx[i], m.nx[j]) * src.segment(t * n + off[j], m.nx[j]);
      }
      x.segment((t + 1) * n + off[i], m.nx[i]) = next;
    }
  }
  return x;
}

std::vector<std::set<int>> nested_oracle(const DirectedGraph& info, const SystemModel& m) {
  const int N = m.num_subsystems();
  std::vector<int> off(N, 0), uoff(N, 0);
  for (int i = 1; i < N; ++i) {
    off[i] = off[i - 1] + m.nx[i - 1];
    uoff[i] = uoff[i - 1] + m.nu[i - 1];
  }
  auto in_info = [&](int i) {
    std::set<int> s;
    for (int j = 0; j < N; ++j)
      if (info.has_edge(j, i)) s.insert(j);
    return s;
  };
  auto nonzero = [&](bool isA, int i, int j) {
    for (int t = 0; t < m.horizon; ++t) {
      const Mat blk = isA ? m.A[t].block(off[i], off[j], m.nx[i], m.nx[j])
                          : m.B[t].block(off[i], uoff[j], m.nx[i], m.nu[j]);
      if (blk.size() && blk.cwiseAbs().maxCoeff() > 1e-12) return true;
    }
    return false;
  };
  std::vector<std::set<int>> out(N);
  for (int i = 0; i < N; ++i) {
    const std::set<int> Vi = in_info(i);
    for (int j : Vi) {
      bool ok = true;
      for (int k = 0; k < N; ++k)
        if (nonzero(true, j, k) && !Vi.count(k)) ok = false;
      for (int k = 0; k < N; ++k) {
        if (!nonzero(false, j, k)) continue;
        for (int l : in_info(k))
          if (!Vi.count(l)) ok = false;
      }
      if (ok) out[i].insert(j);
    }
  }
  return out;
}

Mat random_conforming(const PatternMask& mask, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> nd(0.0, scale);
  Mat m = Mat::Zero(mask.rows(), mask.cols());
  for (auto [r, c] : mask.free_entries()) m(r, c) = nd(rng);
  return m;
}

Mat case_study_A() {
  Mat A(3, 3);
  A << 0.5, 0, 0, 0.5, 0.5, 0, 0.5, 1.2, -1.2;
  return A;
}

Mat case_study_B() { return Eigen::Vector3d(0.1, 1, 1).asDiagonal(); }

ProblemInstance short_case_study(int which, int T, double x_max) {
  SystemModel m = case_study_model();
  m.horizon = T;
  m.A.resize(T);
  m.B.resize(T);
  const int n = m.state_traj_dim();
  return prepare_instance(m, EllipsoidalUncertainty::uniform(Mat::Identity(n, n)), ConstraintSet::box(m, x_max, 2.5),
                          CostSpec::per_period(m, Eigen::Vector3d(0.1, 0.1, 2), Eigen::Vector3d(5, 5, 1)),
                          case_study_graph(which), which == 1 ? "G_I1" : "G_I2");
}

}  // namespace agc::test
