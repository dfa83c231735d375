#pragma once

#include <Eigen/Dense>
#include <random>
#include <set>
#include <vector>

#include "agc/infograph.hpp"
#include "agc/model.hpp"
#include "agc/problem.hpp"
#include "agc/surrogate.hpp"

namespace agc::test {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

Vec random_vector(int n, std::mt19937_64& rng);
Mat random_matrix(int r, int c, std::mt19937_64& rng);

/// Random block model; each off-diagonal block is dropped with probability
/// `sparsity` so the coupling graphs are not complete.
SystemModel random_model(std::mt19937_64& rng, int N, int T, int max_nx = 2, int max_nu = 2,
                         double sparsity = 0.4);

/// Random information graph with all self-loops.
DirectedGraph random_graph(std::mt19937_64& rng, int N, double density);

/// x(0) = w(-1), x(t+1) = A(t) x(t) + B(t) u(t) + w(t).
Vec stepwise_states(const SystemModel& m, const Vec& u, const Vec& w);

/// Surrogate recursion written out per subsystem row: row i reads v_j(t) in
/// place of x~_j(t) for j in coupling[i].
Vec stepwise_surrogate(const SystemModel& m, const std::vector<std::vector<int>>& coupling, const Vec& u,
                       const Vec& w, const Vec& v_full);

/// Direct evaluation of the nestedness conditions; returns N(i) for all i.
std::vector<std::set<int>> nested_oracle(const DirectedGraph& info, const SystemModel& m);

/// Random matrix supported on a mask.
Mat random_conforming(const PatternMask& mask, std::mt19937_64& rng, double scale = 1.0);

/// The case-study matrices, typed in from the problem statement.
Mat case_study_A();
Mat case_study_B();

/// The case study truncated to horizon T.
ProblemInstance short_case_study(int which, int T, double x_max);

}  // namespace agc::test
