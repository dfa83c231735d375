#include "agc/problem.hpp"

#include "agc/error.hpp"

namespace agc {

ProblemInstance prepare_instance(SystemModel model, EllipsoidalUncertainty disturbance,
                                 ConstraintSet constraints, CostSpec cost,
                                 const DirectedGraph& information, std::string graph_name) {
  validate_system(model);
  const int nX = model.state_traj_dim();
  const int nU = model.input_traj_dim();
  if (disturbance.sigma.rows() != nX || disturbance.sigma.cols() != nX) {
    throw DimensionMismatch("Sigma must be " + std::to_string(nX) + "x" + std::to_string(nX));
  }
  check_positive_definite(disturbance.sigma);
  if (disturbance.second_moment.size() == 0) {
    disturbance.second_moment = second_moment_uniform(disturbance.sigma);
  }
  if (disturbance.second_moment.rows() != nX || disturbance.second_moment.cols() != nX) {
    throw DimensionMismatch("second moment must match Sigma");
  }
  constraints.validate(nX, nU);
  cost.validate(nX, nU);

  ProblemInstance p;
  p.model = std::move(model);
  p.disturbance = std::move(disturbance);
  p.xi_second_moment = p.disturbance.second_moment;
  p.constraints = std::move(constraints);
  p.cost = std::move(cost);
  p.graph_name = std::move(graph_name);
  p.decomposition = decompose(information, physical_graphs(p.model));
  p.projector = coupling_projector(p.decomposition, p.model);
  p.surrogate = build_surrogate_operators(p.model, p.decomposition);
  p.trajectory = build_trajectory_operators(p.model);
  p.qn = pattern_QN(p.decomposition, p.model);
  p.qc = pattern_QC(p.decomposition, p.model);
  p.y = pattern_Y(p.decomposition.coupling_graph, p.model);
  p.sigma_sqrt = symmetric_sqrt(p.disturbance.sigma);
  return p;
}

SystemModel case_study_model() {
  SystemModel m;
  m.nx = {1, 1, 1};
  m.nu = {1, 1, 1};
  m.horizon = 15;
  Eigen::Matrix3d A;
  A << 0.5, 0.0, 0.0,
       0.5, 0.5, 0.0,
       0.5, 1.2, -1.2;
  const Eigen::Matrix3d B = Eigen::Vector3d(0.1, 1.0, 1.0).asDiagonal();
  m.A.assign(m.horizon, A);
  m.B.assign(m.horizon, B);
  return m;
}

DirectedGraph case_study_graph(int which) {
  if (which == 1) return DirectedGraph(3, {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {1, 2}, {0, 2}});
  if (which == 2) return DirectedGraph(3, {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {1, 2}});
  throw Error("case study graph must be 1 or 2");
}

ProblemInstance case_study_instance(double x_max, int which) {
  SystemModel m = case_study_model();
  const int nX = m.state_traj_dim();
  auto dist = EllipsoidalUncertainty::uniform(Eigen::MatrixXd::Identity(nX, nX));
  ConstraintSet cons = ConstraintSet::box(m, x_max, 2.5);
  CostSpec cost = CostSpec::per_period(m, Eigen::Vector3d(0.1, 0.1, 2.0), Eigen::Vector3d(5.0, 5.0, 1.0));
  return prepare_instance(std::move(m), std::move(dist), std::move(cons), std::move(cost),
                          case_study_graph(which), which == 1 ? "G_I1" : "G_I2");
}

}  // namespace agc
