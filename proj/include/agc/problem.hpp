#pragma once

#include <Eigen/Dense>
#include <string>

#include "agc/infograph.hpp"
#include "agc/model.hpp"
#include "agc/surrogate.hpp"

namespace agc {

/// A fully specified synthesis problem together with everything derived
/// from its information graph.
struct ProblemInstance {
  SystemModel model;
  EllipsoidalUncertainty disturbance;
  /// Second moment of the primitive disturbance xi; equal to
  /// disturbance.second_moment unless the caller supplies another one.
  Eigen::MatrixXd xi_second_moment;
  ConstraintSet constraints;
  CostSpec cost;
  std::string graph_name;

  Decomposition decomposition;
  CouplingProjector projector;
  SurrogateOperators surrogate;
  TrajectoryOperators trajectory;
  PatternMask qn;
  PatternMask qc;
  PatternMask y;
  Eigen::MatrixXd sigma_sqrt;

  bool has_coupling() const { return projector.full.rows() > 0; }
};

/// Validates the data and derives decomposition, operators and masks.
ProblemInstance prepare_instance(SystemModel model, EllipsoidalUncertainty disturbance,
                                 ConstraintSet constraints, CostSpec cost,
                                 const DirectedGraph& information, std::string graph_name = "");

/// Three-subsystem example with T = 15, unit-ball disturbances and the
/// box constraints ||x||_inf <= x_max, ||u||_inf <= 2.5.
SystemModel case_study_model();
/// which = 1: 1->2, 2->3, 1->3; which = 2: 1->2, 2->3. Both with self-loops.
DirectedGraph case_study_graph(int which);
ProblemInstance case_study_instance(double x_max, int which);

}  // namespace agc
