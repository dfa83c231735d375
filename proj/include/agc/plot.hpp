#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "agc/policy.hpp"
#include "agc/sweep.hpp"

namespace agc {

/// Cost against x_max, one curve per graph. Curves break at points without
/// an objective.
std::string plot_cost_curves(const std::vector<SweepRecord>& records);

struct Interval {
  double lo = -INFINITY;
  double hi = INFINITY;
};

/// Data behind the projected-sets figure for two trajectory coordinates.
struct ProjectedSets {
  std::pair<int, int> coords;
  std::vector<Eigen::Vector2d> samples;
  std::vector<Eigen::Vector2d> hull;  // counter-clockwise
  /// Outer ellipse of the Minkowski sum of the two projected surrogate
  /// ellipsoids, and the mixing weight it was formed with.
  Ellipsoid reachable;
  double alpha = 1.0;
  std::optional<Ellipsoid> contract;  // both coordinates coupling states
  Interval box_x, box_y;
};

/// Throws CoordOutOfRange unless both coordinates index the state
/// trajectory. Samples are true closed-loop runs on mixed draws.
ProjectedSets projected_sets(const ProblemInstance& instance, const ContractPolicy& policy,
                             std::pair<int, int> coords, int samples = 10000, std::uint64_t seed = 1);

std::string plot_projected_sets(const ProblemInstance& instance, const ContractPolicy& policy,
                                std::pair<int, int> coords, int samples = 10000, std::uint64_t seed = 1);
std::string render_projected_sets(const ProjectedSets& sets, const SystemModel& model);

/// Andrew's monotone chain; collinear points are dropped.
std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> points);

/// Boundary of {c + S^1/2 u : |u| = 1} for a PSD (possibly singular) S.
std::vector<Eigen::Vector2d> ellipse_outline(const Ellipsoid& e, int segments = 180);

/// "x3(10)" for the 1-based subsystem, local coordinate (omitted when the
/// subsystem is scalar) and time of a trajectory index.
std::string state_label(const SystemModel& model, int index);

}  // namespace agc
