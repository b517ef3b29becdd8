#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "kgmm/error.hpp"

namespace kgmm {

/// min sum_ij c_ij pi_ij over nonnegative pi with row sums p0, column sums p1.
struct TransportProblem {
  Eigen::MatrixXd cost;
  Eigen::VectorXd p0;
  Eigen::VectorXd p1;
};

struct TransportPlan {
  Eigen::MatrixXd pi;
  double objective = 0.0;
  /// Basic cells of the final basis (N0 + N1 - 1 entries, a spanning tree of
  /// the bipartite row/column graph).
  std::vector<std::pair<Eigen::Index, Eigen::Index>> basis;
  /// Dual potentials: u_i + v_j = c_ij on every basic cell.
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  int pivots = 0;
};

/// Marginal tolerance: |sum p - 1| within it is renormalised, beyond it is an
/// error.
inline constexpr double kMarginalTolerance = 1e-9;

/// Validates the problem and returns a copy with marginals renormalised to sum
/// exactly to 1. Throws Error(Infeasible) on mass mismatch or negative mass,
/// Error(NonFinite) on a non-finite cost.
TransportProblem normalized(const TransportProblem& problem);

/// Transportation simplex (MODI): north-west-corner start, Bland's rule for
/// entering and leaving cells, supplies perturbed by 1e-12 each against
/// degeneracy. The perturbation is removed on exit by recomputing the flows of
/// the final basis from the exact marginals.
TransportPlan solve(const TransportProblem& problem);

/// min_ij (c_ij - u_i - v_j) over all cells; >= 0 (up to roundoff) certifies
/// optimality of the plan's basis.
double min_reduced_cost(const TransportProblem& problem, const TransportPlan& plan);

/// Largest absolute deviation of the plan's row/column sums from p0/p1.
double max_marginal_violation(const TransportProblem& problem, const Eigen::MatrixXd& pi);

/// Test oracle: scans a uniform grid (grid + 1 points per axis) over the
/// (N0-1)(N1-1) free entries of the plan, each in
/// [max(0, p0_i + p1_j - 1), min(p0_i, p1_j)], and
/// returns the smallest objective of a feasible completion. Exact for 2x2
/// problems (the optimum sits at an interval end). N0, N1 <= 3.
double enumerate_optimum(const TransportProblem& problem, int grid);

/// Test oracle: exhaustive enumeration of all bases (spanning trees of
/// N0 + N1 - 1 cells), each solved as a dense linear system; returns the best
/// feasible vertex objective. Exact. N0 * N1 <= 16.
double vertex_enumeration_optimum(const TransportProblem& problem);

}  // namespace kgmm
