#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "kgmm/discrete_ot.hpp"

using namespace kgmm;

namespace {

Eigen::VectorXd random_simplex(std::mt19937_64& rng, Eigen::Index n) {
  std::exponential_distribution<double> e(1.0);
  Eigen::VectorXd p(n);
  for (Eigen::Index i = 0; i < n; ++i) p(i) = e(rng);
  return p / p.sum();
}

TransportProblem random_problem(std::mt19937_64& rng, Eigen::Index n0, Eigen::Index n1) {
  std::uniform_real_distribution<double> u(0.0, 5.0);
  TransportProblem prob{Eigen::MatrixXd(n0, n1), random_simplex(rng, n0), random_simplex(rng, n1)};
  for (Eigen::Index i = 0; i < prob.cost.size(); ++i) prob.cost.data()[i] = u(rng);
  return prob;
}

double plan_objective(const TransportProblem& prob, const Eigen::MatrixXd& pi) {
  return (prob.cost.array() * pi.array()).sum();
}

}  // namespace

TEST(Solve, SingleCell) {
  TransportProblem prob{Eigen::MatrixXd::Constant(1, 1, 3.0), Eigen::VectorXd::Ones(1),
                        Eigen::VectorXd::Ones(1)};
  const auto plan = solve(prob);
  EXPECT_EQ(plan.pi(0, 0), 1.0);
  EXPECT_EQ(plan.objective, 3.0);
}

TEST(Solve, DiagonalOptimum) {
  TransportProblem prob{(Eigen::MatrixXd(2, 2) << 0, 2, 2, 1).finished(), Eigen::Vector2d(0.5, 0.5),
                        Eigen::Vector2d(0.5, 0.5)};
  const auto plan = solve(prob);
  EXPECT_NEAR(plan.objective, 0.5, 1e-12);
  EXPECT_NEAR(plan.pi(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(plan.pi(1, 1), 0.5, 1e-12);
  EXPECT_NEAR(plan.pi(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(enumerate_optimum(prob, 1000), 0.5, 1e-6);
}

TEST(Solve, ConstantObjectivePolytope) {
  TransportProblem prob{(Eigen::MatrixXd(2, 2) << 1, 2, 3, 4).finished(), Eigen::Vector2d(0.3, 0.7),
                        Eigen::Vector2d(0.6, 0.4)};
  const auto plan = solve(prob);
  EXPECT_NEAR(plan.objective, 2.8, 1e-12);
  EXPECT_LE(max_marginal_violation(prob, plan.pi), 1e-12);
  EXPECT_NEAR(enumerate_optimum(prob, 1000), 2.8, 1e-6);
}

TEST(EnumerateOptimum, TrivialCases) {
  TransportProblem zero{Eigen::MatrixXd::Zero(3, 2), Eigen::Vector3d(0.2, 0.3, 0.5),
                        Eigen::Vector2d(0.6, 0.4)};
  EXPECT_EQ(enumerate_optimum(zero, 10), 0.0);
  TransportProblem swap{(Eigen::MatrixXd(2, 2) << 0, 1, 1, 0).finished(), Eigen::Vector2d(0.5, 0.5),
                        Eigen::Vector2d(0.5, 0.5)};
  EXPECT_NEAR(enumerate_optimum(swap, 10), 0.0, 1e-15);
  TransportProblem big{Eigen::MatrixXd::Zero(4, 2), Eigen::Vector4d::Constant(0.25),
                       Eigen::Vector2d(0.5, 0.5)};
  EXPECT_THROW(enumerate_optimum(big, 10), Error);
}

TEST(Normalized, RenormalisesWithinToleranceAndRejectsBeyond) {
  TransportProblem prob{Eigen::MatrixXd::Zero(2, 2), Eigen::Vector2d(0.5, 0.5 + 5e-10),
                        Eigen::Vector2d(0.5, 0.5)};
  const auto n = normalized(prob);
  EXPECT_DOUBLE_EQ(n.p0.sum(), 1.0);
  prob.p0(1) = 0.5 + 1e-6;
  try {
    normalized(prob);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Infeasible);
  }
  prob.p0 = Eigen::Vector2d(1.2, -0.2);
  EXPECT_THROW(normalized(prob), Error);
}

TEST(Normalized, RejectsShapeAndNonFiniteCost) {
  TransportProblem shape{Eigen::MatrixXd::Zero(2, 3), Eigen::Vector2d(0.5, 0.5),
                         Eigen::Vector2d(0.5, 0.5)};
  EXPECT_THROW(solve(shape), Error);
  TransportProblem nan{Eigen::MatrixXd::Zero(2, 2), Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(0.5, 0.5)};
  nan.cost(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(solve(nan), Error);
}

TEST(Solve, DegenerateMarginals) {
  // Zero-mass rows/columns and coincident partial sums.
  TransportProblem prob{(Eigen::MatrixXd(3, 3) << 1, 2, 3, 4, 1, 2, 3, 4, 1).finished(),
                        Eigen::Vector3d(0.5, 0.0, 0.5), Eigen::Vector3d(0.5, 0.5, 0.0)};
  const auto plan = solve(prob);
  EXPECT_LE(max_marginal_violation(prob, plan.pi), 1e-12);
  EXPECT_GE(plan.pi.minCoeff(), 0.0);
  EXPECT_NEAR(plan.objective, vertex_enumeration_optimum(prob), 1e-12);
}

TEST(Solve, OptimalAgainstVertexEnumeration) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    const Eigen::Index n0 = 1 + trial % 4, n1 = 1 + (trial / 4) % 4;
    const auto prob = random_problem(rng, n0, n1);
    const auto plan = solve(prob);
    EXPECT_LE(max_marginal_violation(prob, plan.pi), 1e-9);
    EXPECT_GE(plan.pi.minCoeff(), 0.0);
    EXPECT_GE(min_reduced_cost(prob, plan), -1e-9);
    EXPECT_EQ(plan.basis.size(), static_cast<std::size_t>(n0 + n1 - 1));
    EXPECT_NEAR(plan.objective, vertex_enumeration_optimum(prob), 1e-9);
    EXPECT_NEAR(plan.objective, plan_objective(prob, plan.pi), 1e-12);
  }
}

TEST(Solve, TwoByTwoAgainstGrid) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const auto prob = random_problem(rng, 2, 2);
    EXPECT_NEAR(solve(prob).objective, enumerate_optimum(prob, 200), 1e-9);
  }
}

TEST(Solve, LargerProblemsCertifiedByDuals) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const auto prob = random_problem(rng, 20 + trial, 30 - trial);
    const auto plan = solve(prob);
    EXPECT_LE(max_marginal_violation(prob, plan.pi), 1e-9);
    EXPECT_GE(min_reduced_cost(prob, plan), -1e-9);
    // Weak duality: the dual objective equals the primal at optimum.
    EXPECT_NEAR(plan.u.dot(prob.p0) + plan.v.dot(prob.p1), plan.objective, 1e-9);
  }
}

TEST(Solve, PermutationEquivariance) {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 30; ++trial) {
    const auto prob = random_problem(rng, 4, 3);
    std::vector<int> order(4);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    TransportProblem permuted = prob;
    for (int i = 0; i < 4; ++i) {
      permuted.cost.row(i) = prob.cost.row(order[i]);
      permuted.p0(i) = prob.p0(order[i]);
    }
    const auto a = solve(prob), b = solve(permuted);
    EXPECT_NEAR(a.objective, b.objective, 1e-12);
    EXPECT_LE(max_marginal_violation(permuted, b.pi), 1e-12);
  }
}

TEST(Solve, CostScaling) {
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 30; ++trial) {
    auto prob = random_problem(rng, 3, 3);
    const double base = solve(prob).objective;
    prob.cost *= 7.5;
    EXPECT_NEAR(solve(prob).objective, 7.5 * base, 1e-10);
  }
}

TEST(Solve, Deterministic) {
  std::mt19937_64 rng(46);
  const auto prob = random_problem(rng, 6, 5);
  const auto a = solve(prob), b = solve(prob);
  EXPECT_EQ(a.pi, b.pi);
  EXPECT_EQ(a.basis, b.basis);
}
