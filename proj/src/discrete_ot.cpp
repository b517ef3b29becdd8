#include "kgmm/discrete_ot.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <string>

namespace kgmm {

namespace {

using Index = Eigen::Index;
using Cell = std::pair<Index, Index>;

constexpr double kSupplyPerturbation = 1e-12;

// Basis cells as a spanning tree over N0 row nodes and N1 column nodes.
// Column j is node N0 + j.
struct BasisTree {
  Index rows;
  Index cols;
  std::vector<Cell> cells;

  std::vector<std::vector<std::size_t>> adjacency() const {
    std::vector<std::vector<std::size_t>> adj(static_cast<std::size_t>(rows + cols));
    for (std::size_t e = 0; e < cells.size(); ++e) {
      adj[static_cast<std::size_t>(cells[e].first)].push_back(e);
      adj[static_cast<std::size_t>(rows + cells[e].second)].push_back(e);
    }
    return adj;
  }

  std::size_t other_end(std::size_t edge, std::size_t node) const {
    const auto row = static_cast<std::size_t>(cells[edge].first);
    const auto col = static_cast<std::size_t>(rows + cells[edge].second);
    return node == row ? col : row;
  }
};

void potentials(const BasisTree& tree, const Eigen::MatrixXd& cost, Eigen::VectorXd& u,
                Eigen::VectorXd& v) {
  const auto adj = tree.adjacency();
  const std::size_t nodes = adj.size();
  std::vector<double> value(nodes, 0.0);
  std::vector<bool> seen(nodes, false);
  std::deque<std::size_t> queue{0};
  seen[0] = true;
  while (!queue.empty()) {
    const std::size_t node = queue.front();
    queue.pop_front();
    for (std::size_t e : adj[node]) {
      const std::size_t next = tree.other_end(e, node);
      if (seen[next]) continue;
      // u_i + v_j = c_ij
      value[next] = cost(tree.cells[e].first, tree.cells[e].second) - value[node];
      seen[next] = true;
      queue.push_back(next);
    }
  }
  u.resize(tree.rows);
  v.resize(tree.cols);
  for (Index i = 0; i < tree.rows; ++i) u(i) = value[static_cast<std::size_t>(i)];
  for (Index j = 0; j < tree.cols; ++j) v(j) = value[static_cast<std::size_t>(tree.rows + j)];
}

// Edges on the tree path from column node `col` to row node `row`, ordered
// starting at the column end.
std::vector<std::size_t> tree_path(const BasisTree& tree, Index col, Index row) {
  const auto adj = tree.adjacency();
  const std::size_t start = static_cast<std::size_t>(tree.rows + col);
  const std::size_t goal = static_cast<std::size_t>(row);
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> via(adj.size(), none);
  std::vector<bool> seen(adj.size(), false);
  std::deque<std::size_t> queue{start};
  seen[start] = true;
  while (!queue.empty() && !seen[goal]) {
    const std::size_t node = queue.front();
    queue.pop_front();
    for (std::size_t e : adj[node]) {
      const std::size_t next = tree.other_end(e, node);
      if (seen[next]) continue;
      seen[next] = true;
      via[next] = e;
      queue.push_back(next);
    }
  }
  if (!seen[goal]) throw Error(ErrorKind::Infeasible, "transport basis is not a spanning tree");
  std::vector<std::size_t> path;
  for (std::size_t node = goal; node != start;) {
    const std::size_t e = via[node];
    path.push_back(e);
    node = tree.other_end(e, node);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

// Flows of a spanning-tree basis for the given marginals, by peeling leaves.
std::vector<double> basis_flows(const BasisTree& tree, const Eigen::VectorXd& supply,
                                const Eigen::VectorXd& demand) {
  const auto adj = tree.adjacency();
  std::vector<double> remaining(adj.size());
  for (Index i = 0; i < tree.rows; ++i) remaining[static_cast<std::size_t>(i)] = supply(i);
  for (Index j = 0; j < tree.cols; ++j) {
    remaining[static_cast<std::size_t>(tree.rows + j)] = demand(j);
  }
  std::vector<int> degree(adj.size());
  for (std::size_t n = 0; n < adj.size(); ++n) degree[n] = static_cast<int>(adj[n].size());
  std::vector<bool> done(tree.cells.size(), false);
  std::vector<double> flow(tree.cells.size(), 0.0);

  std::deque<std::size_t> leaves;
  for (std::size_t n = 0; n < adj.size(); ++n) {
    if (degree[n] == 1) leaves.push_back(n);
  }
  while (!leaves.empty()) {
    const std::size_t leaf = leaves.front();
    leaves.pop_front();
    if (degree[leaf] != 1) continue;
    std::size_t edge = 0;
    for (std::size_t e : adj[leaf]) {
      if (!done[e]) edge = e;
    }
    const std::size_t other = tree.other_end(edge, leaf);
    flow[edge] = remaining[leaf];
    remaining[other] -= remaining[leaf];
    remaining[leaf] = 0.0;
    done[edge] = true;
    degree[leaf] = 0;
    if (--degree[other] == 1) leaves.push_back(other);
  }
  return flow;
}

BasisTree north_west_corner(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                            std::vector<double>& flow) {
  BasisTree tree{supply.size(), demand.size(), {}};
  Eigen::VectorXd a = supply;
  Eigen::VectorXd b = demand;
  Index i = 0;
  Index j = 0;
  while (true) {
    const double x = std::min(a(i), b(j));
    tree.cells.emplace_back(i, j);
    flow.push_back(x);
    a(i) -= x;
    b(j) -= x;
    if (i == tree.rows - 1 && j == tree.cols - 1) break;
    if (j == tree.cols - 1 || (i < tree.rows - 1 && a(i) <= b(j))) {
      ++i;
    } else {
      ++j;
    }
  }
  return tree;
}

}  // namespace

TransportProblem normalized(const TransportProblem& problem) {
  const auto& c = problem.cost;
  if (c.rows() != problem.p0.size() || c.cols() != problem.p1.size() || c.size() == 0) {
    throw Error(ErrorKind::DimensionMismatch, "cost matrix shape does not match marginals");
  }
  if (!c.allFinite()) throw Error(ErrorKind::NonFinite, "cost matrix has non-finite entries");
  TransportProblem out = problem;
  for (Eigen::VectorXd* p : {&out.p0, &out.p1}) {
    if (!p->allFinite() || p->minCoeff() < 0.0) {
      throw Error(ErrorKind::Infeasible, "marginals must be finite and nonnegative");
    }
    const double total = p->sum();
    if (std::abs(total - 1.0) > kMarginalTolerance) {
      throw Error(ErrorKind::Infeasible,
                  "marginal mass " + std::to_string(total) + " differs from 1 beyond tolerance");
    }
    *p /= total;
  }
  return out;
}

TransportPlan solve(const TransportProblem& problem) {
  const TransportProblem prob = normalized(problem);
  const Index n0 = prob.cost.rows();
  const Index n1 = prob.cost.cols();
  const double scale = std::max(1.0, prob.cost.cwiseAbs().maxCoeff());
  const double optimality_tol = 1e-12 * scale;

  Eigen::VectorXd supply = prob.p0.array() + kSupplyPerturbation;
  Eigen::VectorXd demand = prob.p1;
  demand(n1 - 1) += kSupplyPerturbation * static_cast<double>(n0);

  std::vector<double> flow;
  BasisTree tree = north_west_corner(supply, demand, flow);
  Eigen::MatrixXi basic = Eigen::MatrixXi::Constant(n0, n1, -1);
  for (std::size_t e = 0; e < tree.cells.size(); ++e) {
    basic(tree.cells[e].first, tree.cells[e].second) = static_cast<int>(e);
  }

  TransportPlan plan;
  const long max_pivots = 50L * n0 * n1 + 1000;
  while (true) {
    potentials(tree, prob.cost, plan.u, plan.v);

    // Bland: first improving cell in lexicographic (i, j) order.
    Index enter_i = -1;
    Index enter_j = -1;
    for (Index i = 0; i < n0 && enter_i < 0; ++i) {
      for (Index j = 0; j < n1; ++j) {
        if (basic(i, j) >= 0) continue;
        if (prob.cost(i, j) - plan.u(i) - plan.v(j) < -optimality_tol) {
          enter_i = i;
          enter_j = j;
          break;
        }
      }
    }
    if (enter_i < 0) break;
    if (++plan.pivots > max_pivots) {
      throw Error(ErrorKind::NoConvergence, "transportation simplex exceeded pivot limit");
    }

    // Cycle: entering cell gains theta; path edges alternate -, +, -, ... from
    // the column end.
    const auto path = tree_path(tree, enter_j, enter_i);
    std::size_t leave = path.front();
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const std::size_t e = path[k];
      if (flow[e] < flow[leave] || (flow[e] == flow[leave] && tree.cells[e] < tree.cells[leave])) {
        leave = e;
      }
    }
    const double theta = flow[leave];
    for (std::size_t k = 0; k < path.size(); ++k) {
      flow[path[k]] += (k % 2 == 0) ? -theta : theta;
    }
    basic(tree.cells[leave].first, tree.cells[leave].second) = -1;
    tree.cells[leave] = {enter_i, enter_j};
    flow[leave] = theta;
    basic(enter_i, enter_j) = static_cast<int>(leave);
  }

  // Drop the perturbation: same basis, exact marginals.
  const std::vector<double> exact = basis_flows(tree, prob.p0, prob.p1);
  plan.pi = Eigen::MatrixXd::Zero(n0, n1);
  plan.objective = 0.0;
  for (std::size_t e = 0; e < tree.cells.size(); ++e) {
    double x = exact[e];
    if (x < 0.0) {
      if (x < -kMarginalTolerance) {
        throw Error(ErrorKind::Infeasible, "basis infeasible after removing perturbation");
      }
      x = 0.0;
    }
    const auto [i, j] = tree.cells[e];
    plan.pi(i, j) = x;
    plan.objective += prob.cost(i, j) * x;
  }
  plan.basis = tree.cells;
  return plan;
}

double min_reduced_cost(const TransportProblem& problem, const TransportPlan& plan) {
  double best = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < problem.cost.rows(); ++i) {
    for (Index j = 0; j < problem.cost.cols(); ++j) {
      best = std::min(best, problem.cost(i, j) - plan.u(i) - plan.v(j));
    }
  }
  return best;
}

double max_marginal_violation(const TransportProblem& problem, const Eigen::MatrixXd& pi) {
  const double rows = (pi.rowwise().sum() - problem.p0).cwiseAbs().maxCoeff();
  const double cols = (pi.colwise().sum().transpose() - problem.p1).cwiseAbs().maxCoeff();
  return std::max(rows, cols);
}

double enumerate_optimum(const TransportProblem& problem, int grid) {
  const TransportProblem prob = normalized(problem);
  const Index n0 = prob.cost.rows();
  const Index n1 = prob.cost.cols();
  if (n0 > 3 || n1 > 3) throw Error(ErrorKind::InvalidArgument, "enumerate_optimum: N0, N1 <= 3");
  if (grid < 1) throw Error(ErrorKind::InvalidArgument, "enumerate_optimum: grid >= 1");

  std::vector<Cell> free;
  for (Index i = 0; i + 1 < n0; ++i) {
    for (Index j = 0; j + 1 < n1; ++j) free.emplace_back(i, j);
  }
  std::vector<int> step(free.size(), 0);
  double best = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd pi(n0, n1);
  while (true) {
    pi.setZero();
    for (std::size_t f = 0; f < free.size(); ++f) {
      const auto [i, j] = free[f];
      // pi_ij lies in [max(0, p0_i + p1_j - 1), min(p0_i, p1_j)].
      const double lo = std::max(0.0, prob.p0(i) + prob.p1(j) - 1.0);
      const double hi = std::min(prob.p0(i), prob.p1(j));
      pi(i, j) = lo + (hi - lo) * step[f] / grid;
    }
    for (Index i = 0; i + 1 < n0; ++i) {
      pi(i, n1 - 1) = prob.p0(i) - pi.row(i).head(n1 - 1).sum();
    }
    for (Index j = 0; j + 1 < n1; ++j) {
      pi(n0 - 1, j) = prob.p1(j) - pi.col(j).head(n0 - 1).sum();
    }
    pi(n0 - 1, n1 - 1) = prob.p0(n0 - 1) - pi.row(n0 - 1).head(n1 - 1).sum();
    if (pi.minCoeff() >= -1e-12) {
      best = std::min(best, (prob.cost.array() * pi.array()).sum());
    }

    std::size_t f = 0;
    while (f < step.size() && step[f] == grid) step[f++] = 0;
    if (f == step.size()) break;
    ++step[f];
  }
  return best;
}

double vertex_enumeration_optimum(const TransportProblem& problem) {
  const TransportProblem prob = normalized(problem);
  const Index n0 = prob.cost.rows();
  const Index n1 = prob.cost.cols();
  const Index cells = n0 * n1;
  if (cells > 16) throw Error(ErrorKind::InvalidArgument, "vertex enumeration: N0 * N1 <= 16");
  const Index k = n0 + n1 - 1;

  // Equality system: rows 0..n0-1 are row sums, n0..n0+n1-1 are column sums.
  Eigen::VectorXd rhs(n0 + n1);
  rhs << prob.p0, prob.p1;

  double best = std::numeric_limits<double>::infinity();
  std::vector<bool> pick(static_cast<std::size_t>(cells), false);
  std::fill(pick.end() - k, pick.end(), true);
  do {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n0 + n1, k);
    std::vector<Cell> chosen;
    for (Index c = 0; c < cells; ++c) {
      if (!pick[static_cast<std::size_t>(c)]) continue;
      const Index i = c / n1;
      const Index j = c % n1;
      const Index col = static_cast<Index>(chosen.size());
      a(i, col) = 1.0;
      a(n0 + j, col) = 1.0;
      chosen.emplace_back(i, j);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.rank() < k) continue;  // not a tree
    const Eigen::VectorXd x = lu.solve(rhs);
    if ((a * x - rhs).cwiseAbs().maxCoeff() > 1e-12 || x.minCoeff() < -1e-12) continue;
    double objective = 0.0;
    for (Index c = 0; c < k; ++c) objective += prob.cost(chosen[c].first, chosen[c].second) * x(c);
    best = std::min(best, objective);
  } while (std::next_permutation(pick.begin(), pick.end()));
  return best;
}

}  // namespace kgmm
