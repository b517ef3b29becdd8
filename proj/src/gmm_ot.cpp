#include "kgmm/gmm_ot.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace kgmm {

std::vector<double> checked_weights(std::vector<double> weights) {
  if (weights.empty()) throw Error(ErrorKind::InvalidArgument, "weight vector is empty");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorKind::InvalidArgument, "weights must be finite and nonnegative");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > kMarginalTolerance) {
    throw Error(ErrorKind::InvalidArgument,
                "weights sum to " + std::to_string(total) + ", expected 1");
  }
  for (double& w : weights) w /= total;
  return weights;
}

GaussianMixture::GaussianMixture(std::vector<Gaussian> components, std::vector<double> weights)
    : components_(std::move(components)), weights_(checked_weights(std::move(weights))) {
  if (components_.size() != weights_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "mixture needs one weight per component");
  }
  for (const auto& g : components_) {
    if (g.dim() != components_.front().dim()) {
      throw Error(ErrorKind::DimensionMismatch, "mixture components differ in dimension");
    }
  }
}

KernelMixture::KernelMixture(std::vector<RkhsGaussian> groups, std::vector<double> weights)
    : groups_(std::move(groups)), weights_(checked_weights(std::move(weights))) {
  if (groups_.size() != weights_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "mixture needs one weight per group");
  }
  for (const auto& g : groups_) {
    if (!(g.spec() == groups_.front().spec())) {
      throw Error(ErrorKind::InvalidArgument, "mixture groups use different kernels");
    }
  }
}

KernelMixture KernelMixture::from_labelled(const Dataset& data, const KernelSpec& spec,
                                           std::vector<double> weights) {
  if (!data.has_labels()) {
    throw Error(ErrorKind::InvalidArgument, "kernel mixture needs a labelled dataset");
  }
  std::vector<RkhsGaussian> groups;
  for (int label : data.label_values()) groups.emplace_back(data.group(label), spec);
  return KernelMixture(std::move(groups), std::move(weights));
}

Eigen::MatrixXd w2_cost_matrix(const GaussianMixture& mu0, const GaussianMixture& mu1) {
  if (mu0.dim() != mu1.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "mixtures differ in dimension");
  }
  Eigen::MatrixXd cost(mu0.size(), mu1.size());
  for (std::size_t i = 0; i < mu0.size(); ++i) {
    for (std::size_t j = 0; j < mu1.size(); ++j) {
      cost(i, j) = w2_squared(mu0.components()[i], mu1.components()[j]);
    }
  }
  return cost;
}

Eigen::MatrixXd kw2_cost_matrix(const std::vector<RkhsGaussian>& groups0,
                                const std::vector<RkhsGaussian>& groups1) {
  Eigen::MatrixXd cost(groups0.size(), groups1.size());
  for (std::size_t i = 0; i < groups0.size(); ++i) {
    for (std::size_t j = 0; j < groups1.size(); ++j) {
      cost(i, j) = kw2_squared(groups0[i], groups1[j]);
    }
  }
  return cost;
}

MixtureDistance distance_from_cost(Eigen::MatrixXd cost, const std::vector<double>& p0,
                                   const std::vector<double>& p1) {
  TransportProblem problem{std::move(cost),
                           Eigen::Map<const Eigen::VectorXd>(p0.data(), p0.size()),
                           Eigen::Map<const Eigen::VectorXd>(p1.data(), p1.size())};
  MixtureDistance out;
  out.plan = solve(problem);
  out.cost = std::move(problem.cost);
  out.distance = std::sqrt(std::max(0.0, out.plan.objective));
  return out;
}

namespace {

void append(std::vector<double>& out, const Eigen::MatrixXd& m) {
  out.insert(out.end(), m.data(), m.data() + m.size());
}

std::vector<double> fingerprint(const GaussianMixture& mu) {
  std::vector<double> out = mu.weights();
  for (const auto& g : mu.components()) {
    append(out, g.mean);
    append(out, g.cov);
  }
  return out;
}

std::vector<double> fingerprint(const KernelMixture& mu) {
  std::vector<double> out = mu.weights();
  for (const auto& g : mu.groups()) {
    out.push_back(static_cast<double>(g.size()));
    append(out, g.data().points());
  }
  return out;
}

MixtureDistance transposed(MixtureDistance d) {
  d.cost.transposeInPlace();
  d.plan.pi.transposeInPlace();
  for (auto& [i, j] : d.plan.basis) std::swap(i, j);
  std::swap(d.plan.u, d.plan.v);
  return d;
}

}  // namespace

// Both distances are evaluated in a canonical argument order, so swapping the
// arguments gives a bitwise-identical distance and the transposed plan.

MixtureDistance mixture_distance(const GaussianMixture& mu0, const GaussianMixture& mu1) {
  if (fingerprint(mu1) < fingerprint(mu0)) return transposed(mixture_distance(mu1, mu0));
  return distance_from_cost(w2_cost_matrix(mu0, mu1), mu0.weights(), mu1.weights());
}

MixtureDistance kernel_mixture_distance(const KernelMixture& mu0, const KernelMixture& mu1) {
  if (!(mu0.spec() == mu1.spec())) {
    throw Error(ErrorKind::InvalidArgument, "mixtures use different kernels");
  }
  if (fingerprint(mu1) < fingerprint(mu0)) return transposed(kernel_mixture_distance(mu1, mu0));
  return distance_from_cost(kw2_cost_matrix(mu0.groups(), mu1.groups()), mu0.weights(),
                            mu1.weights());
}

GaussianMixture geodesic(const GaussianMixture& mu0, const GaussianMixture& mu1,
                         const TransportPlan& plan, double t) {
  if (plan.pi.rows() != static_cast<Eigen::Index>(mu0.size()) ||
      plan.pi.cols() != static_cast<Eigen::Index>(mu1.size())) {
    throw Error(ErrorKind::DimensionMismatch, "plan shape does not match the mixtures");
  }
  std::vector<Gaussian> components;
  std::vector<double> weights;
  for (std::size_t i = 0; i < mu0.size(); ++i) {
    for (std::size_t j = 0; j < mu1.size(); ++j) {
      const double w = plan.pi(i, j);
      if (w <= kGeodesicWeightFloor) continue;
      components.push_back(interpolate(mu0.components()[i], mu1.components()[j], t));
      weights.push_back(w);
    }
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& w : weights) w /= total;
  return GaussianMixture(std::move(components), std::move(weights));
}

GaussianMixture geodesic(const GaussianMixture& mu0, const GaussianMixture& mu1, double t) {
  return geodesic(mu0, mu1, mixture_distance(mu0, mu1).plan, t);
}

ScalingCheck scaling_check(const GaussianMixture& mu0, const GaussianMixture& mu1, double s,
                           double t) {
  if (!(s >= 0.0 && s < t && t <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "scaling check needs 0 <= s < t <= 1");
  }
  const MixtureDistance full = mixture_distance(mu0, mu1);
  const GaussianMixture mu_s = geodesic(mu0, mu1, full.plan, s);
  const GaussianMixture mu_t = geodesic(mu0, mu1, full.plan, t);
  return {mixture_distance(mu_s, mu_t).distance, (t - s) * full.distance};
}

Eigen::VectorXd density(const GaussianMixture& mu, const Eigen::MatrixXd& points) {
  if (points.cols() != mu.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "grid dimension does not match the mixture");
  }
  const double d = static_cast<double>(mu.dim());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(points.rows());
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const Gaussian& g = mu.components()[k];
    Eigen::LLT<Eigen::MatrixXd> llt(g.cov);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorKind::Singular, "mixture component covariance is not positive definite");
    }
    const Eigen::MatrixXd l = llt.matrixL();
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    const double log_norm = -0.5 * (d * std::log(2.0 * std::numbers::pi) + log_det);
    const Eigen::MatrixXd centred = (points.rowwise() - g.mean.transpose()).transpose();
    const Eigen::MatrixXd z = llt.matrixL().solve(centred);
    const Eigen::VectorXd q = z.colwise().squaredNorm().transpose();
    out.array() += mu.weights()[k] * (log_norm - 0.5 * q.array()).exp();
  }
  return out;
}

Eigen::VectorXd grid_ot_interpolation(const GaussianMixture& mu0, const GaussianMixture& mu1,
                                      const Eigen::VectorXd& grid, double t) {
  if (mu0.dim() != 1 || mu1.dim() != 1) {
    throw Error(ErrorKind::DimensionMismatch, "grid OT interpolation is one-dimensional");
  }
  if (grid.size() < 2) throw Error(ErrorKind::InvalidArgument, "grid needs at least two points");
  if (!(t >= 0.0 && t <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "interpolation time must lie in [0, 1]");
  }
  const Eigen::Index n = grid.size();
  const double lo = grid(0);
  const double h = (grid(n - 1) - lo) / static_cast<double>(n - 1);

  auto binned = [&](const GaussianMixture& mu) {
    Eigen::VectorXd mass = density(mu, grid) * h;
    const double total = mass.sum();
    if (!(total > 0.0)) throw Error(ErrorKind::InvalidArgument, "mixture has no mass on the grid");
    return Eigen::VectorXd(mass / total);
  };
  TransportProblem problem;
  problem.p0 = binned(mu0);
  problem.p1 = binned(mu1);
  problem.cost = Eigen::MatrixXd(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    problem.cost.col(j) = (grid.array() - grid(j)).square();
  }
  const TransportPlan plan = solve(problem);

  // Linear deposit onto the two nearest nodes conserves mass.
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(n);
  for (const auto& [i, j] : plan.basis) {
    const double m = plan.pi(i, j);
    if (m <= 0.0) continue;
    const double pos = ((1.0 - t) * grid(i) + t * grid(j) - lo) / h;
    const auto left = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(pos)), 0, n - 2);
    const double frac = std::clamp(pos - static_cast<double>(left), 0.0, 1.0);
    mass(left) += m * (1.0 - frac);
    mass(left + 1) += m * frac;
  }
  return mass / h;
}

}  // namespace kgmm
