#pragma once

#include <Eigen/Dense>

#include <vector>

#include "kgmm/discrete_ot.hpp"
#include "kgmm/gaussian_w2.hpp"
#include "kgmm/rkhs_w2.hpp"

namespace kgmm {

/// Checks p >= 0 and |sum p - 1| <= 1e-9; returns p renormalised to sum 1.
std::vector<double> checked_weights(std::vector<double> weights);

/// sum_k p_k N(theta_k, C_k) in input space.
class GaussianMixture {
 public:
  GaussianMixture(std::vector<Gaussian> components, std::vector<double> weights);

  std::size_t size() const { return components_.size(); }
  Eigen::Index dim() const { return components_.front().dim(); }
  const std::vector<Gaussian>& components() const { return components_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<Gaussian> components_;
  std::vector<double> weights_;
};

/// Mixture of RKHS Gaussians, one per labelled group of a dataset.
class KernelMixture {
 public:
  KernelMixture(std::vector<RkhsGaussian> groups, std::vector<double> weights);

  /// One component per distinct label (ascending label order).
  static KernelMixture from_labelled(const Dataset& data, const KernelSpec& spec,
                                     std::vector<double> weights);

  std::size_t size() const { return groups_.size(); }
  const std::vector<RkhsGaussian>& groups() const { return groups_; }
  const std::vector<double>& weights() const { return weights_; }
  const KernelSpec& spec() const { return groups_.front().spec(); }

 private:
  std::vector<RkhsGaussian> groups_;
  std::vector<double> weights_;
};

struct MixtureDistance {
  double distance = 0.0;
  Eigen::MatrixXd cost;
  TransportPlan plan;
};

/// c_ij = W2^2 between component i of mu0 and component j of mu1.
Eigen::MatrixXd w2_cost_matrix(const GaussianMixture& mu0, const GaussianMixture& mu1);

/// c_ij = KW2^2 between group i of the first mixture and group j of the second.
Eigen::MatrixXd kw2_cost_matrix(const std::vector<RkhsGaussian>& groups0,
                                const std::vector<RkhsGaussian>& groups1);

/// sqrt of the optimal discrete transport cost between the weight vectors
/// under `cost`.
MixtureDistance distance_from_cost(Eigen::MatrixXd cost, const std::vector<double>& p0,
                                   const std::vector<double>& p1);

/// Mixture distance with W2^2 component costs. The pair is evaluated in a
/// canonical order, so swapping the arguments returns the same distance
/// bitwise and the transposed plan.
MixtureDistance mixture_distance(const GaussianMixture& mu0, const GaussianMixture& mu1);

/// Mixture distance with KW2^2 component costs in the shared RKHS; same
/// canonical ordering.
MixtureDistance kernel_mixture_distance(const KernelMixture& mu0, const KernelMixture& mu1);

/// Plan entries at or below this are dropped from geodesic mixtures.
inline constexpr double kGeodesicWeightFloor = 1e-14;

/// Mixture at time t on the geodesic: weights pi*_ij, components the W2
/// interpolants of (component i of mu0, component j of mu1).
GaussianMixture geodesic(const GaussianMixture& mu0, const GaussianMixture& mu1, double t);

/// Same, for a plan that is already known.
GaussianMixture geodesic(const GaussianMixture& mu0, const GaussianMixture& mu1,
                         const TransportPlan& plan, double t);

struct ScalingCheck {
  double between;   ///< d(mu_s, mu_t) between the two geodesic mixtures
  double expected;  ///< (t - s) d(mu0, mu1)
};

/// Harness for d(mu_s, mu_t) = (t - s) d(mu0, mu1), 0 <= s < t <= 1.
ScalingCheck scaling_check(const GaussianMixture& mu0, const GaussianMixture& mu1, double s,
                           double t);

/// Mixture density at each row of `points`.
Eigen::VectorXd density(const GaussianMixture& mu, const Eigen::MatrixXd& points);

/// Density at time t of the displacement interpolation of the plain W2
/// optimal transport between two 1-D mixtures, discretised on `grid`
/// (ascending, uniform). Each mixture is binned onto the grid, the binned
/// masses are coupled with `solve`, the coupled mass moves to (1-t)x + t y,
/// and the result is re-binned and divided by the spacing.
Eigen::VectorXd grid_ot_interpolation(const GaussianMixture& mu0, const GaussianMixture& mu1,
                                      const Eigen::VectorXd& grid, double t);

}  // namespace kgmm
