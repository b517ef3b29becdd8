#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "kgmm/kernel_core.hpp"

namespace kgmm {

/// N(mean, cov) in input space.
struct Gaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  Gaussian() = default;
  Gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  Eigen::Index dim() const { return mean.size(); }

  /// Sample mean and biased (divide-by-n) sample covariance.
  static Gaussian fit(const Dataset& data);
};

/// Squared 2-Wasserstein distance
///   |m0 - m1|^2 + tr(C0 + C1 - 2 (C0^1/2 C1 C0^1/2)^1/2).
/// Exactly 0 for identical arguments.
double w2_squared(const Gaussian& g0, const Gaussian& g1);

/// Point at time t on the W2 geodesic (McCann interpolant). Both covariances
/// must be strictly positive definite.
Gaussian interpolate(const Gaussian& g0, const Gaussian& g1, double t);

/// Entropy-regularised squared W2 with KL weight epsilon:
///   |m0 - m1|^2 + tr C0 + tr C1 - (eps/2)(tr M - log det M + d log 2 - 2d),
///   M = I + (I + (16/eps^2) C0 C1)^1/2.
double entropic_w2_squared(const Gaussian& g0, const Gaussian& g1, double epsilon);

/// The same quantity in the sigma parameterisation:
///   |m0 - m1|^2 + tr C0 + tr C1 - F,
///   F = tr D - d s2 (1 - log 2 s2) - s2 log det(D + s2 I),
///   D = (4 C0 C1 + s2^2 I)^1/2,  s2 = sigma^2.
/// Agrees with entropic_w2_squared when epsilon = 2 sigma^2.
double entropic_w2_squared_sigma(const Gaussian& g0, const Gaussian& g1, double sigma2);

/// Gaussian at time t on the entropic interpolation path. The mean follows
/// (1 - t) m0 + t m1 so the endpoints are g0 and g1.
Gaussian entropic_interpolate(const Gaussian& g0, const Gaussian& g1, double t, double epsilon);

struct BarycenterOptions {
  int max_iter = 500;
  double tol = 1e-10;
  /// Step length of C <- (1 - damping) C + damping F(C); 1 is the plain map.
  double damping = 1.0;
};

struct BarycenterResult {
  Gaussian barycenter;
  int iterations = 0;
  /// Frobenius norm of F(C) - C at the returned C.
  double residual = 0.0;
};

/// Fixed-point iteration for the entropic barycenter
///   C = (eps/4) sum_i w_i (-I + (I + (16/eps^2) C^1/2 C_i C^1/2)^1/2),
/// started from sum_i w_i C_i. Throws Error(NoConvergence) with the last
/// residual if tol is not reached within max_iter.
BarycenterResult entropic_barycenter(std::span<const Gaussian> gaussians,
                                     std::span<const double> weights, double epsilon,
                                     const BarycenterOptions& options = {});

}  // namespace kgmm
