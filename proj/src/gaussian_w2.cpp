#include "kgmm/gaussian_w2.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numeric>
#include <string>

namespace kgmm {

namespace {

void require_same_dim(const Gaussian& g0, const Gaussian& g1) {
  if (g0.dim() != g1.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "Gaussians differ in dimension");
  }
}

void require_unit_interval(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "interpolation time must lie in [0, 1]");
  }
}

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be positive and finite");
  }
}

Eigen::MatrixXd symmetrised(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

Gaussian::Gaussian(Eigen::VectorXd mean_, Eigen::MatrixXd cov_)
    : mean(std::move(mean_)), cov(std::move(cov_)) {
  if (mean.size() < 1 || cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw Error(ErrorKind::DimensionMismatch, "covariance shape does not match mean");
  }
  if (!mean.allFinite() || !cov.allFinite()) {
    throw Error(ErrorKind::NonFinite, "Gaussian parameters must be finite");
  }
}

Gaussian Gaussian::fit(const Dataset& data) {
  const Eigen::MatrixXd& x = data.points();
  Eigen::VectorXd mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centred = x.rowwise() - mean.transpose();
  Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(x.rows());
  return Gaussian(std::move(mean), symmetrised(cov));
}

double w2_squared(const Gaussian& g0, const Gaussian& g1) {
  require_same_dim(g0, g1);
  const Eigen::MatrixXd root0 = psd_sqrt(g0.cov);
  psd_eigenvalues(g1.cov);  // rejects a non-PSD C1
  if (g0.mean == g1.mean && g0.cov == g1.cov) return 0.0;
  const Eigen::VectorXd cross = psd_eigenvalues(symmetrised(root0 * g1.cov * root0));
  const double value = (g0.mean - g1.mean).squaredNorm() + g0.cov.trace() + g1.cov.trace() -
                       2.0 * cross.cwiseSqrt().sum();
  return std::max(0.0, value);
}

Gaussian interpolate(const Gaussian& g0, const Gaussian& g1, double t) {
  require_same_dim(g0, g1);
  require_unit_interval(t);
  pd_inv_sqrt(g0.cov);  // both endpoints must be non-degenerate
  const Eigen::MatrixXd root1 = psd_sqrt(g1.cov);
  const Eigen::MatrixXd q = root1 * pd_inv_sqrt(symmetrised(root1 * g0.cov * root1)) * root1;
  const Eigen::Index d = g0.dim();
  const Eigen::MatrixXd a = (1.0 - t) * Eigen::MatrixXd::Identity(d, d) + t * symmetrised(q);
  return Gaussian((1.0 - t) * g0.mean + t * g1.mean, symmetrised(a * g0.cov * a));
}

double entropic_w2_squared(const Gaussian& g0, const Gaussian& g1, double epsilon) {
  require_same_dim(g0, g1);
  require_positive(epsilon, "epsilon");
  // Spectrum of C0 C1 through the symmetric surrogate C0^1/2 C1 C0^1/2.
  const Eigen::MatrixXd root0 = psd_sqrt(g0.cov);
  psd_eigenvalues(g1.cov);
  const Eigen::VectorXd lambda = psd_eigenvalues(symmetrised(root0 * g1.cov * root0));

  const double d = static_cast<double>(g0.dim());
  const double a = 16.0 / (epsilon * epsilon);
  double trace_m = 0.0;
  double log_det_m = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    const double root = std::sqrt(1.0 + a * lambda(i));
    trace_m += 1.0 + root;
    log_det_m += std::log1p(root);
  }
  const double b = 0.5 * epsilon * (trace_m - log_det_m + d * std::log(2.0) - 2.0 * d);
  return (g0.mean - g1.mean).squaredNorm() + g0.cov.trace() + g1.cov.trace() - b;
}

double entropic_w2_squared_sigma(const Gaussian& g0, const Gaussian& g1, double sigma2) {
  require_same_dim(g0, g1);
  require_positive(sigma2, "sigma^2");
  // Same spectrum as C0 C1, reached through C1^1/2 C0 C1^1/2.
  const Eigen::MatrixXd root1 = psd_sqrt(g1.cov);
  psd_eigenvalues(g0.cov);
  const Eigen::VectorXd lambda = psd_eigenvalues(symmetrised(root1 * g0.cov * root1));

  const double d = static_cast<double>(g0.dim());
  const double sigma4 = sigma2 * sigma2;
  double trace_d = 0.0;
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    const double eig_d = std::sqrt(4.0 * lambda(i) + sigma4);
    trace_d += eig_d;
    log_det += std::log(eig_d + sigma2);
  }
  const double f = trace_d - d * sigma2 * (1.0 - std::log(2.0 * sigma2)) - sigma2 * log_det;
  return (g0.mean - g1.mean).squaredNorm() + g0.cov.trace() + g1.cov.trace() - f;
}

Gaussian entropic_interpolate(const Gaussian& g0, const Gaussian& g1, double t, double epsilon) {
  require_same_dim(g0, g1);
  require_unit_interval(t);
  require_positive(epsilon, "epsilon");
  psd_eigenvalues(g0.cov);
  psd_eigenvalues(g1.cov);
  const Eigen::Index d = g0.dim();
  // (e^2/16 I + C1 C0)^1/2 is the transpose of (e^2/16 I + C0 C1)^1/2.
  const Eigen::MatrixXd shifted =
      (epsilon * epsilon / 16.0) * Eigen::MatrixXd::Identity(d, d) + g0.cov * g1.cov;
  const Eigen::MatrixXd root = shifted.sqrt();
  const Eigen::MatrixXd cov = (1.0 - t) * (1.0 - t) * g0.cov + t * t * g1.cov +
                              t * (1.0 - t) * (root + root.transpose());
  return Gaussian((1.0 - t) * g0.mean + t * g1.mean, symmetrised(cov));
}

BarycenterResult entropic_barycenter(std::span<const Gaussian> gaussians,
                                     std::span<const double> weights, double epsilon,
                                     const BarycenterOptions& options) {
  require_positive(epsilon, "epsilon");
  if (gaussians.empty() || gaussians.size() != weights.size()) {
    throw Error(ErrorKind::InvalidArgument, "barycenter needs one weight per Gaussian");
  }
  if (!(options.damping > 0.0 && options.damping <= 1.0) || options.max_iter < 1 ||
      !(options.tol > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "invalid barycenter options");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error(ErrorKind::InvalidArgument, "barycenter weights must be >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorKind::InvalidArgument, "barycenter weights must sum to 1");
  }

  const Eigen::Index d = gaussians.front().dim();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < gaussians.size(); ++i) {
    require_same_dim(gaussians.front(), gaussians[i]);
    psd_eigenvalues(gaussians[i].cov);
    mean += weights[i] * gaussians[i].mean;
    cov += weights[i] * gaussians[i].cov;
  }

  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);
  const double a = 16.0 / (epsilon * epsilon);
  auto fixed_point_map = [&](const Eigen::MatrixXd& c) {
    const Eigen::MatrixXd root = psd_sqrt(c);
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i = 0; i < gaussians.size(); ++i) {
      const Eigen::MatrixXd inner = symmetrised(identity + a * root * gaussians[i].cov * root);
      next += weights[i] * (psd_sqrt(inner) - identity);
    }
    return symmetrised(0.25 * epsilon * next);
  };

  double residual = 0.0;
  for (int iter = 0; iter <= options.max_iter; ++iter) {
    const Eigen::MatrixXd mapped = fixed_point_map(cov);
    residual = (mapped - cov).norm();
    if (residual <= options.tol) {
      return BarycenterResult{Gaussian(mean, cov), iter, residual};
    }
    if (iter == options.max_iter) break;
    cov = symmetrised((1.0 - options.damping) * cov + options.damping * mapped);
  }
  throw Error(ErrorKind::NoConvergence,
              "entropic barycenter did not converge in " + std::to_string(options.max_iter) +
                  " iterations (residual " + std::to_string(residual) + ")");
}

}  // namespace kgmm
