#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "kgmm/error.hpp"

namespace kgmm {

enum class KernelFamily { Rbf, Linear, Polynomial };

/// Positive semi-definite kernel k(a, b).
///
///   Rbf         exp(-gamma * |a - b|^2), gamma > 0
///   Linear      <a, b>
///   Polynomial  (<a, b> + offset)^degree
struct KernelSpec {
  KernelFamily family = KernelFamily::Rbf;
  double gamma = 1.0;
  double degree = 2.0;
  double offset = 1.0;

  static KernelSpec rbf(double gamma);
  static KernelSpec linear();
  static KernelSpec polynomial(double degree, double offset);

  /// Throws Error(InvalidArgument) when the parameters are out of domain.
  void validate() const;

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& a,
                    const Eigen::Ref<const Eigen::VectorXd>& b) const;

  bool operator==(const KernelSpec& other) const = default;
};

/// n points in R^d stored row-wise, optionally labelled by mixture component.
class Dataset {
 public:
  explicit Dataset(Eigen::MatrixXd points);
  Dataset(Eigen::MatrixXd points, std::vector<int> labels);

  Eigen::Index size() const { return points_.rows(); }
  Eigen::Index dim() const { return points_.cols(); }
  const Eigen::MatrixXd& points() const { return points_; }

  bool has_labels() const { return labels_.has_value(); }
  const std::vector<int>& labels() const;

  /// Distinct label values in ascending order; component i of a mixture built
  /// from this dataset is the group carrying label_values()[i].
  std::vector<int> label_values() const;

  /// Rows carrying `label`, in their original order (unlabelled result).
  Dataset group(int label) const;

  /// Rows at `indices`, in the given order; labels follow the rows.
  Dataset subset(const std::vector<Eigen::Index>& indices) const;

 private:
  Eigen::MatrixXd points_;
  std::optional<std::vector<int>> labels_;
};

/// |a| x |b| matrix with entry (i, j) = k(a_i, b_j).
Eigen::MatrixXd gram(const Dataset& a, const Dataset& b, const KernelSpec& spec);

/// J = (1/sqrt(n)) (I_n - s 1^T) with s = (1/n) 1. Applying J to a Gram matrix
/// centres the implicit feature vectors and scales them by 1/sqrt(n), so that
/// Phi J J^T Phi^T is the biased feature-space covariance.
class CenteringOperator {
 public:
  explicit CenteringOperator(Eigen::Index n);

  Eigen::Index size() const { return n_; }

  /// s = (1/n) 1, the weights producing the feature-space mean Phi s.
  Eigen::VectorXd s() const;
  /// Dense J.
  Eigen::MatrixXd matrix() const;
  /// Dense J J^T = (1/n)(I - (1/n) 1 1^T).
  Eigen::MatrixXd jjt() const;

  /// J^T M without materialising J (J is symmetric). M has n rows.
  Eigen::MatrixXd apply_left(const Eigen::MatrixXd& m) const;
  /// M J without materialising J. M has n columns.
  Eigen::MatrixXd apply_right(const Eigen::MatrixXd& m) const;

 private:
  Eigen::Index n_;
};

/// Throws Error(InvalidArgument) for n == 0.
CenteringOperator centering(Eigen::Index n);

/// Relative threshold below which eigenvalues and singular values are treated
/// as zero. Negative eigenvalues beyond it signal a non-PSD input.
inline constexpr double kSpectralTolerance = 1e-10;

/// Sum of singular values. Values below kSpectralTolerance * max are dropped.
double nuclear_norm(const Eigen::MatrixXd& b);

/// Symmetric PSD square root. Eigenvalues in [-tol*scale, 0) clamp to zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& c);

/// Inverse of psd_sqrt for strictly positive definite input; throws
/// Error(Singular) when the smallest eigenvalue is within tolerance of zero.
Eigen::MatrixXd pd_inv_sqrt(const Eigen::MatrixXd& c);

/// Eigenvalues of a symmetric PSD matrix in ascending order, clamped as in
/// psd_sqrt.
Eigen::VectorXd psd_eigenvalues(const Eigen::MatrixXd& c);

/// Nonzero eigenvalues of Sigma0 Sigma1, the product of the two biased
/// feature-space covariances, reached only through the cross Gram matrix K10
/// (rows index the second sample). They are the squared singular values of
/// J1^T K10 J0. Sorted descending.
Eigen::VectorXd product_spectrum(const Eigen::MatrixXd& k10, const CenteringOperator& j0,
                                 const CenteringOperator& j1);

/// Singular values of J1^T K10 J0 above tolerance, descending. The building
/// block for both product_spectrum and the KW2 cross term.
Eigen::VectorXd centred_cross_singular_values(const Eigen::MatrixXd& k10,
                                              const CenteringOperator& j0,
                                              const CenteringOperator& j1);

}  // namespace kgmm
