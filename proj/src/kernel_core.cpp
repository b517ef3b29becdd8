#include "kgmm/kernel_core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace kgmm {

namespace {

constexpr double kSymmetryTolerance = 1e-8;

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorKind::NonFinite, std::string(what) + " contains non-finite entries");
  }
}

// Eigen-decomposition of a symmetric PSD matrix with the shared clamping rule.
Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> checked_eigen(const Eigen::MatrixXd& c) {
  if (c.rows() != c.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "expected a square matrix");
  }
  require_finite(c, "matrix");
  const double magnitude = c.cwiseAbs().maxCoeff();
  if (c.size() > 0 && (c - c.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * magnitude) {
    throw Error(ErrorKind::NotPositiveSemidefinite, "matrix is not symmetric");
  }
  const Eigen::MatrixXd sym = 0.5 * (c + c.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorKind::NoConvergence, "eigendecomposition failed");
  }
  return eig;
}

Eigen::VectorXd clamp_spectrum(const Eigen::VectorXd& values) {
  if (values.size() == 0) return values;
  const double scale = values.cwiseAbs().maxCoeff();
  const double tol = kSpectralTolerance * scale;
  if (values.minCoeff() < -tol) {
    throw Error(ErrorKind::NotPositiveSemidefinite,
                "matrix has eigenvalue " + std::to_string(values.minCoeff()) +
                    " below -tol*scale");
  }
  return values.unaryExpr([tol](double v) { return v <= tol ? 0.0 : v; });
}

}  // namespace

KernelSpec KernelSpec::rbf(double gamma) {
  KernelSpec spec;
  spec.family = KernelFamily::Rbf;
  spec.gamma = gamma;
  spec.validate();
  return spec;
}

KernelSpec KernelSpec::linear() {
  KernelSpec spec;
  spec.family = KernelFamily::Linear;
  return spec;
}

KernelSpec KernelSpec::polynomial(double degree, double offset) {
  KernelSpec spec;
  spec.family = KernelFamily::Polynomial;
  spec.degree = degree;
  spec.offset = offset;
  spec.validate();
  return spec;
}

void KernelSpec::validate() const {
  switch (family) {
    case KernelFamily::Rbf:
      if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw Error(ErrorKind::InvalidArgument, "RBF kernel requires gamma > 0");
      }
      break;
    case KernelFamily::Polynomial:
      // Non-integer degrees are not PSD in general.
      if (!(degree >= 1.0) || degree != std::floor(degree) || !(offset >= 0.0)) {
        throw Error(ErrorKind::InvalidArgument,
                    "polynomial kernel requires integer degree >= 1 and offset >= 0");
      }
      break;
    case KernelFamily::Linear:
      break;
  }
}

double KernelSpec::operator()(const Eigen::Ref<const Eigen::VectorXd>& a,
                              const Eigen::Ref<const Eigen::VectorXd>& b) const {
  switch (family) {
    case KernelFamily::Rbf:
      return std::exp(-gamma * (a - b).squaredNorm());
    case KernelFamily::Linear:
      return a.dot(b);
    case KernelFamily::Polynomial:
      return std::pow(a.dot(b) + offset, degree);
  }
  return 0.0;
}

Dataset::Dataset(Eigen::MatrixXd points) : points_(std::move(points)) {
  if (points_.rows() < 1 || points_.cols() < 1) {
    throw Error(ErrorKind::InvalidArgument, "dataset needs at least one point and one feature");
  }
  require_finite(points_, "dataset");
}

Dataset::Dataset(Eigen::MatrixXd points, std::vector<int> labels) : Dataset(std::move(points)) {
  if (static_cast<Eigen::Index>(labels.size()) != points_.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "label count does not match point count");
  }
  labels_ = std::move(labels);
}

const std::vector<int>& Dataset::labels() const {
  if (!labels_) throw Error(ErrorKind::InvalidArgument, "dataset has no labels");
  return *labels_;
}

std::vector<int> Dataset::label_values() const {
  const auto& l = labels();
  std::set<int> distinct(l.begin(), l.end());
  return {distinct.begin(), distinct.end()};
}

Dataset Dataset::group(int label) const {
  const auto& l = labels();
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (l[i] == label) rows.push_back(static_cast<Eigen::Index>(i));
  }
  if (rows.empty()) {
    throw Error(ErrorKind::InvalidArgument, "no points carry label " + std::to_string(label));
  }
  return Dataset(points_(rows, Eigen::all));
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& indices) const {
  for (auto i : indices) {
    if (i < 0 || i >= size()) throw Error(ErrorKind::InvalidArgument, "subset index out of range");
  }
  Eigen::MatrixXd rows = points_(indices, Eigen::all);
  if (!labels_) return Dataset(std::move(rows));
  std::vector<int> sub;
  sub.reserve(indices.size());
  for (auto i : indices) sub.push_back((*labels_)[static_cast<std::size_t>(i)]);
  return Dataset(std::move(rows), std::move(sub));
}

Eigen::MatrixXd gram(const Dataset& a, const Dataset& b, const KernelSpec& spec) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "datasets differ in feature dimension");
  }
  spec.validate();
  // Column-major traversal over b's points; every entry is computed on its own.
  const Eigen::MatrixXd at = a.points().transpose();
  const Eigen::MatrixXd bt = b.points().transpose();
  Eigen::MatrixXd k(a.size(), b.size());
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      k(i, j) = spec(at.col(i), bt.col(j));
    }
  }
  return k;
}

CenteringOperator::CenteringOperator(Eigen::Index n) : n_(n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "centering operator needs n >= 1");
}

Eigen::VectorXd CenteringOperator::s() const {
  return Eigen::VectorXd::Constant(n_, 1.0 / static_cast<double>(n_));
}

Eigen::MatrixXd CenteringOperator::matrix() const {
  const double n = static_cast<double>(n_);
  Eigen::MatrixXd j = Eigen::MatrixXd::Identity(n_, n_);
  j.array() -= 1.0 / n;
  return j / std::sqrt(n);
}

Eigen::MatrixXd CenteringOperator::jjt() const {
  const double n = static_cast<double>(n_);
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n_, n_);
  p.array() -= 1.0 / n;
  return p / n;
}

Eigen::MatrixXd CenteringOperator::apply_left(const Eigen::MatrixXd& m) const {
  if (m.rows() != n_) throw Error(ErrorKind::DimensionMismatch, "centering: row count mismatch");
  const Eigen::RowVectorXd mean = m.colwise().mean();
  return (m.rowwise() - mean) / std::sqrt(static_cast<double>(n_));
}

Eigen::MatrixXd CenteringOperator::apply_right(const Eigen::MatrixXd& m) const {
  if (m.cols() != n_) throw Error(ErrorKind::DimensionMismatch, "centering: column count mismatch");
  const Eigen::VectorXd mean = m.rowwise().mean();
  return (m.colwise() - mean) / std::sqrt(static_cast<double>(n_));
}

CenteringOperator centering(Eigen::Index n) { return CenteringOperator(n); }

double nuclear_norm(const Eigen::MatrixXd& b) {
  require_finite(b, "matrix");
  if (b.size() == 0) return 0.0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(b);
  const Eigen::VectorXd sv = svd.singularValues();
  const double tol = kSpectralTolerance * sv.maxCoeff();
  double sum = 0.0;
  // Ascending summation keeps the small tail from being swamped.
  for (Eigen::Index i = sv.size() - 1; i >= 0; --i) {
    if (sv(i) > tol) sum += sv(i);
  }
  return sum;
}

Eigen::VectorXd psd_eigenvalues(const Eigen::MatrixXd& c) {
  return clamp_spectrum(checked_eigen(c).eigenvalues());
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& c) {
  const auto eig = checked_eigen(c);
  const Eigen::VectorXd root = clamp_spectrum(eig.eigenvalues()).cwiseSqrt();
  const Eigen::MatrixXd& v = eig.eigenvectors();
  Eigen::MatrixXd m = v * root.asDiagonal() * v.transpose();
  return 0.5 * (m + m.transpose());
}

Eigen::MatrixXd pd_inv_sqrt(const Eigen::MatrixXd& c) {
  const auto eig = checked_eigen(c);
  const Eigen::VectorXd values = clamp_spectrum(eig.eigenvalues());
  if (values.size() == 0 || values.minCoeff() <= 0.0) {
    throw Error(ErrorKind::Singular, "matrix is singular; inverse square root undefined");
  }
  const Eigen::MatrixXd& v = eig.eigenvectors();
  Eigen::MatrixXd m = v * values.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
  return 0.5 * (m + m.transpose());
}

Eigen::VectorXd centred_cross_singular_values(const Eigen::MatrixXd& k10,
                                              const CenteringOperator& j0,
                                              const CenteringOperator& j1) {
  if (k10.rows() != j1.size() || k10.cols() != j0.size()) {
    throw Error(ErrorKind::DimensionMismatch, "cross Gram shape does not match centering operators");
  }
  require_finite(k10, "cross Gram matrix");
  const Eigen::MatrixXd b = j0.apply_right(j1.apply_left(k10));
  Eigen::BDCSVD<Eigen::MatrixXd> svd(b);
  const Eigen::VectorXd sv = svd.singularValues();  // descending
  if (sv.size() == 0 || sv(0) <= 0.0) return Eigen::VectorXd(0);
  // Anchor the threshold to the uncentred scale too: centring a constant
  // block leaves only roundoff, which must not survive as a spectrum.
  const double raw_scale =
      k10.norm() / std::sqrt(static_cast<double>(k10.rows()) * static_cast<double>(k10.cols()));
  const double tol = kSpectralTolerance * std::max(sv(0), raw_scale);
  Eigen::Index kept = 0;
  while (kept < sv.size() && sv(kept) > tol) ++kept;
  return sv.head(kept);
}

Eigen::VectorXd product_spectrum(const Eigen::MatrixXd& k10, const CenteringOperator& j0,
                                 const CenteringOperator& j1) {
  return centred_cross_singular_values(k10, j0, j1).array().square();
}

}  // namespace kgmm
