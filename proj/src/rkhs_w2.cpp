#include "kgmm/rkhs_w2.hpp"

#include <charconv>
#include <cmath>

namespace kgmm {

namespace {

void require_same_spec(const RkhsGaussian& a, const RkhsGaussian& b) {
  if (!(a.spec() == b.spec())) {
    throw Error(ErrorKind::InvalidArgument, "RKHS Gaussians use different kernels");
  }
}

// Values in [-tol*scale, 0) are roundoff and clamp to zero; anything lower
// means an upstream bug.
double clamp_nonnegative(double value, double scale, const char* what) {
  if (value >= 0.0) return value;
  if (value >= -kSpectralTolerance * scale) return 0.0;
  throw Error(ErrorKind::NotPositiveSemidefinite,
              std::string(what) + " is negative beyond tolerance: " + std::to_string(value));
}

double trace_term(const Eigen::MatrixXd& k) {
  const double n = static_cast<double>(k.rows());
  const double value = (k.trace() - k.sum() / n) / n;
  return clamp_nonnegative(value, std::abs(k.trace()) / n, "covariance trace");
}

struct MmdParts {
  double value;
  double scale;
};

MmdParts mmd_from_grams(const Eigen::MatrixXd& k00, const Eigen::MatrixXd& k11,
                        const Eigen::MatrixXd& k10) {
  const double m00 = k00.mean();
  const double m11 = k11.mean();
  const double m01 = k10.mean();
  const double scale = std::abs(m00) + std::abs(m11) + 2.0 * std::abs(m01);
  return {clamp_nonnegative(m00 - 2.0 * m01 + m11, scale, "MMD^2"), scale};
}

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be positive and finite");
  }
}

}  // namespace

RkhsGaussian::RkhsGaussian(Dataset data, KernelSpec spec)
    : data_(std::move(data)), spec_(spec) {
  spec_.validate();
}

double mmd_squared(const RkhsGaussian& a, const RkhsGaussian& b) {
  require_same_spec(a, b);
  const auto& spec = a.spec();
  return mmd_from_grams(gram(a.data(), a.data(), spec), gram(b.data(), b.data(), spec),
                        gram(b.data(), a.data(), spec))
      .value;
}

double covariance_trace(const RkhsGaussian& a) {
  return trace_term(gram(a.data(), a.data(), a.spec()));
}

KernelPairTerms kernel_pair_terms(const RkhsGaussian& a, const RkhsGaussian& b) {
  require_same_spec(a, b);
  const auto& spec = a.spec();
  const Eigen::MatrixXd k00 = gram(a.data(), a.data(), spec);
  const Eigen::MatrixXd k11 = gram(b.data(), b.data(), spec);
  const Eigen::MatrixXd k10 = gram(b.data(), a.data(), spec);

  KernelPairTerms terms;
  terms.n0 = a.size();
  terms.n1 = b.size();
  const auto& pa = a.data().points();
  const auto& pb = b.data().points();
  terms.identical = pa.rows() == pb.rows() && pa.cols() == pb.cols() && pa == pb;
  terms.mmd_squared = mmd_from_grams(k00, k11, k10).value;
  terms.trace0 = trace_term(k00);
  terms.trace1 = trace_term(k11);
  terms.cross_singular_values =
      centred_cross_singular_values(k10, centering(a.size()), centering(b.size()));
  return terms;
}

double KernelPairTerms::kw2_squared() const {
  if (identical) return 0.0;
  double nuclear = 0.0;
  for (Eigen::Index i = cross_singular_values.size() - 1; i >= 0; --i) {
    nuclear += cross_singular_values(i);
  }
  const double value = mmd_squared + trace0 + trace1 - 2.0 * nuclear;
  return clamp_nonnegative(value, mmd_squared + trace0 + trace1 + 2.0 * nuclear, "KW2^2");
}

Eigen::VectorXd KernelPairTerms::product_eigenvalues() const {
  return cross_singular_values.array().square();
}

double kw2_squared(const RkhsGaussian& a, const RkhsGaussian& b) {
  return kernel_pair_terms(a, b).kw2_squared();
}

AmbientDimPolicy AmbientDimPolicy::parse(std::string_view text) {
  if (text == "rank") return effective_rank();
  if (text == "span") return span();
  constexpr std::string_view prefix = "fixed:";
  if (text.substr(0, prefix.size()) == prefix) {
    const auto digits = text.substr(prefix.size());
    long value = 0;
    const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec == std::errc() && end == digits.data() + digits.size() && value >= 0) {
      return fixed_dim(value);
    }
  }
  throw Error(ErrorKind::InvalidArgument,
              "invalid l policy '" + std::string(text) + "' (expected rank, span or fixed:<n>)");
}

std::string AmbientDimPolicy::to_string() const {
  switch (kind) {
    case Kind::EffectiveRank: return "rank";
    case Kind::Span: return "span";
    case Kind::Fixed: return "fixed:" + std::to_string(fixed);
  }
  return "rank";
}

long AmbientDimPolicy::resolve(Eigen::Index rank, Eigen::Index n0, Eigen::Index n1) const {
  switch (kind) {
    case Kind::EffectiveRank:
      return static_cast<long>(rank);
    case Kind::Span:
      return static_cast<long>(n0 + n1);
    case Kind::Fixed:
      if (fixed < rank) {
        throw Error(ErrorKind::InvalidArgument,
                    "fixed ambient dimension " + std::to_string(fixed) + " is below the " +
                        std::to_string(rank) + " nonzero eigenvalues of Sigma0 Sigma1");
      }
      return fixed;
  }
  return static_cast<long>(rank);
}

std::string_view to_string(EntropicExpansion e) {
  return e == EntropicExpansion::Complete ? "complete" : "log5";
}

EntropicExpansion parse_entropic_expansion(std::string_view text) {
  if (text == "complete") return EntropicExpansion::Complete;
  if (text == "log5") return EntropicExpansion::Log5;
  throw Error(ErrorKind::InvalidArgument,
              "invalid entropic expansion '" + std::string(text) + "' (expected complete or log5)");
}

double entropic_kw2_squared(const KernelPairTerms& terms, double epsilon, AmbientDimPolicy policy,
                            EntropicExpansion expansion) {
  require_positive(epsilon, "epsilon");
  const Eigen::VectorXd lambda = terms.product_eigenvalues();
  const Eigen::Index k = lambda.size();
  const double l = static_cast<double>(policy.resolve(k, terms.n0, terms.n1));
  const double a = 16.0 / (epsilon * epsilon);

  double sum_root = 0.0;
  double sum_log = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double root = std::sqrt(1.0 + a * lambda(i));
    sum_root += root;
    sum_log += std::log1p(root);
  }

  double bracket = 0.0;
  if (expansion == EntropicExpansion::Complete) {
    const double zeros = l - static_cast<double>(k);
    const double trace_m = l + sum_root + zeros;
    const double log_det_m = sum_log + zeros * std::log(2.0);
    bracket = trace_m - log_det_m + l * std::log(2.0) - 2.0 * l;
  } else {
    bracket = sum_root - sum_log - l * std::log(5.0);
  }
  return terms.mmd_squared + terms.trace0 + terms.trace1 - 0.5 * epsilon * bracket;
}

double entropic_kw2_sigma(const KernelPairTerms& terms, double sigma2, AmbientDimPolicy policy,
                          EntropicExpansion expansion) {
  require_positive(sigma2, "sigma^2");
  const Eigen::VectorXd lambda = terms.product_eigenvalues();
  const Eigen::Index k = lambda.size();
  const double l = static_cast<double>(policy.resolve(k, terms.n0, terms.n1));
  const double sigma4 = sigma2 * sigma2;

  double sum_root = 0.0;
  double sum_log = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double root = std::sqrt(4.0 * lambda(i) / sigma4 + 1.0);
    sum_root += root;
    sum_log += std::log(root + 1.0);
  }

  double f = 0.0;
  if (expansion == EntropicExpansion::Complete) {
    const double zeros = l - static_cast<double>(k);
    const double trace_d = sigma2 * (sum_root + zeros);
    const double log_det = l * std::log(sigma2) + sum_log + zeros * std::log(2.0);
    f = trace_d - l * sigma2 * (1.0 - std::log(2.0 * sigma2)) - sigma2 * log_det;
  } else {
    f = sigma2 * (sum_root - sum_log - l * std::log(5.0));
  }
  return terms.mmd_squared + terms.trace0 + terms.trace1 - f;
}

double entropic_kw2_squared(const RkhsGaussian& a, const RkhsGaussian& b, double epsilon,
                            AmbientDimPolicy l, EntropicExpansion expansion) {
  require_positive(epsilon, "epsilon");
  return entropic_kw2_squared(kernel_pair_terms(a, b), epsilon, l, expansion);
}

double entropic_kw2_sigma(const RkhsGaussian& a, const RkhsGaussian& b, double sigma2,
                          AmbientDimPolicy l, EntropicExpansion expansion) {
  require_positive(sigma2, "sigma^2");
  return entropic_kw2_sigma(kernel_pair_terms(a, b), sigma2, l, expansion);
}

}  // namespace kgmm
