#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kgmm/experiments.hpp"
#include "kgmm/gmm_ot.hpp"
#include "test_support.hpp"

using namespace kgmm;
using kgmm::testing::random_gaussian;

namespace {

Gaussian scalar(double mean, double var) {
  return Gaussian(Eigen::VectorXd::Constant(1, mean), Eigen::MatrixXd::Constant(1, 1, var));
}

std::vector<double> random_weights(std::mt19937_64& rng, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(n);
  double total = 0.0;
  for (auto& x : w) total += (x = e(rng));
  for (auto& x : w) x /= total;
  return w;
}

GaussianMixture random_mixture(std::mt19937_64& rng, std::size_t n, Eigen::Index d) {
  std::vector<Gaussian> comps;
  for (std::size_t i = 0; i < n; ++i) comps.push_back(random_gaussian(rng, d));
  return GaussianMixture(comps, random_weights(rng, n));
}

}  // namespace

TEST(Mixture, ValidatesWeightsAndDimensions) {
  EXPECT_THROW(GaussianMixture({scalar(0, 1), scalar(1, 1)}, {0.5, 0.6}), Error);
  EXPECT_THROW(GaussianMixture({scalar(0, 1)}, {0.5, 0.5}), Error);
  EXPECT_THROW(GaussianMixture({scalar(0, 1), Gaussian(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity())},
                               {0.5, 0.5}),
               Error);
  EXPECT_THROW(GaussianMixture({scalar(0, 1), scalar(1, 1)}, {1.1, -0.1}), Error);
}

TEST(MixtureDistance, IdenticalIsZero) {
  const auto [mu0, mu1] = example_mixtures();
  EXPECT_NEAR(mixture_distance(mu0, mu0).distance, 0.0, 1e-10);
  EXPECT_NEAR(mixture_distance(mu1, mu1).distance, 0.0, 1e-10);
}

TEST(MixtureDistance, SingleComponentsReduceToW2) {
  std::mt19937_64 rng(51);
  const Gaussian a = random_gaussian(rng, 2), b = random_gaussian(rng, 2);
  EXPECT_NEAR(mixture_distance(GaussianMixture({a}, {1.0}), GaussianMixture({b}, {1.0})).distance,
              std::sqrt(w2_squared(a, b)), 1e-14);
}

TEST(MixtureDistance, ExampleMixtures) {
  const auto [mu0, mu1] = example_mixtures();
  const auto result = mixture_distance(mu0, mu1);
  const Eigen::Matrix2d expected_cost =
      (Eigen::Matrix2d() << 0.16067544467966324, 0.36034314575050762, 0.040055728090000841, 0.16)
          .finished();
  EXPECT_LT((result.cost - expected_cost).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(result.distance, 0.35244765828545269, 1e-12);
  EXPECT_NEAR(result.plan.pi(0, 0), 0.3, 1e-12);
  const TransportProblem prob{result.cost, Eigen::Vector2d(0.3, 0.7), Eigen::Vector2d(0.6, 0.4)};
  EXPECT_NEAR(result.distance, std::sqrt(enumerate_optimum(prob, 100000)), 1e-6);
  EXPECT_NEAR(result.plan.objective, (result.cost.array() * result.plan.pi.array()).sum(), 1e-12);
}

TEST(MixtureDistance, MetricPropertiesOnRandomMixtures) {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 60; ++trial) {
    const Eigen::Index d = 1 + trial % 2;
    const auto a = random_mixture(rng, 1 + trial % 3, d);
    const auto b = random_mixture(rng, 1 + (trial / 3) % 3, d);
    const auto c = random_mixture(rng, 1 + (trial / 9) % 3, d);
    const double ab = mixture_distance(a, b).distance;
    EXPECT_GE(ab, 0.0);
    EXPECT_EQ(ab, mixture_distance(b, a).distance);
    EXPECT_EQ(mixture_distance(a, a).distance, 0.0);
    EXPECT_LE(ab, mixture_distance(a, c).distance + mixture_distance(c, b).distance + 1e-7);
  }
}

TEST(MixtureDistance, SwappedArgumentsTransposePlan) {
  const auto [mu0, mu1] = example_mixtures();
  const auto ab = mixture_distance(mu0, mu1), ba = mixture_distance(mu1, mu0);
  EXPECT_EQ(ab.distance, ba.distance);
  EXPECT_EQ(ab.plan.pi, ba.plan.pi.transpose());
  EXPECT_EQ(ab.cost, ba.cost.transpose());
}

TEST(MixtureDistance, DimensionMismatch) {
  const GaussianMixture a({scalar(0, 1)}, {1.0});
  const GaussianMixture b({Gaussian(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity())}, {1.0});
  EXPECT_THROW(mixture_distance(a, b), Error);
}

TEST(KernelMixtureDistance, LinearKernelMatchesInputSpace) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 10; ++trial) {
    const auto d0 = kgmm::testing::random_dataset(rng, 30, 2);
    const auto d1 = kgmm::testing::random_dataset(rng, 20, 2, 1.0);
    std::vector<int> l0(30), l1(20);
    for (int i = 0; i < 30; ++i) l0[i] = i % 2;
    for (int i = 0; i < 20; ++i) l1[i] = i % 3 == 0 ? 0 : 1;
    const Dataset a(d0.points(), l0), b(d1.points(), l1);
    const auto w0 = random_weights(rng, 2), w1 = random_weights(rng, 2);
    const auto km0 = KernelMixture::from_labelled(a, KernelSpec::linear(), w0);
    const auto km1 = KernelMixture::from_labelled(b, KernelSpec::linear(), w1);
    const GaussianMixture g0({Gaussian::fit(a.group(0)), Gaussian::fit(a.group(1))}, w0);
    const GaussianMixture g1({Gaussian::fit(b.group(0)), Gaussian::fit(b.group(1))}, w1);
    const double kernel = kernel_mixture_distance(km0, km1).distance;
    const double input = mixture_distance(g0, g1).distance;
    EXPECT_LE(kgmm::testing::relative_error(kernel, input), 1e-8);
  }
}

TEST(KernelMixtureDistance, SelfAndSingleComponent) {
  std::mt19937_64 rng(54);
  const auto d0 = kgmm::testing::random_dataset(rng, 12, 2);
  const auto d1 = kgmm::testing::random_dataset(rng, 15, 2, 0.5);
  const KernelSpec spec = KernelSpec::rbf(1.0);
  const KernelMixture a({RkhsGaussian(d0, spec)}, {1.0});
  const KernelMixture b({RkhsGaussian(d1, spec)}, {1.0});
  EXPECT_NEAR(kernel_mixture_distance(a, b).distance,
              std::sqrt(kw2_squared(RkhsGaussian(d0, spec), RkhsGaussian(d1, spec))), 1e-14);
  EXPECT_EQ(kernel_mixture_distance(a, a).distance, 0.0);
  EXPECT_EQ(kernel_mixture_distance(a, b).distance, kernel_mixture_distance(b, a).distance);
  const KernelMixture other({RkhsGaussian(d1, KernelSpec::rbf(2.0))}, {1.0});
  EXPECT_THROW(kernel_mixture_distance(a, other), Error);
}

TEST(KernelMixture, RequiresLabels) {
  std::mt19937_64 rng(55);
  EXPECT_THROW(KernelMixture::from_labelled(kgmm::testing::random_dataset(rng, 5, 2),
                                            KernelSpec::rbf(1.0), {1.0}),
               Error);
}

TEST(Geodesic, EndpointsMatchDensities) {
  const auto [mu0, mu1] = example_mixtures();
  const Eigen::MatrixXd grid = uniform_grid_1d(-0.2, 1.2, 512);
  const Eigen::VectorXd f0 = density(mu0, grid), f1 = density(mu1, grid);
  EXPECT_LE((density(geodesic(mu0, mu1, 0.0), grid) - f0).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((density(geodesic(mu0, mu1, 1.0), grid) - f1).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Geodesic, StructureOnExampleMixtures) {
  const auto [mu0, mu1] = example_mixtures();
  const auto plan = mixture_distance(mu0, mu1).plan;
  for (double t : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
    const auto g = geodesic(mu0, mu1, t);
    EXPECT_LE(g.size(), 4u);
    EXPECT_LE(g.size(), 3u);
    double total = 0.0;
    for (double w : g.weights()) total += w;
    EXPECT_NEAR(total, 1.0, 1e-15);
  }
  // pi* = [[0.3, 0], [0.3, 0.4]]
  const auto g = geodesic(mu0, mu1, 0.5);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_NEAR(g.weights()[0], 0.3, 1e-12);
  EXPECT_NEAR(g.weights()[1], 0.3, 1e-12);
  EXPECT_NEAR(g.weights()[2], 0.4, 1e-12);
  EXPECT_NEAR(g.components()[0].mean(0), 0.4, 1e-12);
  EXPECT_NEAR(plan.pi(0, 1), 0.0, 1e-15);
}

TEST(Geodesic, RejectsBadTime) {
  const auto [mu0, mu1] = example_mixtures();
  EXPECT_THROW(geodesic(mu0, mu1, -0.5), Error);
}

TEST(ScalingCheck, ExampleMixtures) {
  const auto [mu0, mu1] = example_mixtures();
  const auto full = scaling_check(mu0, mu1, 0.0, 1.0);
  EXPECT_NEAR(full.between, full.expected, 1e-9);
  EXPECT_NEAR(full.expected, 0.35244765828545269, 1e-12);
  const auto mid = scaling_check(mu0, mu1, 0.2, 0.6);
  EXPECT_NEAR(mid.between, 0.4 * 0.35244765828545269, 1e-6);
  const auto tiny = scaling_check(mu0, mu1, 0.5 - 1e-6, 0.5);
  EXPECT_NEAR(tiny.between, 0.0, 1e-5);
  EXPECT_NEAR(tiny.expected, 0.0, 1e-5);
  EXPECT_THROW(scaling_check(mu0, mu1, 0.6, 0.2), Error);
}

TEST(ScalingCheck, RandomTwoDimensionalMixtures) {
  std::mt19937_64 rng(56);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = random_mixture(rng, 2, 2), b = random_mixture(rng, 3, 2);
    double s = u(rng), t = u(rng);
    if (s > t) std::swap(s, t);
    if (t - s < 1e-3) continue;
    const auto check = scaling_check(a, b, s, t);
    EXPECT_NEAR(check.between, check.expected, 1e-6);
  }
}

TEST(Density, Examples) {
  const GaussianMixture std_normal({scalar(0, 1)}, {1.0});
  EXPECT_NEAR(density(std_normal, Eigen::MatrixXd::Zero(1, 1))(0), 0.3989422804014327, 1e-15);
  const GaussianMixture twice({scalar(0.3, 2.0), scalar(0.3, 2.0)}, {0.5, 0.5});
  const GaussianMixture once({scalar(0.3, 2.0)}, {1.0});
  const Eigen::MatrixXd grid = uniform_grid_1d(-3, 3, 31);
  EXPECT_LT((density(twice, grid) - density(once, grid)).cwiseAbs().maxCoeff(), 1e-15);
  const auto [mu0, mu1] = example_mixtures();
  const Eigen::MatrixXd wide = uniform_grid_1d(-1.0, 2.0, 20001);
  EXPECT_NEAR(trapezoid(density(mu0, wide), 3.0 / 20000), 1.0, 1e-3);
}

TEST(Density, TwoDimensionalMatchesClosedForm) {
  Eigen::Matrix2d c;
  c << 2.0, 0.3, 0.3, 0.5;
  const GaussianMixture mu({Gaussian(Eigen::Vector2d(1.0, -1.0), c)}, {1.0});
  const Eigen::RowVector2d x(0.4, 0.2);
  const Eigen::Vector2d r = x.transpose() - Eigen::Vector2d(1.0, -1.0);
  const double expected =
      std::exp(-0.5 * r.dot(c.inverse() * r)) / (2.0 * M_PI * std::sqrt(c.determinant()));
  EXPECT_NEAR(density(mu, x)(0), expected, 1e-15);
}

TEST(Density, SingularCovariance) {
  const GaussianMixture mu({Gaussian(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Zero())}, {1.0});
  EXPECT_THROW(density(mu, Eigen::MatrixXd::Zero(1, 2)), Error);
}

TEST(GridOt, ConservesMassAndMatchesEndpoints) {
  const auto [mu0, mu1] = example_mixtures();
  const Eigen::MatrixXd grid = uniform_grid_1d(-0.2, 1.2, 281);
  const double h = 1.4 / 280;
  for (double t : {0.0, 0.5, 1.0}) {
    const Eigen::VectorXd f = grid_ot_interpolation(mu0, mu1, grid.col(0), t);
    EXPECT_NEAR(trapezoid(f, h), 1.0, 1e-2);
    EXPECT_GE(f.minCoeff(), 0.0);
  }
  const Eigen::VectorXd start = grid_ot_interpolation(mu0, mu1, grid.col(0), 0.0);
  EXPECT_LT((start - density(mu0, grid)).cwiseAbs().maxCoeff(), 0.05 * density(mu0, grid).maxCoeff());
}
