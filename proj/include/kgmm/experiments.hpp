#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "kgmm/gmm_ot.hpp"
#include "kgmm/random.hpp"

namespace kgmm {

using Json = nlohmann::ordered_json;
using WeightVector = std::vector<double>;

// ---------------------------------------------------------------------------
// Synthetic labelled datasets

struct ComponentSpec {
  Eigen::VectorXd mean;
  double cov_scale = 0.4;  ///< covariance is cov_scale * I
  Eigen::Index count = 500;
};

struct GeneratorConfig {
  std::vector<ComponentSpec> components;
  std::uint64_t seed = 0;
};

/// Built-in two-component layouts (which = 1, 2, 3):
///   1: means (-2, 0) / (2, 0)    2: (-2, 2) / (2, 2)    3: (0, -2) / (0, 2)
GeneratorConfig preset_config(int which, Eigen::Index per_component = 500,
                              double cov_scale = 0.4, std::uint64_t seed = 0);

/// Draws every component in order; labels are 0, 1, ... by component.
Dataset generate(const GeneratorConfig& config);

Json to_json(const GeneratorConfig& config);

// ---------------------------------------------------------------------------
// Probability sweep over a weight grid

/// {(0.1,0.9), (0.3,0.7), (0.5,0.5), (0.7,0.3), (0.9,0.1)}
std::vector<WeightVector> default_weight_grid();

struct SweepTable {
  double gamma = 1.0;
  std::vector<WeightVector> row_weights;
  std::vector<WeightVector> col_weights;
  Eigen::MatrixXd cost;    ///< KW2^2 between component groups
  Eigen::MatrixXd values;  ///< d(mu0, mu1) per (row, col) weight pair
};

/// d(mu0, mu1) under the RBF kernel for every pair of weight vectors. The
/// component cost matrix depends only on the data and gamma, so it is
/// computed once per gamma.
SweepTable table_sweep(const Dataset& data0, const Dataset& data1, double gamma,
                       const std::vector<WeightVector>& row_weights,
                       const std::vector<WeightVector>& col_weights);

Json to_json(const std::vector<SweepTable>& tables, const Json& config);
/// Row/column labelled CSV of one table's values.
std::string sweep_csv(const SweepTable& table);

// ---------------------------------------------------------------------------
// Subsampling experiment

struct SampleConfig {
  double gamma = 1.0;
  std::vector<Eigen::Index> sizes{200, 400, 600, 800};
  int repeats = 100;
  std::vector<WeightVector> weights0{{0.1, 0.9}, {0.5, 0.5}, {0.9, 0.1}};
  std::vector<WeightVector> weights1{{0.1, 0.9}, {0.5, 0.5}, {0.9, 0.1}};
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct SampleCell {
  WeightVector weights0;
  WeightVector weights1;
  Eigen::Index size = 0;
  double mean = 0.0;
  double std = 0.0;  ///< sample standard deviation over the repeats
  std::vector<double> values;
};

struct SampleReference {
  WeightVector weights0;
  WeightVector weights1;
  double value = 0.0;
};

struct SampleReport {
  SampleConfig config;
  std::vector<SampleCell> cells;
  std::vector<SampleReference> reference;
};

/// Label-stratified subsample of `size` rows: each group contributes in
/// proportion to its share of the dataset (largest-remainder rounding).
/// Throws Error(InvalidArgument) when a group is too small.
Dataset stratified_subsample(const Dataset& data, Eigen::Index size, Rng& rng);

/// For each size and repeat, draws stratified subsamples of both datasets and
/// evaluates d for every weight combination; also records the full-data
/// reference per combination. Repeat r of size index s uses its own derived
/// stream, so the report does not depend on `threads`.
SampleReport sample_experiment(const Dataset& data0, const Dataset& data1,
                               const SampleConfig& config);

Json to_json(const SampleReport& report);

// ---------------------------------------------------------------------------
// Timing

struct BenchConfig {
  double gamma = 1.0;
  std::vector<Eigen::Index> sizes{200, 400, 600, 800, 1000};
  WeightVector weights0{0.5, 0.5};
  WeightVector weights1{0.5, 0.5};
  std::uint64_t seed = 0;
};

struct BenchCell {
  Eigen::Index size = 0;
  double elapsed_ms = 0.0;
  double distance = 0.0;
};

struct BenchReport {
  BenchConfig config;
  std::vector<BenchCell> cells;
};

/// One timed evaluation of d per size (stratified subsample of each dataset;
/// the full dataset when size equals its length). Sizes must be ascending.
BenchReport bench(const Dataset& data0, const Dataset& data1, const BenchConfig& config);

Json to_json(const BenchReport& report);

// ---------------------------------------------------------------------------
// Interpolation grids

/// 0.3 N(0.2, 0.002) + 0.7 N(0.4, 0.004) and 0.6 N(0.6, 0.005) + 0.4 N(0.8, 0.004).
std::pair<GaussianMixture, GaussianMixture> example_mixtures();

/// n evenly spaced points on [lo, hi] as an n x 1 matrix.
Eigen::MatrixXd uniform_grid_1d(double lo, double hi, Eigen::Index n);
/// n x n lattice on [lo, hi]^2, row-major in the first coordinate, n^2 x 2.
Eigen::MatrixXd uniform_grid_2d(double lo, double hi, Eigen::Index n);

/// Trapezoid rule for samples y on a uniform grid with spacing h.
double trapezoid(const Eigen::VectorXd& y, double h);

struct InterpResult {
  Eigen::MatrixXd points;
  std::vector<double> times;
  Eigen::MatrixXd geodesic_density;  ///< points x times
  std::vector<std::size_t> component_counts;
  std::vector<GaussianMixture> mixtures;
  Eigen::MatrixXd grid_ot_density;  ///< points x times; empty unless requested (1-D only)
};

InterpResult interp_emit(const GaussianMixture& mu0, const GaussianMixture& mu1,
                         const Eigen::MatrixXd& points, const std::vector<double>& times,
                         bool with_grid_ot);

std::string interp_csv(const InterpResult& result, bool grid_ot_series);

/// {"weights":[...], "means":[[...]], "covs":[[[...]]]}
Json to_json(const GaussianMixture& mu);
GaussianMixture mixture_from_json(const Json& j);

Json to_json(const KernelSpec& spec);

}  // namespace kgmm
