#include "kgmm/experiments.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "kgmm/io.hpp"

namespace kgmm {

namespace {

std::string short_double(double value) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  (void)ec;
  return std::string(buf.data(), end);
}

std::string weights_label(const WeightVector& w) {
  std::string out = "(";
  for (std::size_t i = 0; i < w.size(); ++i) out += (i ? " " : "") + short_double(w[i]);
  return out + ")";
}

std::vector<RkhsGaussian> groups_of(const Dataset& data, const KernelSpec& spec) {
  if (!data.has_labels()) {
    throw Error(ErrorKind::InvalidArgument, "dataset has no label column; components unknown");
  }
  std::vector<RkhsGaussian> groups;
  for (int label : data.label_values()) groups.emplace_back(data.group(label), spec);
  return groups;
}

void require_weight_shape(const std::vector<WeightVector>& grid, std::size_t components) {
  for (const auto& w : grid) {
    if (w.size() != components) {
      throw Error(ErrorKind::DimensionMismatch, "weight vector " + weights_label(w) + " has " +
                                                    std::to_string(w.size()) + " entries for " +
                                                    std::to_string(components) + " components");
    }
    checked_weights(w);
  }
}

double sample_std(const std::vector<double>& values, double mean) {
  if (values.size() < 2) return 0.0;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json sample_config_json(const SampleConfig& c) {
  Json j;
  j["command"] = "sample-exp";
  j["kernel"] = to_json(KernelSpec::rbf(c.gamma));
  j["sizes"] = c.sizes;
  j["repeats"] = c.repeats;
  j["weights0"] = c.weights0;
  j["weights1"] = c.weights1;
  j["seed"] = c.seed;
  j["stratified"] = true;
  return j;
}

}  // namespace

// ---------------------------------------------------------------------------

GeneratorConfig preset_config(int which, Eigen::Index per_component, double cov_scale,
                              std::uint64_t seed) {
  std::array<Eigen::Vector2d, 2> means;
  switch (which) {
    case 1: means = {Eigen::Vector2d(-2, 0), Eigen::Vector2d(2, 0)}; break;
    case 2: means = {Eigen::Vector2d(-2, 2), Eigen::Vector2d(2, 2)}; break;
    case 3: means = {Eigen::Vector2d(0, -2), Eigen::Vector2d(0, 2)}; break;
    default:
      throw Error(ErrorKind::InvalidArgument, "preset must be 1, 2 or 3");
  }
  GeneratorConfig config;
  config.seed = seed;
  for (const auto& m : means) config.components.push_back({m, cov_scale, per_component});
  return config;
}

Dataset generate(const GeneratorConfig& config) {
  if (config.components.empty()) {
    throw Error(ErrorKind::InvalidArgument, "generator needs at least one component");
  }
  const Eigen::Index d = config.components.front().mean.size();
  Eigen::Index total = 0;
  for (const auto& c : config.components) {
    if (c.mean.size() != d) throw Error(ErrorKind::DimensionMismatch, "component means differ in dimension");
    if (c.count < 1) throw Error(ErrorKind::InvalidArgument, "component counts must be >= 1");
    if (!(c.cov_scale >= 0.0)) throw Error(ErrorKind::InvalidArgument, "cov_scale must be >= 0");
    total += c.count;
  }
  Rng rng(config.seed);
  Eigen::MatrixXd points(total, d);
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(total));
  Eigen::Index row = 0;
  for (std::size_t k = 0; k < config.components.size(); ++k) {
    const auto& c = config.components[k];
    const double sd = std::sqrt(c.cov_scale);
    for (Eigen::Index i = 0; i < c.count; ++i, ++row) {
      for (Eigen::Index j = 0; j < d; ++j) points(row, j) = c.mean(j) + sd * rng.normal();
      labels.push_back(static_cast<int>(k));
    }
  }
  return Dataset(std::move(points), std::move(labels));
}

Json to_json(const GeneratorConfig& config) {
  Json j;
  j["seed"] = config.seed;
  Json comps = Json::array();
  for (const auto& c : config.components) {
    Json cj;
    cj["mean"] = std::vector<double>(c.mean.data(), c.mean.data() + c.mean.size());
    cj["cov_scale"] = c.cov_scale;
    cj["count"] = c.count;
    comps.push_back(std::move(cj));
  }
  j["components"] = std::move(comps);
  return j;
}

// ---------------------------------------------------------------------------

std::vector<WeightVector> default_weight_grid() {
  return {{0.1, 0.9}, {0.3, 0.7}, {0.5, 0.5}, {0.7, 0.3}, {0.9, 0.1}};
}

SweepTable table_sweep(const Dataset& data0, const Dataset& data1, double gamma,
                       const std::vector<WeightVector>& row_weights,
                       const std::vector<WeightVector>& col_weights) {
  const KernelSpec spec = KernelSpec::rbf(gamma);
  const auto groups0 = groups_of(data0, spec);
  const auto groups1 = groups_of(data1, spec);
  require_weight_shape(row_weights, groups0.size());
  require_weight_shape(col_weights, groups1.size());

  SweepTable table;
  table.gamma = gamma;
  table.row_weights = row_weights;
  table.col_weights = col_weights;
  table.cost = kw2_cost_matrix(groups0, groups1);
  table.values.resize(static_cast<Eigen::Index>(row_weights.size()),
                      static_cast<Eigen::Index>(col_weights.size()));
  for (std::size_t r = 0; r < row_weights.size(); ++r) {
    for (std::size_t c = 0; c < col_weights.size(); ++c) {
      table.values(r, c) = distance_from_cost(table.cost, row_weights[r], col_weights[c]).distance;
    }
  }
  return table;
}

Json to_json(const std::vector<SweepTable>& tables, const Json& config) {
  Json out;
  out["config"] = config;
  Json cells = Json::array();
  for (const auto& t : tables) {
    for (std::size_t r = 0; r < t.row_weights.size(); ++r) {
      for (std::size_t c = 0; c < t.col_weights.size(); ++c) {
        Json cell;
        cell["params"] = {{"gamma", t.gamma},
                          {"weights0", t.row_weights[r]},
                          {"weights1", t.col_weights[c]}};
        cell["value"] = t.values(r, c);
        cells.push_back(std::move(cell));
      }
    }
  }
  out["cells"] = std::move(cells);
  Json costs = Json::array();
  for (const auto& t : tables) costs.push_back({{"gamma", t.gamma}, {"cost", matrix_json(t.cost)}});
  out["component_costs"] = std::move(costs);
  return out;
}

std::string sweep_csv(const SweepTable& table) {
  std::ostringstream out;
  out << "weights0\\weights1";
  for (const auto& w : table.col_weights) out << ',' << weights_label(w);
  out << '\n';
  for (std::size_t r = 0; r < table.row_weights.size(); ++r) {
    out << weights_label(table.row_weights[r]);
    for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
      out << ',' << format_double(table.values(static_cast<Eigen::Index>(r), c));
    }
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------

Dataset stratified_subsample(const Dataset& data, Eigen::Index size, Rng& rng) {
  const auto values = data.label_values();
  const auto& labels = data.labels();
  const Eigen::Index n = data.size();
  if (size < 1 || size > n) {
    throw Error(ErrorKind::InvalidArgument, "sample size " + std::to_string(size) +
                                                " outside [1, " + std::to_string(n) + "]");
  }
  std::vector<std::vector<Eigen::Index>> members(values.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto g = std::lower_bound(values.begin(), values.end(), labels[static_cast<std::size_t>(i)]) -
                   values.begin();
    members[static_cast<std::size_t>(g)].push_back(i);
  }
  // Largest remainder: floor of each exact quota, then +1 by descending
  // remainder (ties to the lower group index).
  std::vector<Eigen::Index> quota(values.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  Eigen::Index assigned = 0;
  for (std::size_t g = 0; g < members.size(); ++g) {
    const double exact = static_cast<double>(size) * static_cast<double>(members[g].size()) /
                         static_cast<double>(n);
    quota[g] = static_cast<Eigen::Index>(std::floor(exact));
    assigned += quota[g];
    remainders.emplace_back(exact - std::floor(exact), g);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < size; ++k, ++assigned) ++quota[remainders[k].second];

  std::vector<Eigen::Index> chosen;
  for (std::size_t g = 0; g < members.size(); ++g) {
    const auto group_size = static_cast<Eigen::Index>(members[g].size());
    if (quota[g] > group_size) {
      throw Error(ErrorKind::InvalidArgument, "stratified quota exceeds group size");
    }
    if (quota[g] == 0) {
      throw Error(ErrorKind::InvalidArgument,
                  "sample size " + std::to_string(size) + " leaves label " +
                      std::to_string(values[g]) + " empty");
    }
    for (auto idx : rng.sample_without_replacement(group_size, quota[g])) {
      chosen.push_back(members[g][static_cast<std::size_t>(idx)]);
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return data.subset(chosen);
}

SampleReport sample_experiment(const Dataset& data0, const Dataset& data1,
                               const SampleConfig& config) {
  if (config.repeats < 1) throw Error(ErrorKind::InvalidArgument, "repeats must be >= 1");
  const KernelSpec spec = KernelSpec::rbf(config.gamma);
  const auto full0 = groups_of(data0, spec);
  const auto full1 = groups_of(data1, spec);
  require_weight_shape(config.weights0, full0.size());
  require_weight_shape(config.weights1, full1.size());
  for (auto s : config.sizes) {
    if (s > data0.size() || s > data1.size()) {
      throw Error(ErrorKind::InvalidArgument,
                  "sample size " + std::to_string(s) + " exceeds dataset size");
    }
  }

  const std::size_t combos = config.weights0.size() * config.weights1.size();
  const std::size_t sizes = config.sizes.size();
  const auto repeats = static_cast<std::size_t>(config.repeats);
  // values[(combo * sizes + size) * repeats + repeat]
  std::vector<double> values(combos * sizes * repeats);

  auto run_task = [&](std::size_t task) {
    const std::size_t s = task / repeats;
    const std::size_t r = task % repeats;
    const std::uint64_t stream = Rng::derive(config.seed, s);
    Rng rng0(Rng::derive(stream, 2 * r));
    Rng rng1(Rng::derive(stream, 2 * r + 1));
    const Dataset sub0 = stratified_subsample(data0, config.sizes[s], rng0);
    const Dataset sub1 = stratified_subsample(data1, config.sizes[s], rng1);
    const Eigen::MatrixXd cost = kw2_cost_matrix(groups_of(sub0, spec), groups_of(sub1, spec));
    std::size_t combo = 0;
    for (const auto& w0 : config.weights0) {
      for (const auto& w1 : config.weights1) {
        values[(combo * sizes + s) * repeats + r] = distance_from_cost(cost, w0, w1).distance;
        ++combo;
      }
    }
  };

  const std::size_t tasks = sizes * repeats;
  const unsigned workers = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(tasks)));
  if (workers <= 1) {
    for (std::size_t task = 0; task < tasks; ++task) run_task(task);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t task = next++; task < tasks; task = next++) {
          try {
            run_task(task);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  SampleReport report;
  report.config = config;
  const Eigen::MatrixXd full_cost = kw2_cost_matrix(full0, full1);
  std::size_t combo = 0;
  for (const auto& w0 : config.weights0) {
    for (const auto& w1 : config.weights1) {
      report.reference.push_back({w0, w1, distance_from_cost(full_cost, w0, w1).distance});
      for (std::size_t s = 0; s < sizes; ++s) {
        SampleCell cell;
        cell.weights0 = w0;
        cell.weights1 = w1;
        cell.size = config.sizes[s];
        const auto first = values.begin() + static_cast<std::ptrdiff_t>((combo * sizes + s) * repeats);
        cell.values.assign(first, first + static_cast<std::ptrdiff_t>(repeats));
        cell.mean = std::accumulate(cell.values.begin(), cell.values.end(), 0.0) /
                    static_cast<double>(repeats);
        cell.std = sample_std(cell.values, cell.mean);
        report.cells.push_back(std::move(cell));
      }
      ++combo;
    }
  }
  return report;
}

Json to_json(const SampleReport& report) {
  Json out;
  out["config"] = sample_config_json(report.config);
  Json cells = Json::array();
  for (const auto& c : report.cells) {
    Json cell;
    cell["params"] = {{"weights0", c.weights0}, {"weights1", c.weights1}, {"size", c.size}};
    cell["mean"] = c.mean;
    cell["std"] = c.std;
    cells.push_back(std::move(cell));
  }
  out["cells"] = std::move(cells);
  Json reference = Json::array();
  for (const auto& r : report.reference) {
    reference.push_back(
        {{"params", {{"weights0", r.weights0}, {"weights1", r.weights1}}}, {"value", r.value}});
  }
  out["reference"] = std::move(reference);
  return out;
}

// ---------------------------------------------------------------------------

BenchReport bench(const Dataset& data0, const Dataset& data1, const BenchConfig& config) {
  if (!std::is_sorted(config.sizes.begin(), config.sizes.end())) {
    throw Error(ErrorKind::InvalidArgument, "bench sizes must be ascending");
  }
  const KernelSpec spec = KernelSpec::rbf(config.gamma);
  BenchReport report;
  report.config = config;
  for (std::size_t s = 0; s < config.sizes.size(); ++s) {
    const Eigen::Index size = config.sizes[s];
    Rng rng0(Rng::derive(config.seed, 2 * s));
    Rng rng1(Rng::derive(config.seed, 2 * s + 1));
    const Dataset sub0 = size == data0.size() ? data0 : stratified_subsample(data0, size, rng0);
    const Dataset sub1 = size == data1.size() ? data1 : stratified_subsample(data1, size, rng1);

    const auto start = std::chrono::steady_clock::now();
    const KernelMixture mu0(groups_of(sub0, spec), config.weights0);
    const KernelMixture mu1(groups_of(sub1, spec), config.weights1);
    const double distance = kernel_mixture_distance(mu0, mu1).distance;
    const auto stop = std::chrono::steady_clock::now();

    report.cells.push_back(
        {size, std::chrono::duration<double, std::milli>(stop - start).count(), distance});
  }
  return report;
}

Json to_json(const BenchReport& report) {
  Json out;
  const auto& c = report.config;
  out["config"] = {{"command", "bench"},
                   {"kernel", to_json(KernelSpec::rbf(c.gamma))},
                   {"sizes", c.sizes},
                   {"weights0", c.weights0},
                   {"weights1", c.weights1},
                   {"seed", c.seed}};
  Json cells = Json::array();
  for (const auto& cell : report.cells) {
    cells.push_back({{"params", {{"size", cell.size}}},
                     {"value", cell.distance},
                     {"elapsed_ms", cell.elapsed_ms}});
  }
  out["cells"] = std::move(cells);
  return out;
}

// ---------------------------------------------------------------------------

std::pair<GaussianMixture, GaussianMixture> example_mixtures() {
  auto g = [](double mean, double var) {
    return Gaussian(Eigen::VectorXd::Constant(1, mean), Eigen::MatrixXd::Constant(1, 1, var));
  };
  return {GaussianMixture({g(0.2, 0.002), g(0.4, 0.004)}, {0.3, 0.7}),
          GaussianMixture({g(0.6, 0.005), g(0.8, 0.004)}, {0.6, 0.4})};
}

Eigen::MatrixXd uniform_grid_1d(double lo, double hi, Eigen::Index n) {
  if (n < 2 || !(hi > lo)) throw Error(ErrorKind::InvalidArgument, "grid needs n >= 2 and hi > lo");
  return Eigen::VectorXd::LinSpaced(n, lo, hi);
}

Eigen::MatrixXd uniform_grid_2d(double lo, double hi, Eigen::Index n) {
  const Eigen::VectorXd axis = uniform_grid_1d(lo, hi, n);
  Eigen::MatrixXd points(n * n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) points.row(i * n + j) << axis(i), axis(j);
  }
  return points;
}

double trapezoid(const Eigen::VectorXd& y, double h) {
  if (y.size() < 2) return 0.0;
  return h * (y.sum() - 0.5 * (y(0) + y(y.size() - 1)));
}

InterpResult interp_emit(const GaussianMixture& mu0, const GaussianMixture& mu1,
                         const Eigen::MatrixXd& points, const std::vector<double>& times,
                         bool with_grid_ot) {
  if (with_grid_ot && points.cols() != 1) {
    throw Error(ErrorKind::InvalidArgument, "grid OT comparison is only available in 1-D");
  }
  const MixtureDistance dist = mixture_distance(mu0, mu1);
  InterpResult result;
  result.points = points;
  result.times = times;
  const auto cols = static_cast<Eigen::Index>(times.size());
  result.geodesic_density.resize(points.rows(), cols);
  if (with_grid_ot) result.grid_ot_density.resize(points.rows(), cols);
  for (Eigen::Index k = 0; k < cols; ++k) {
    const double t = times[static_cast<std::size_t>(k)];
    GaussianMixture mix = geodesic(mu0, mu1, dist.plan, t);
    result.geodesic_density.col(k) = density(mix, points);
    result.component_counts.push_back(mix.size());
    result.mixtures.push_back(std::move(mix));
    if (with_grid_ot) {
      result.grid_ot_density.col(k) = grid_ot_interpolation(mu0, mu1, points.col(0), t);
    }
  }
  return result;
}

std::string interp_csv(const InterpResult& result, bool grid_ot_series) {
  std::vector<std::string> header;
  for (Eigen::Index c = 0; c < result.points.cols(); ++c) {
    header.push_back(result.points.cols() == 1 ? "x" : "x" + std::to_string(c));
  }
  for (double t : result.times) header.push_back("t=" + short_double(t));
  Eigen::MatrixXd table(result.points.rows(),
                        result.points.cols() + result.geodesic_density.cols() +
                            (grid_ot_series ? result.grid_ot_density.cols() : 0));
  table.leftCols(result.points.cols()) = result.points;
  table.middleCols(result.points.cols(), result.geodesic_density.cols()) = result.geodesic_density;
  if (grid_ot_series) {
    for (double t : result.times) header.push_back("gridot_t=" + short_double(t));
    table.rightCols(result.grid_ot_density.cols()) = result.grid_ot_density;
  }
  std::ostringstream out;
  write_table_csv(out, header, table);
  return out.str();
}

Json to_json(const GaussianMixture& mu) {
  Json means = Json::array();
  Json covs = Json::array();
  for (const auto& g : mu.components()) {
    means.push_back(std::vector<double>(g.mean.data(), g.mean.data() + g.mean.size()));
    covs.push_back(matrix_json(g.cov));
  }
  return {{"weights", mu.weights()}, {"means", std::move(means)}, {"covs", std::move(covs)}};
}

GaussianMixture mixture_from_json(const Json& j) {
  try {
    const auto weights = j.at("weights").get<std::vector<double>>();
    const Json& means = j.at("means");
    const Json& covs = j.at("covs");
    if (means.size() != weights.size() || covs.size() != weights.size()) {
      throw Error(ErrorKind::DimensionMismatch, "mixture JSON: weights/means/covs lengths differ");
    }
    std::vector<Gaussian> components;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      // Scalars are accepted as 1-D shorthand.
      std::vector<double> m = means[k].is_number() ? std::vector<double>{means[k].get<double>()}
                                                   : means[k].get<std::vector<double>>();
      const auto d = static_cast<Eigen::Index>(m.size());
      Eigen::MatrixXd cov(d, d);
      if (covs[k].is_number()) {
        if (d != 1) throw Error(ErrorKind::DimensionMismatch, "scalar covariance needs 1-D mean");
        cov(0, 0) = covs[k].get<double>();
      } else {
        const auto rows = covs[k].get<std::vector<std::vector<double>>>();
        if (static_cast<Eigen::Index>(rows.size()) != d) {
          throw Error(ErrorKind::DimensionMismatch, "mixture JSON: covariance shape");
        }
        for (Eigen::Index r = 0; r < d; ++r) {
          if (static_cast<Eigen::Index>(rows[r].size()) != d) {
            throw Error(ErrorKind::DimensionMismatch, "mixture JSON: covariance shape");
          }
          for (Eigen::Index c = 0; c < d; ++c) cov(r, c) = rows[r][c];
        }
      }
      components.emplace_back(Eigen::Map<Eigen::VectorXd>(m.data(), d), cov);
    }
    return GaussianMixture(std::move(components), weights);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("mixture JSON: ") + e.what());
  }
}

Json to_json(const KernelSpec& spec) {
  switch (spec.family) {
    case KernelFamily::Rbf: return {{"family", "rbf"}, {"gamma", spec.gamma}};
    case KernelFamily::Linear: return {{"family", "linear"}};
    case KernelFamily::Polynomial:
      return {{"family", "polynomial"}, {"degree", spec.degree}, {"offset", spec.offset}};
  }
  return {};
}

}  // namespace kgmm
