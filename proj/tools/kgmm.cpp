// kgmm: command-line front end for the kernel GMM transport library.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kgmm/experiments.hpp"
#include "kgmm/io.hpp"

namespace fs = std::filesystem;
using namespace kgmm;

namespace {

struct Output {
  std::string out;  // directory; empty means stdout
  std::string format = "json";

  void emit(const std::string& stem, const std::string& csv, const Json& json) const {
    const bool as_csv = format == "csv";
    const std::string text = as_csv ? csv : json.dump(2) + "\n";
    if (out.empty()) {
      std::cout << text;
    } else {
      write_text_file(fs::path(out) / (stem + (as_csv ? ".csv" : ".json")), text);
    }
  }
};

void add_output(CLI::App* cmd, Output& o) {
  cmd->add_option("--out", o.out, "Output directory (default: stdout)");
  cmd->add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
}

struct Inputs {
  std::string data0, data1;
  int preset0 = 1, preset1 = 2;
  Eigen::Index per_component = 500;
  double cov_scale = 0.4;
  std::uint64_t seed = 0;

  Dataset load(const std::string& path, int preset, std::uint64_t stream) const {
    if (!path.empty()) return read_csv(path);
    return generate(preset_config(preset, per_component, cov_scale, Rng::derive(seed, stream)));
  }
  Dataset first() const { return load(data0, preset0, 0); }
  Dataset second() const { return load(data1, preset1, 1); }

  Json echo() const {
    Json j;
    j["data0"] = data0.empty() ? Json("preset:" + std::to_string(preset0)) : Json(data0);
    j["data1"] = data1.empty() ? Json("preset:" + std::to_string(preset1)) : Json(data1);
    if (data0.empty() || data1.empty()) {
      j["per_component"] = per_component;
      j["cov_scale"] = cov_scale;
    }
    j["seed"] = seed;
    return j;
  }
};

void add_inputs(CLI::App* cmd, Inputs& in) {
  cmd->add_option("--data0", in.data0, "First dataset CSV (default: generated preset)");
  cmd->add_option("--data1", in.data1, "Second dataset CSV (default: generated preset)");
  cmd->add_option("--preset0", in.preset0, "Preset layout for data0 when no CSV is given")
      ->check(CLI::Range(1, 3))
      ->capture_default_str();
  cmd->add_option("--preset1", in.preset1, "Preset layout for data1 when no CSV is given")
      ->check(CLI::Range(1, 3))
      ->capture_default_str();
  cmd->add_option("--per-component", in.per_component, "Points per generated component")
      ->capture_default_str();
  cmd->add_option("--cov-scale", in.cov_scale, "Generated component covariance scale")
      ->capture_default_str();
  cmd->add_option("--seed", in.seed, "Seed")->capture_default_str();
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, "not a number list: '" + text + "'");
    }
  }
  if (out.empty()) throw Error(ErrorKind::InvalidArgument, "empty list");
  return out;
}

std::vector<Eigen::Index> parse_sizes(const std::string& text) {
  std::vector<Eigen::Index> out;
  for (double v : parse_list(text)) {
    if (!(v >= 1.0) || v != static_cast<double>(static_cast<Eigen::Index>(v))) {
      throw Error(ErrorKind::InvalidArgument, "sizes must be positive integers");
    }
    out.push_back(static_cast<Eigen::Index>(v));
  }
  return out;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) line += (i ? "," : "") + fields[i];
  return line + "\n";
}

std::string weights_text(const std::vector<double>& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? ";" : "") + format_double(w[i]);
  return s;
}

Json metadata(const std::string& command) { return Json{{"command", command}}; }

std::string one_line(std::string text) {
  for (char& c : text) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return text;
}

// ---------------------------------------------------------------------------

struct GenArgs {
  int preset = 1;
  std::string counts_text;
  double cov_scale = 0.4;
  std::uint64_t seed = 0;
  std::string out;
  std::string name;
};

void run_gen(const GenArgs& a) {
  GeneratorConfig cfg = preset_config(a.preset, 500, a.cov_scale, a.seed);
  if (!a.counts_text.empty()) {
    const auto counts = parse_sizes(a.counts_text);
    if (counts.size() != cfg.components.size()) {
      throw Error(ErrorKind::DimensionMismatch, "--counts needs one entry per component");
    }
    for (std::size_t i = 0; i < counts.size(); ++i) cfg.components[i].count = counts[i];
  }
  const Dataset data = generate(cfg);
  if (a.out.empty()) {
    write_csv(std::cout, data);
    return;
  }
  const fs::path dir(a.out);
  const std::string name = a.name.empty() ? "dataset" + std::to_string(a.preset) : a.name;
  std::ostringstream csv;
  write_csv(csv, data);
  write_text_file(dir / (name + ".csv"), csv.str());
  write_text_file(dir / (name + ".json"), kgmm::to_json(cfg).dump(2) + "\n");
}

struct Kw2Args {
  Inputs in;
  Output o;
  double gamma = 1.0;
  std::string kernel = "rbf";
};

KernelSpec kernel_of(const std::string& name, double gamma) {
  return name == "linear" ? KernelSpec::linear() : KernelSpec::rbf(gamma);
}

void run_kw2(const Kw2Args& a) {
  const KernelSpec spec = kernel_of(a.kernel, a.gamma);
  const RkhsGaussian g0(a.in.first(), spec), g1(a.in.second(), spec);
  const KernelPairTerms t = kernel_pair_terms(g0, g1);
  const double kw2 = t.kw2_squared();

  Json cfg = a.in.echo();
  cfg.update(metadata("kw2"));
  cfg["kernel"] = kgmm::to_json(spec);
  Json j{{"config", cfg}};
  j["cells"] = Json::array({Json{{"params", Json::object()},
                                 {"value", kw2},
                                 {"mmd_squared", t.mmd_squared},
                                 {"trace0", t.trace0},
                                 {"trace1", t.trace1},
                                 {"nuclear_norm", t.cross_singular_values.sum()}}});
  const std::string csv = csv_line({"kw2_squared", "mmd_squared", "trace0", "trace1", "nuclear_norm"}) +
                          csv_line({format_double(kw2), format_double(t.mmd_squared),
                                    format_double(t.trace0), format_double(t.trace1),
                                    format_double(t.cross_singular_values.sum())});
  a.o.emit("kw2", csv, j);
}

struct DistArgs {
  Inputs in;
  Output o;
  std::string gammas = "1";
  std::string weights0, weights1;
};

void run_gmm_dist(const DistArgs& a) {
  const Dataset d0 = a.in.first(), d1 = a.in.second();
  std::vector<WeightVector> rows = default_weight_grid(), cols = default_weight_grid();
  if (!a.weights0.empty()) rows = {parse_list(a.weights0)};
  if (!a.weights1.empty()) cols = {parse_list(a.weights1)};

  std::vector<SweepTable> tables;
  for (double gamma : parse_list(a.gammas)) tables.push_back(table_sweep(d0, d1, gamma, rows, cols));

  Json cfg = a.in.echo();
  cfg.update(metadata("gmm-dist"));
  cfg["kernel"] = "rbf";
  cfg["gammas"] = parse_list(a.gammas);
  cfg["weights0"] = rows;
  cfg["weights1"] = cols;

  if (a.o.format == "csv" && !a.o.out.empty()) {
    for (const auto& t : tables) {
      write_text_file(fs::path(a.o.out) / ("gmm_dist_gamma" + format_double(t.gamma) + ".csv"),
                      sweep_csv(t));
    }
    return;
  }
  std::string csv;
  for (const auto& t : tables) {
    if (tables.size() > 1) csv += "# gamma=" + format_double(t.gamma) + "\n";
    csv += sweep_csv(t);
  }
  a.o.emit("gmm_dist", csv, kgmm::to_json(tables, cfg));
}

struct EntropicArgs {
  Inputs in;
  Output o;
  double gamma = 1.0;
  std::string kernel = "rbf";
  std::optional<double> epsilon, sigma2;
  std::string l_policy = "rank";
  std::string expansion = "complete";
  bool input_space = false;
};

void run_entropic(const EntropicArgs& a) {
  if (a.epsilon.has_value() == a.sigma2.has_value()) {
    throw Error(ErrorKind::InvalidArgument, "give exactly one of --epsilon and --sigma2");
  }
  const Dataset d0 = a.in.first(), d1 = a.in.second();
  Json cfg = a.in.echo();
  cfg.update(metadata("entropic"));
  if (a.epsilon) cfg["epsilon"] = *a.epsilon;
  if (a.sigma2) cfg["sigma2"] = *a.sigma2;

  double value = 0.0;
  if (a.input_space) {
    cfg["space"] = "input";
    const Gaussian g0 = Gaussian::fit(d0), g1 = Gaussian::fit(d1);
    value = a.epsilon ? entropic_w2_squared(g0, g1, *a.epsilon)
                      : entropic_w2_squared_sigma(g0, g1, *a.sigma2);
  } else {
    const KernelSpec spec = kernel_of(a.kernel, a.gamma);
    const auto policy = AmbientDimPolicy::parse(a.l_policy);
    const auto expansion = parse_entropic_expansion(a.expansion);
    cfg["space"] = "rkhs";
    cfg["kernel"] = kgmm::to_json(spec);
    cfg["l_policy"] = policy.to_string();
    cfg["expansion"] = std::string(to_string(expansion));
    const auto terms = kernel_pair_terms(RkhsGaussian(d0, spec), RkhsGaussian(d1, spec));
    value = a.epsilon ? entropic_kw2_squared(terms, *a.epsilon, policy, expansion)
                      : entropic_kw2_sigma(terms, *a.sigma2, policy, expansion);
  }
  Json j{{"config", cfg}};
  j["cells"] = Json::array({Json{{"params", Json::object()}, {"value", value}}});
  a.o.emit("entropic", csv_line({"value"}) + csv_line({format_double(value)}), j);
}

struct InterpArgs {
  Output o;
  std::string mixture0, mixture1;
  std::string times = "0,0.2,0.4,0.6,0.8,1";
  std::string grid = "-0.2,1.2,512";
  bool grid_ot = false;
};

GaussianMixture load_mixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  try {
    return mixture_from_json(Json::parse(in));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::InvalidArgument, "mixture JSON: " + std::string(e.what()));
  }
}

void run_interp(const InterpArgs& a) {
  auto [mu0, mu1] = example_mixtures();
  if (!a.mixture0.empty()) mu0 = load_mixture(a.mixture0);
  if (!a.mixture1.empty()) mu1 = load_mixture(a.mixture1);
  const auto times = parse_list(a.times);
  for (double t : times) {
    if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::InvalidArgument, "--t values must lie in [0, 1]");
  }
  const auto g = parse_list(a.grid);
  if (g.size() != 3) throw Error(ErrorKind::InvalidArgument, "--grid takes lo,hi,n");
  const auto n = static_cast<Eigen::Index>(g[2]);
  const Eigen::MatrixXd points =
      mu0.dim() == 1 ? uniform_grid_1d(g[0], g[1], n) : uniform_grid_2d(g[0], g[1], n);
  if (mu0.dim() > 2) throw Error(ErrorKind::DimensionMismatch, "interp supports 1-D and 2-D mixtures");

  const InterpResult r = interp_emit(mu0, mu1, points, times, a.grid_ot);
  Json cfg = metadata("interp");
  cfg["mixture0"] = kgmm::to_json(mu0);
  cfg["mixture1"] = kgmm::to_json(mu1);
  cfg["t"] = times;
  cfg["grid"] = {{"lo", g[0]}, {"hi", g[1]}, {"n", n}};
  cfg["grid_ot"] = a.grid_ot;
  if (a.grid_ot) cfg["grid_ot_note"] = "discretised plain-W2 reconstruction, not the mixture geodesic";

  Json cells = Json::array();
  for (std::size_t k = 0; k < times.size(); ++k) {
    Json cell{{"params", {{"t", times[k]}}},
              {"components", r.component_counts[k]},
              {"mixture", kgmm::to_json(r.mixtures[k])}};
    const Eigen::VectorXd col = r.geodesic_density.col(static_cast<Eigen::Index>(k));
    cell["density"] = std::vector<double>(col.data(), col.data() + col.size());
    if (a.grid_ot) {
      const Eigen::VectorXd go = r.grid_ot_density.col(static_cast<Eigen::Index>(k));
      cell["grid_ot_density"] = std::vector<double>(go.data(), go.data() + go.size());
    }
    cells.push_back(std::move(cell));
  }
  Json j{{"config", cfg}, {"cells", cells}};
  a.o.emit("interp", interp_csv(r, a.grid_ot), j);
}

struct SampleArgs {
  Inputs in;
  Output o;
  double gamma = 1.0;
  std::string samples = "200,400,600,800";
  int repeats = 100;
  std::string weights0, weights1;
  unsigned threads = 1;
};

void run_sample_exp(const SampleArgs& a) {
  SampleConfig cfg;
  cfg.gamma = a.gamma;
  cfg.sizes = parse_sizes(a.samples);
  cfg.repeats = a.repeats;
  cfg.seed = a.in.seed;
  cfg.threads = a.threads;
  if (!a.weights0.empty()) cfg.weights0 = {parse_list(a.weights0)};
  if (!a.weights1.empty()) cfg.weights1 = {parse_list(a.weights1)};
  const SampleReport report = sample_experiment(a.in.first(), a.in.second(), cfg);

  Json j = kgmm::to_json(report);
  j["config"]["inputs"] = a.in.echo();
  std::string csv = csv_line({"weights0", "weights1", "size", "mean", "std", "reference"});
  for (const auto& c : report.cells) {
    double ref = 0.0;
    for (const auto& r : report.reference) {
      if (r.weights0 == c.weights0 && r.weights1 == c.weights1) ref = r.value;
    }
    csv += csv_line({weights_text(c.weights0), weights_text(c.weights1), std::to_string(c.size),
                     format_double(c.mean), format_double(c.std), format_double(ref)});
  }
  a.o.emit("sample_exp", csv, j);
}

struct BenchArgs {
  Inputs in;
  Output o;
  double gamma = 1.0;
  std::string samples = "200,400,600,800,1000";
  std::string weights0 = "0.5,0.5", weights1 = "0.5,0.5";
};

void run_bench(const BenchArgs& a) {
  BenchConfig cfg;
  cfg.gamma = a.gamma;
  cfg.sizes = parse_sizes(a.samples);
  cfg.weights0 = parse_list(a.weights0);
  cfg.weights1 = parse_list(a.weights1);
  cfg.seed = a.in.seed;
  const BenchReport report = bench(a.in.first(), a.in.second(), cfg);
  Json j = kgmm::to_json(report);
  j["config"]["inputs"] = a.in.echo();
  std::string csv = csv_line({"size", "elapsed_ms", "distance"});
  for (const auto& c : report.cells) {
    csv += csv_line({std::to_string(c.size), format_double(c.elapsed_ms), format_double(c.distance)});
  }
  a.o.emit("bench", csv, j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein-type distances between Gaussian mixtures in a kernel feature space"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "kgmm 0.1.0");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a labelled two-component dataset (CSV)");
  gen_cmd->add_option("--preset", gen.preset, "Layout 1, 2 or 3")->check(CLI::Range(1, 3))->capture_default_str();
  gen_cmd->add_option("--counts", gen.counts_text, "Points per component, e.g. 500,500");
  gen_cmd->add_option("--cov-scale", gen.cov_scale, "Component covariance scale")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output directory (default: CSV on stdout)");
  gen_cmd->add_option("--name", gen.name, "File stem inside --out (default: dataset<preset>)");

  Kw2Args kw2;
  auto* kw2_cmd = app.add_subcommand("kw2", "Squared kernel Wasserstein distance between two datasets");
  add_inputs(kw2_cmd, kw2.in);
  add_output(kw2_cmd, kw2.o);
  kw2_cmd->add_option("--gamma", kw2.gamma, "RBF bandwidth")->capture_default_str();
  kw2_cmd->add_option("--kernel", kw2.kernel, "Kernel")->check(CLI::IsMember({"rbf", "linear"}))->capture_default_str();

  DistArgs dist;
  auto* dist_cmd = app.add_subcommand("gmm-dist", "Mixture distance sweep over weight combinations");
  add_inputs(dist_cmd, dist.in);
  add_output(dist_cmd, dist.o);
  dist_cmd->add_option("--gamma", dist.gammas, "RBF bandwidth(s), comma separated")->capture_default_str();
  dist_cmd->add_option("--weights0", dist.weights0, "Single weight vector for data0 (default: grid)");
  dist_cmd->add_option("--weights1", dist.weights1, "Single weight vector for data1 (default: grid)");

  EntropicArgs ent;
  auto* ent_cmd = app.add_subcommand("entropic", "Entropic W2 between fitted Gaussians (RKHS or input space)");
  add_inputs(ent_cmd, ent.in);
  add_output(ent_cmd, ent.o);
  ent_cmd->add_option("--gamma", ent.gamma, "RBF bandwidth")->capture_default_str();
  ent_cmd->add_option("--kernel", ent.kernel, "Kernel")->check(CLI::IsMember({"rbf", "linear"}))->capture_default_str();
  ent_cmd->add_option("--epsilon", ent.epsilon, "Entropic weight (epsilon form)");
  ent_cmd->add_option("--sigma2", ent.sigma2, "Entropic weight (sigma^2 form)");
  ent_cmd->add_option("--l-policy", ent.l_policy, "rank, span or fixed:<n>")->capture_default_str();
  ent_cmd->add_option("--expansion", ent.expansion, "complete or log5")->capture_default_str();
  ent_cmd->add_flag("--input-space", ent.input_space, "Use input-space Gaussians instead of the RKHS");

  InterpArgs interp;
  auto* interp_cmd = app.add_subcommand("interp", "Geodesic mixture densities on a grid");
  add_output(interp_cmd, interp.o);
  interp_cmd->add_option("--mixture0", interp.mixture0, "Mixture JSON (default: built-in example)");
  interp_cmd->add_option("--mixture1", interp.mixture1, "Mixture JSON (default: built-in example)");
  interp_cmd->add_option("--t", interp.times, "Times in [0, 1], comma separated")->capture_default_str();
  interp_cmd->add_option("--grid", interp.grid, "lo,hi,n (per axis)")->capture_default_str();
  interp_cmd->add_flag("--grid-ot", interp.grid_ot, "Add the discretised plain-W2 series (1-D only)");

  SampleArgs sample;
  auto* sample_cmd = app.add_subcommand("sample-exp", "Subsampling experiment: mean and spread of d");
  add_inputs(sample_cmd, sample.in);
  add_output(sample_cmd, sample.o);
  sample_cmd->add_option("--gamma", sample.gamma, "RBF bandwidth")->capture_default_str();
  sample_cmd->add_option("--samples", sample.samples, "Subsample sizes")->capture_default_str();
  sample_cmd->add_option("--repeats", sample.repeats, "Repeats per size")->check(CLI::PositiveNumber)->capture_default_str();
  sample_cmd->add_option("--weights0", sample.weights0, "Single weight vector for data0");
  sample_cmd->add_option("--weights1", sample.weights1, "Single weight vector for data1");
  sample_cmd->add_option("--threads", sample.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "Time one evaluation of d per sample size");
  add_inputs(bench_cmd, bench_args.in);
  add_output(bench_cmd, bench_args.o);
  bench_cmd->add_option("--gamma", bench_args.gamma, "RBF bandwidth")->capture_default_str();
  bench_cmd->add_option("--samples", bench_args.samples, "Sizes, ascending")->capture_default_str();
  bench_cmd->add_option("--weights0", bench_args.weights0)->capture_default_str();
  bench_cmd->add_option("--weights1", bench_args.weights1)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << one_line(e.what()) << "\n";
    return 2;
  }

  try {
    if (*gen_cmd) run_gen(gen);
    else if (*kw2_cmd) run_kw2(kw2);
    else if (*dist_cmd) run_gmm_dist(dist);
    else if (*ent_cmd) run_entropic(ent);
    else if (*interp_cmd) run_interp(interp);
    else if (*sample_cmd) run_sample_exp(sample);
    else if (*bench_cmd) run_bench(bench_args);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << one_line(e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << one_line(e.what()) << "\n";
    return 1;
  }
  return 0;
}
