#include "qde/harness.hpp"

#include "qde/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace qde {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {
constexpr const char* kVersion = "0.1.0";

const std::vector<std::string> kProblems = {"ensemble", "consensus", "sphere",
                                            "noisy-landscape"};
const std::vector<std::string> kAlgorithms = {"msms_de", "ms_de", "de1", "ga"};
}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {
// Short form for human-facing labels; data files always use format_double.
std::string format_param(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}
}  // namespace

// ---------------------------------------------------------------------------
// Config serialization
// ---------------------------------------------------------------------------

json ExperimentConfig::to_json() const {
  json j;
  j["problem"] = problem;
  j["algorithm"] = algorithm;
  j["seed"] = seed;
  j["threads"] = threads;
  j["out_dir"] = out_dir;
  j["population"] = population;
  j["generations"] = generations;
  j["full_scale"] = full_scale;
  j["grid"] = {{"bound", grid.bound}, {"points", grid.points}};
  j["de"] = {{"f", de.f},           {"cr", de.cr},       {"f_mean", de.f_mean},
             {"f_std", de.f_std},   {"cr_mean", de.cr_mean},
             {"cr_std", de.cr_std}, {"k", de.k}};
  j["ga"] = {{"crossover_probability", ga.crossover_probability},
             {"mutation_probability", ga.mutation_probability},
             {"mutation_sigma_fraction", ga.mutation_sigma_fraction}};
  j["ensemble"] = {{"phi", ensemble.phi},
                   {"t_final", ensemble.t_final},
                   {"steps", ensemble.steps},
                   {"control_min", ensemble.control_min},
                   {"control_max", ensemble.control_max},
                   {"backend", ensemble.backend},
                   {"substeps", ensemble.substeps}};
  j["consensus"] = {{"omega", consensus.omega},
                    {"t_final", consensus.t_final},
                    {"steps", consensus.steps},
                    {"control_min", consensus.control_min},
                    {"control_max", consensus.control_max},
                    {"drift_horizon", consensus.drift_horizon},
                    {"drift_dt", consensus.drift_dt}};
  j["sphere"] = {{"dim", sphere.dim}, {"min", sphere.min}, {"max", sphere.max}};
  j["noisy_landscape"] = {{"dim", noisy.dim},
                          {"training_noise_fraction", noisy.training_noise_fraction}};
  j["test"] = {{"samples", test.samples},
               {"noise_fraction", test.noise_fraction},
               {"noise_samples", test.noise_samples}};
  j["conventions"] = {
      {"generator_ordering",
       "symmetric pairs, antisymmetric pairs, then diagonal; tr(Ul Um) = 2 delta_lm"},
      {"grid_placement", "per-parameter values equally spaced over [1-E, 1+E], endpoints inclusive"},
      {"genome_layout", "channel-major: all steps of channel 0, then channel 1, ..."},
      {"consensus_channels", "u1x, u1z, u2x, u2z, u3x, u3z; theta_x scales x channels, theta_z scales z channels"},
      {"consensus_objective",
       "J = 1 - n/(8(n-1)) ||y_target - y(T)||^2 with n = 8 on full-state coherent vectors"},
      {"units", "hbar = 1; network Hamiltonian in rad/ns with t in ns (0.1 GHz used as 0.1 rad/ns)"},
      {"integrator",
       "fixed-substep classical RK4 for dissipative dynamics; exact per-step exponential for unitary dynamics"},
      {"rng", "mt19937_64 streams split per purpose; normal draws are Box-Muller (two uniforms each)"},
      {"f_cr_sampling", "F accepted as drawn; CR redrawn until it lands in [0, 1]"},
      {"selection", "trial replaces target on ties"},
      {"ga_internals",
       "tournament of 2, uniform crossover, per-gene gaussian mutation with sigma = mutation_sigma_fraction * range, elitism 1"},
      {"timing", "wall-clock seconds reported in timing.txt only; every other output is reproducible from this document"}};
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  c.problem = j.value("problem", c.problem);
  c.algorithm = j.value("algorithm", c.algorithm);
  c.seed = j.value("seed", c.seed);
  c.threads = j.value("threads", c.threads);
  c.out_dir = j.value("out_dir", c.out_dir);
  c.population = j.value("population", c.population);
  c.generations = j.value("generations", c.generations);
  c.full_scale = j.value("full_scale", c.full_scale);
  if (j.contains("grid")) {
    c.grid.bound = j["grid"].value("bound", c.grid.bound);
    c.grid.points = j["grid"].value("points", c.grid.points);
  }
  if (j.contains("de")) {
    const auto& d = j["de"];
    c.de.f = d.value("f", c.de.f);
    c.de.cr = d.value("cr", c.de.cr);
    c.de.f_mean = d.value("f_mean", c.de.f_mean);
    c.de.f_std = d.value("f_std", c.de.f_std);
    c.de.cr_mean = d.value("cr_mean", c.de.cr_mean);
    c.de.cr_std = d.value("cr_std", c.de.cr_std);
    c.de.k = d.value("k", c.de.k);
  }
  if (j.contains("ga")) {
    const auto& g = j["ga"];
    c.ga.crossover_probability = g.value("crossover_probability", c.ga.crossover_probability);
    c.ga.mutation_probability = g.value("mutation_probability", c.ga.mutation_probability);
    c.ga.mutation_sigma_fraction =
        g.value("mutation_sigma_fraction", c.ga.mutation_sigma_fraction);
  }
  if (j.contains("ensemble")) {
    const auto& e = j["ensemble"];
    c.ensemble.phi = e.value("phi", c.ensemble.phi);
    c.ensemble.t_final = e.value("t_final", c.ensemble.t_final);
    c.ensemble.steps = e.value("steps", c.ensemble.steps);
    c.ensemble.control_min = e.value("control_min", c.ensemble.control_min);
    c.ensemble.control_max = e.value("control_max", c.ensemble.control_max);
    c.ensemble.backend = e.value("backend", c.ensemble.backend);
    c.ensemble.substeps = e.value("substeps", c.ensemble.substeps);
  }
  if (j.contains("consensus")) {
    const auto& n = j["consensus"];
    c.consensus.omega = n.value("omega", c.consensus.omega);
    c.consensus.t_final = n.value("t_final", c.consensus.t_final);
    c.consensus.steps = n.value("steps", c.consensus.steps);
    c.consensus.control_min = n.value("control_min", c.consensus.control_min);
    c.consensus.control_max = n.value("control_max", c.consensus.control_max);
    c.consensus.drift_horizon = n.value("drift_horizon", c.consensus.drift_horizon);
    c.consensus.drift_dt = n.value("drift_dt", c.consensus.drift_dt);
  }
  if (j.contains("sphere")) {
    const auto& s = j["sphere"];
    c.sphere.dim = s.value("dim", c.sphere.dim);
    c.sphere.min = s.value("min", c.sphere.min);
    c.sphere.max = s.value("max", c.sphere.max);
  }
  if (j.contains("noisy_landscape")) {
    const auto& n = j["noisy_landscape"];
    c.noisy.dim = n.value("dim", c.noisy.dim);
    c.noisy.training_noise_fraction =
        n.value("training_noise_fraction", c.noisy.training_noise_fraction);
  }
  if (j.contains("test")) {
    const auto& t = j["test"];
    c.test.samples = t.value("samples", c.test.samples);
    c.test.noise_fraction = t.value("noise_fraction", c.test.noise_fraction);
    c.test.noise_samples = t.value("noise_samples", c.test.noise_samples);
  }
  return c;
}

void ExperimentConfig::validate() const {
  if (std::find(kProblems.begin(), kProblems.end(), problem) == kProblems.end())
    throw std::invalid_argument("config: unknown problem '" + problem + "'");
  if (std::find(kAlgorithms.begin(), kAlgorithms.end(), algorithm) == kAlgorithms.end())
    throw std::invalid_argument("config: unknown algorithm '" + algorithm + "'");
  if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
  if (population < 0 || generations < 0)
    throw std::invalid_argument("config: negative population or generations");
  if (grid.points < 1) throw std::invalid_argument("config: grid points must be >= 1");
  if (ensemble.backend != "bloch" && ensemble.backend != "lindblad")
    throw std::invalid_argument("config: ensemble backend must be bloch or lindblad");
  if (test.samples < 0 || test.noise_samples < 0)
    throw std::invalid_argument("config: negative test sample count");
}

ExperimentConfig ExperimentConfig::resolved() const {
  ExperimentConfig c = *this;
  c.validate();
  if (c.population == 0) {
    if (c.problem == "ensemble") c.population = 50;
    else if (c.problem == "consensus") c.population = 100;
    else if (c.problem == "sphere") c.population = 50;
    else c.population = 30;
  }
  if (c.generations == 0) {
    if (c.problem == "ensemble") c.generations = c.full_scale ? 50000 : 2000;
    else if (c.problem == "consensus") c.generations = c.full_scale ? 50000 : 3000;
    else if (c.problem == "sphere") c.generations = 500;
    else c.generations = 150;
  }
  if (c.grid.bound < 0.0) {
    if (c.problem == "ensemble") c.grid.bound = 0.2;
    else if (c.problem == "consensus") c.grid.bound = 0.02;
    else c.grid.bound = 0.0;
  }
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config parse error in " + path + ": " + e.what());
  }
  ExperimentConfig c = ExperimentConfig::from_json(j);
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Problem and objective factories
// ---------------------------------------------------------------------------

std::unique_ptr<RobustControlProblem> make_problem(const ExperimentConfig& config) {
  const ExperimentConfig c = config.resolved();
  if (c.problem == "ensemble") {
    EnsembleProblem::Params p;
    p.phi = c.ensemble.phi;
    p.t_final = c.ensemble.t_final;
    p.steps = c.ensemble.steps;
    p.control_min = c.ensemble.control_min;
    p.control_max = c.ensemble.control_max;
    p.e = c.grid.bound;
    p.grid_points = c.grid.points;
    p.substeps = c.ensemble.substeps;
    p.backend = c.ensemble.backend == "lindblad" ? EnsembleProblem::Backend::Lindblad
                                                 : EnsembleProblem::Backend::Bloch;
    return std::make_unique<EnsembleProblem>(p);
  }
  if (c.problem == "consensus") {
    ConsensusProblem::Params p;
    p.omega = c.consensus.omega;
    p.t_final = c.consensus.t_final;
    p.steps = c.consensus.steps;
    p.control_min = c.consensus.control_min;
    p.control_max = c.consensus.control_max;
    p.e = c.grid.bound;
    p.grid_points = c.grid.points;
    return std::make_unique<ConsensusProblem>(p);
  }
  if (c.problem == "sphere")
    return std::make_unique<SphereProblem>(
        SphereProblem::Params{c.sphere.dim, c.sphere.min, c.sphere.max});
  return std::make_unique<NoisyLandscapeProblem>(
      NoisyLandscapeProblem::Params{c.noisy.dim});
}

namespace {

class GridObjective : public MultiSampleObjective {
public:
  GridObjective(const RobustControlProblem& problem, UncertaintySampleGrid grid)
      : problem_(problem), grid_(std::move(grid)) {}

  int dim() const override { return problem_.genome_dim(); }
  const std::vector<double>& lower_bounds() const override {
    return problem_.lower_bounds();
  }
  const std::vector<double>& upper_bounds() const override {
    return problem_.upper_bounds();
  }
  int samples() const override { return grid_.size(); }
  double average_fitness(std::span<const double> genome,
                         std::span<const double>) const override {
    double sum = 0.0;
    for (const auto& tuple : grid_.tuples) sum += problem_.evaluate(genome, tuple);
    return sum / double(grid_.tuples.size());
  }

private:
  const RobustControlProblem& problem_;
  UncertaintySampleGrid grid_;
};

/// Three-sample additive-noise training objective: nominal genome plus one
/// positively and one negatively perturbed copy, perturbation magnitudes
/// taken from the engine-supplied uniforms (2*dim per evaluation).
class NoiseTrainingObjective : public MultiSampleObjective {
public:
  NoiseTrainingObjective(const RobustControlProblem& problem, double fraction)
      : problem_(problem), fraction_(fraction) {}

  int dim() const override { return problem_.genome_dim(); }
  const std::vector<double>& lower_bounds() const override {
    return problem_.lower_bounds();
  }
  const std::vector<double>& upper_bounds() const override {
    return problem_.upper_bounds();
  }
  int samples() const override { return 3; }
  int noise_draws() const override { return 2 * problem_.genome_dim(); }
  double average_fitness(std::span<const double> genome,
                         std::span<const double> noise) const override {
    const auto& lo = problem_.lower_bounds();
    const auto& hi = problem_.upper_bounds();
    const std::size_t d = genome.size();
    std::vector<double> plus(genome.begin(), genome.end());
    std::vector<double> minus(genome.begin(), genome.end());
    for (std::size_t j = 0; j < d; ++j) {
      const double range = hi[j] - lo[j];
      plus[j] = std::clamp(plus[j] + fraction_ * range * noise[j], lo[j], hi[j]);
      minus[j] = std::clamp(minus[j] - fraction_ * range * noise[d + j], lo[j], hi[j]);
    }
    return (problem_.evaluate(genome, {}) + problem_.evaluate(plus, {}) +
            problem_.evaluate(minus, {})) /
           3.0;
  }

private:
  const RobustControlProblem& problem_;
  double fraction_;
};

}  // namespace

std::unique_ptr<MultiSampleObjective> make_objective(
    const ExperimentConfig& config, const RobustControlProblem& problem) {
  const ExperimentConfig c = config.resolved();
  const bool single_sample = c.algorithm == "de1";
  if (problem.uncertain_params() > 0) {
    const int points = single_sample ? 1 : c.grid.points;
    return std::make_unique<GridObjective>(
        problem, make_grid(problem.uncertainty_bound(), points,
                           problem.uncertain_params()));
  }
  if (c.problem == "noisy-landscape" && !single_sample)
    return std::make_unique<NoiseTrainingObjective>(problem,
                                                    c.noisy.training_noise_fraction);
  // Deterministic benchmark: a single nominal sample.
  return std::make_unique<GridObjective>(problem, make_grid(0.0, 1, 0));
}

// ---------------------------------------------------------------------------
// Output files
// ---------------------------------------------------------------------------

namespace {

void atomic_write(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

std::string report_csv(const RobustnessReport& report, const std::string& problem) {
  std::ostringstream out;
  const std::size_t p = report.thetas.empty() ? 0 : report.thetas.front().size();
  out << "sample";
  for (std::size_t k = 0; k < p; ++k) {
    if (problem == "consensus")
      out << (k == 0 ? ",theta_x" : ",theta_z");
    else
      out << ",theta_" << k;
  }
  out << ",fitness\n";
  for (std::size_t s = 0; s < report.fitness.size(); ++s) {
    out << s;
    if (s < report.thetas.size())
      for (const double t : report.thetas[s]) out << ',' << format_double(t);
    out << ',' << format_double(report.fitness[s]) << '\n';
  }
  return out.str();
}

std::string drift_csv(const DriftSeries& series) {
  std::ostringstream out;
  out << "t,d1_target,d2_target,d3_target,d12,d13,d23\n";
  for (std::size_t s = 0; s < series.times.size(); ++s) {
    const auto row = static_cast<Eigen::Index>(s);
    out << format_double(series.times[s]);
    for (Eigen::Index j = 0; j < series.to_target.cols(); ++j)
      out << ',' << format_double(series.to_target(row, j));
    for (Eigen::Index j = 0; j < series.pairwise.cols(); ++j)
      out << ',' << format_double(series.pairwise(row, j));
    out << '\n';
  }
  return out.str();
}

int genome_channels(const std::string& problem) {
  return problem == "consensus" ? 6 : 1;
}

RobustnessReport run_test_protocol(const ExperimentConfig& c,
                                   const RobustControlProblem& problem,
                                   std::span<const double> genome) {
  Rng test_rng = Rng(c.seed).split("test");
  if (problem.uncertain_params() > 0)
    return monte_carlo_test(problem, genome, c.test.samples, test_rng, c.threads);
  return additive_noise_test(problem, genome, c.test.noise_fraction,
                             c.test.noise_samples, test_rng, c.threads);
}

json report_summary(const RobustnessReport& report, const std::string& mode) {
  return json{{"mode", mode},
              {"samples", report.fitness.size()},
              {"mean", report.mean},
              {"min", report.min},
              {"max", report.max},
              {"stddev", report.stddev}};
}

}  // namespace

void write_genome_csv(const std::string& path, std::span<const double> genome,
                      int channels) {
  if (channels < 1 || genome.size() % static_cast<std::size_t>(channels) != 0)
    throw std::invalid_argument("write_genome_csv: bad channel count");
  const std::size_t steps = genome.size() / static_cast<std::size_t>(channels);
  std::ostringstream out;
  out << "channel,step,value\n";
  for (int c = 0; c < channels; ++c)
    for (std::size_t s = 0; s < steps; ++s)
      out << c << ',' << s << ','
          << format_double(genome[static_cast<std::size_t>(c) * steps + s]) << '\n';
  atomic_write(path, out.str());
}

std::vector<double> read_genome_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open genome file: " + path);
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto pos = line.find_last_of(',');
    const std::string field = pos == std::string::npos ? line : line.substr(pos + 1);
    try {
      values.push_back(std::stod(field));
    } catch (const std::exception&) {
      // header or comment line
      continue;
    }
  }
  if (values.empty())
    throw std::invalid_argument("genome file has no numeric values: " + path);
  return values;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

TrainResult cmd_train(const ExperimentConfig& raw, std::ostream& log) {
  const ExperimentConfig c = raw.resolved();
  const fs::path dir(c.out_dir);
  fs::create_directories(dir);
  atomic_write(dir / "config.resolved", c.to_json().dump(2) + "\n");

  const auto problem = make_problem(c);
  const auto objective = make_objective(c, *problem);
  Rng train_rng = Rng(c.seed).split("train");

  std::ofstream history(dir / "history.csv", std::ios::binary | std::ios::trunc);
  if (!history) throw std::runtime_error("cannot write history.csv");
  history << "generation,best_fitness,mean_fitness,strategy1,strategy2,strategy3,"
             "strategy4\n";
  const int report_every = std::max(1, c.generations / 20);
  const GenerationCallback callback = [&](const GenerationStats& s, const Population&) {
    history << s.generation << ',' << format_double(s.best_fitness) << ','
            << format_double(s.mean_fitness) << ',' << s.strategy_counts[0] << ','
            << s.strategy_counts[1] << ',' << s.strategy_counts[2] << ','
            << s.strategy_counts[3] << '\n';
    history.flush();  // keeps every completed generation on interrupt
    if (s.generation % report_every == 0)
      log << "gen " << s.generation << "  best " << s.best_fitness << "  mean "
          << s.mean_fitness << '\n';
  };

  log << "training " << c.algorithm << " on " << c.problem << " (NP=" << c.population
      << ", G=" << c.generations << ", N=" << objective->samples()
      << ", seed=" << c.seed << ")\n";

  TrainResult result;
  if (c.algorithm == "msms_de") {
    DeConfig de = DeConfig::mixed_strategy();
    de.population = c.population;
    de.generations = c.generations;
    de.f = ParameterSampling::normal(c.de.f_mean, c.de.f_std);
    de.cr = ParameterSampling::normal(c.de.cr_mean, c.de.cr_std);
    de.k = c.de.k;
    de.threads = c.threads;
    result.history = run_msms_de(*objective, de, train_rng, callback);
  } else if (c.algorithm == "ms_de" || c.algorithm == "de1") {
    DeConfig de;
    de.population = c.population;
    de.generations = c.generations;
    de.f = ParameterSampling::fixed(c.de.f);
    de.cr = ParameterSampling::fixed(c.de.cr);
    de.k = c.de.k;
    de.threads = c.threads;
    result.history = run_basic_de(*objective, de, train_rng, callback);
  } else {
    GaConfig gac;
    gac.population = c.population;
    gac.generations = c.generations;
    gac.crossover_probability = c.ga.crossover_probability;
    gac.mutation_probability = c.ga.mutation_probability;
    gac.mutation_sigma_fraction = c.ga.mutation_sigma_fraction;
    gac.threads = c.threads;
    result.history = run_ga(*objective, gac, train_rng, callback);
  }
  history.close();

  write_genome_csv((dir / "genome.csv").string(), result.history.best_genome,
                   genome_channels(c.problem));

  result.report = run_test_protocol(c, *problem, result.history.best_genome);
  atomic_write(dir / "report.csv", report_csv(result.report, c.problem));

  if (c.problem == "consensus" && !result.report.thetas.empty()) {
    const auto& consensus = dynamic_cast<const ConsensusProblem&>(*problem);
    const DriftSeries drift = averaged_free_drift(
        consensus, result.history.best_genome, result.report.thetas,
        c.consensus.drift_horizon, c.consensus.drift_dt, c.threads);
    atomic_write(dir / "drift.csv", drift_csv(drift));
  }

  json run;
  if (c.problem == "consensus") {
    // Reduced-state agreement of the nominal final state: exact check at
    // 1e-6 plus the 2% approximate-consensus line used for reporting.
    const auto& consensus = dynamic_cast<const ConsensusProblem&>(*problem);
    const std::array<double, 2> nominal{1.0, 1.0};
    const DensityOperator rho_final = DensityOperator::pure(
        consensus.final_statevector(result.history.best_genome, nominal));
    const std::array<int, 3> dims{2, 2, 2};
    const ConsensusCheck exact = check_consensus(rho_final, dims, 1e-6);
    run["consensus_check"] = {{"max_pairwise_trace_distance", exact.max_pairwise},
                              {"exact_consensus", exact.is_consensus},
                              {"approximate_consensus", exact.max_pairwise <= 0.02}};
  }
  run["version"] = kVersion;
  run["problem"] = c.problem;
  run["algorithm"] = c.algorithm;
  run["seed"] = c.seed;
  run["population"] = c.population;
  run["generations"] = c.generations;
  run["samples_per_fitness"] = objective->samples();
  run["parameters"] = c.algorithm == "msms_de"
                          ? "F=N(" + format_param(c.de.f_mean) + "," +
                                format_param(c.de.f_std) + "), CR=N(" +
                                format_param(c.de.cr_mean) + "," +
                                format_param(c.de.cr_std) + ")"
                      : c.algorithm == "ga"
                          ? "Pc=" + format_param(c.ga.crossover_probability) +
                                ", Pm=" + format_param(c.ga.mutation_probability)
                          : "F=" + format_param(c.de.f) + ", CR=" + format_param(c.de.cr);
  run["training_best_fitness"] = result.history.best_fitness;
  run["testing"] = report_summary(
      result.report, problem->uncertain_params() > 0 ? "monte-carlo" : "additive-noise");
  atomic_write(dir / "run.json", run.dump(2) + "\n");

  // Wall-clock lives in its own file: the only output that is not
  // reproducible from (config, seed).
  atomic_write(dir / "timing.txt",
               "train_seconds " + format_double(result.history.wall_seconds) + "\n");

  log << "final training fitness " << result.history.best_fitness << "; testing mean "
      << result.report.mean << " over " << result.report.fitness.size()
      << " samples\n";
  return result;
}

RobustnessReport cmd_evaluate(const ExperimentConfig& raw,
                              const std::string& genome_path, std::ostream& log) {
  const ExperimentConfig c = raw.resolved();
  const auto problem = make_problem(c);
  const std::vector<double> genome = read_genome_csv(genome_path);
  if (genome.size() != static_cast<std::size_t>(problem->genome_dim()))
    throw std::invalid_argument(
        "genome dimension " + std::to_string(genome.size()) + " does not match " +
        c.problem + " (" + std::to_string(problem->genome_dim()) + ")");

  const fs::path dir(c.out_dir);
  fs::create_directories(dir);
  const RobustnessReport report = run_test_protocol(c, *problem, genome);
  atomic_write(dir / "report.csv", report_csv(report, c.problem));

  if (c.problem == "consensus" && !report.thetas.empty()) {
    const auto& consensus = dynamic_cast<const ConsensusProblem&>(*problem);
    const DriftSeries drift =
        averaged_free_drift(consensus, genome, report.thetas, c.consensus.drift_horizon,
                            c.consensus.drift_dt, c.threads);
    atomic_write(dir / "drift.csv", drift_csv(drift));
  }

  json summary = report_summary(
      report, problem->uncertain_params() > 0 ? "monte-carlo" : "additive-noise");
  atomic_write(dir / "eval.json", summary.dump(2) + "\n");
  log << "evaluated " << report.fitness.size() << " samples; mean " << report.mean
      << " min " << report.min << " max " << report.max << " stddev " << report.stddev
      << '\n';
  return report;
}

void cmd_compare(const std::vector<std::string>& run_dirs, std::ostream& out) {
  if (run_dirs.empty()) throw std::invalid_argument("compare: no run directories given");

  struct Row {
    std::string algorithm, parameters, problem;
    double train_seconds = -1.0;
    double training = 0.0;
    double testing = 0.0;
  };
  std::vector<Row> rows;
  std::string problem;
  for (const auto& d : run_dirs) {
    std::ifstream in(fs::path(d) / "run.json");
    if (!in) throw std::invalid_argument("compare: missing run.json in " + d);
    json j;
    in >> j;
    Row row;
    row.problem = j.at("problem").get<std::string>();
    row.algorithm = j.at("algorithm").get<std::string>();
    row.parameters = j.value("parameters", "");
    row.training = j.at("training_best_fitness").get<double>();
    row.testing = j.at("testing").at("mean").get<double>();
    if (problem.empty()) problem = row.problem;
    if (row.problem != problem)
      throw std::invalid_argument("compare: mixed problems (" + problem + " vs " +
                                  row.problem + ")");
    std::ifstream timing(fs::path(d) / "timing.txt");
    if (timing) {
      std::string key;
      double seconds = 0.0;
      if (timing >> key >> seconds) row.train_seconds = seconds;
    }
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.testing > b.testing; });

  out << "| algorithm | parameters | training time [s] | training fitness | testing mean |\n";
  out << "|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    out << "| " << r.algorithm << " | " << r.parameters << " | ";
    if (r.train_seconds >= 0.0)
      out << r.train_seconds;
    else
      out << "n/a";
    out << " | " << format_double(r.training) << " | " << format_double(r.testing)
        << " |\n";
  }
}

}  // namespace qde
