#pragma once

#include "qde/optimizers.hpp"
#include "qde/problems.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace qde {

/// Fully resolved experiment description. Serialises losslessly to JSON;
/// every run writes the resolved document (all defaults materialised)
/// alongside its results so outputs are reproducible from that file alone.
struct ExperimentConfig {
  std::string problem = "ensemble";  // ensemble | consensus | sphere | noisy-landscape
  std::string algorithm = "msms_de";  // msms_de | ms_de | de1 | ga
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = "runs/out";
  int population = 0;     // 0 = problem default
  int generations = 0;    // 0 = problem default
  bool full_scale = false;

  struct Grid {
    double bound = -1.0;  // < 0 = problem default E
    int points = 3;
  } grid;

  struct De {
    double f = 0.9;
    double cr = 0.1;
    double f_mean = 0.5, f_std = 0.3;
    double cr_mean = 0.5, cr_std = 0.1;
    double k = 0.5;
  } de;

  struct Ga {
    double crossover_probability = 0.8;
    double mutation_probability = 0.05;
    double mutation_sigma_fraction = 0.05;
  } ga;

  struct Ensemble {
    double phi = 0.0;
    double t_final = 10.0;
    int steps = 200;
    double control_min = -10.0;
    double control_max = 10.0;
    std::string backend = "bloch";  // bloch | lindblad
    int substeps = 4;
  } ensemble;

  struct Consensus {
    double omega = 0.1;  // rad/ns
    double t_final = 20.0;  // ns
    int steps = 100;
    double control_min = 0.0;
    double control_max = 1.0;
    double drift_horizon = 20.0;
    double drift_dt = 0.2;
  } consensus;

  struct Sphere {
    int dim = 30;
    double min = -5.12;
    double max = 5.12;
  } sphere;

  struct Noisy {
    int dim = 80;
    double training_noise_fraction = 0.05;
  } noisy;

  struct Test {
    int samples = 2000;
    double noise_fraction = 0.075;
    int noise_samples = 100;
  } test;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  void validate() const;

  /// Fills population/generations/grid defaults for the selected problem
  /// (and the full-scale generation count when requested).
  ExperimentConfig resolved() const;
};

ExperimentConfig load_config_file(const std::string& path);

/// Builds the problem selected by the config.
std::unique_ptr<RobustControlProblem> make_problem(const ExperimentConfig& config);

/// Objective used for training: grid-averaged for uncertainty problems,
/// single-sample for sphere, additive-noise (3 samples) for noisy-landscape,
/// and single-sample for de1 regardless of problem.
std::unique_ptr<MultiSampleObjective> make_objective(
    const ExperimentConfig& config, const RobustControlProblem& problem);

struct TrainResult {
  RunHistory history;
  RobustnessReport report;
};

/// Runs training, the testing protocol, and writes
///   config.resolved, history.csv, genome.csv, report.csv,
///   drift.csv (consensus only), run.json, timing.txt
/// under config.out_dir. Everything except timing.txt is byte-reproducible
/// from (resolved config, seed). history.csv is flushed per generation so an
/// interrupted run keeps every completed generation.
TrainResult cmd_train(const ExperimentConfig& config, std::ostream& log);

/// Applies the testing protocol to a stored genome; writes report.csv (and
/// drift.csv for consensus) under config.out_dir.
RobustnessReport cmd_evaluate(const ExperimentConfig& config,
                              const std::string& genome_path, std::ostream& log);

/// Runs the built-in analytic checks; returns the number of failures and
/// prints one line per check.
int cmd_verify(std::ostream& out);

/// Summarises run directories (same problem required) as a table sorted by
/// testing mean, best first.
void cmd_compare(const std::vector<std::string>& run_dirs, std::ostream& out);

// Shared file helpers (17 significant digits; enough to round-trip doubles).
std::string format_double(double v);
std::vector<double> read_genome_csv(const std::string& path);
void write_genome_csv(const std::string& path, std::span<const double> genome,
                      int channels);

}  // namespace qde
