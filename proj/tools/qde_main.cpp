#include "qde/harness.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

namespace {

struct CommonFlags {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
  std::string algorithm;
  std::string problem;
  int gmax = 0;
  int threads = 0;
  bool full_scale = false;
};

qde::ExperimentConfig resolve_flags(const CommonFlags& flags) {
  qde::ExperimentConfig config;
  if (!flags.config_path.empty()) config = qde::load_config_file(flags.config_path);
  if (flags.seed_set) config.seed = flags.seed;
  if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
  if (!flags.algorithm.empty()) config.algorithm = flags.algorithm;
  if (!flags.problem.empty()) config.problem = flags.problem;
  if (flags.gmax > 0) config.generations = flags.gmax;
  if (flags.threads > 0) config.threads = flags.threads;
  if (flags.full_scale) config.full_scale = true;
  config.validate();
  return config;
}

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON experiment configuration");
  cmd->add_option("--seed", flags.seed, "master seed")
      ->each([&flags](const std::string&) { flags.seed_set = true; });
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option("--algorithm", flags.algorithm,
                  "msms_de | ms_de | de1 | ga");
  cmd->add_option("--problem", flags.problem,
                  "ensemble | consensus | sphere | noisy-landscape");
  cmd->add_option("--gmax", flags.gmax, "generation count override");
  cmd->add_option("--threads", flags.threads, "fitness evaluation threads");
  cmd->add_flag("--full-scale", flags.full_scale,
                "use the long published generation counts");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust quantum-control optimization with differential evolution"};
  app.require_subcommand(1);

  CommonFlags train_flags;
  auto* train = app.add_subcommand("train", "optimize a control field and test it");
  add_common(train, train_flags);

  CommonFlags eval_flags;
  std::string genome_path;
  int eval_samples = -1;
  auto* evaluate =
      app.add_subcommand("evaluate", "robustness-test a stored control field");
  add_common(evaluate, eval_flags);
  evaluate->add_option("--genome", genome_path, "genome.csv to test")->required();
  evaluate->add_option("--samples", eval_samples, "testing sample count override");

  auto* verify = app.add_subcommand("verify", "run the built-in analytic checks");

  std::vector<std::string> run_dirs;
  auto* compare = app.add_subcommand("compare", "tabulate finished runs");
  compare->add_option("dirs", run_dirs, "run directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (train->parsed()) {
      qde::cmd_train(resolve_flags(train_flags), std::cout);
      return 0;
    }
    if (evaluate->parsed()) {
      qde::ExperimentConfig config = resolve_flags(eval_flags);
      if (eval_samples >= 0) {
        config.test.samples = eval_samples;
        config.test.noise_samples = eval_samples;
      }
      qde::cmd_evaluate(config, genome_path, std::cout);
      return 0;
    }
    if (verify->parsed()) {
      return qde::cmd_verify(std::cout) == 0 ? 0 : 2;
    }
    if (compare->parsed()) {
      qde::cmd_compare(run_dirs, std::cout);
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
