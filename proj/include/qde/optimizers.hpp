#pragma once

#include "qde/rng.hpp"

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace qde {

/// Maximization objective whose value is an average over N samples
/// (uncertainty grid points, noise realisations, or just one sample for
/// plain benchmarks).
///
/// Implementations must be pure with respect to average_fitness: any
/// randomness is injected through `noise`, a block of noise_draws() uniform
/// [0,1) numbers that the optimizer draws sequentially per evaluation. This
/// keeps fitness evaluation parallelisable without touching the RNG stream.
class MultiSampleObjective {
public:
  virtual ~MultiSampleObjective() = default;
  virtual int dim() const = 0;
  virtual const std::vector<double>& lower_bounds() const = 0;
  virtual const std::vector<double>& upper_bounds() const = 0;
  virtual int samples() const = 0;
  virtual int noise_draws() const { return 0; }
  virtual double average_fitness(std::span<const double> genome,
                                 std::span<const double> noise) const = 0;
};

enum class MutationStrategy {
  Rand1 = 1,          // V = X_r1 + F (X_r2 - X_r3)
  RandToBest2 = 2,    // V = X_i + F (X_best - X_i) + F (X_r1 - X_r2) + F (X_r3 - X_r4)
  Rand2 = 3,          // V = X_r1 + F (X_r2 - X_r3) + F (X_r4 - X_r5)
  CurrentToRand1 = 4  // V = X_i + K (X_r1 - X_i) + F (X_r2 - X_r3); no crossover
};

/// Number of mutually exclusive non-self indices the strategy consumes.
int strategy_index_count(MutationStrategy s);

/// Whether the strategy's donor goes through binomial crossover.
bool strategy_uses_crossover(MutationStrategy s);

/// Either a fixed value or per-individual normal sampling for F / CR.
struct ParameterSampling {
  bool sampled = false;
  double value = 0.5;   // used when !sampled
  double mean = 0.5;
  double stddev = 0.3;

  static ParameterSampling fixed(double v) { return {false, v, 0.0, 0.0}; }
  static ParameterSampling normal(double mean, double stddev) {
    return {true, 0.0, mean, stddev};
  }
};

struct Individual {
  std::vector<double> x;
  double fitness = 0.0;
};

struct Population {
  std::vector<Individual> members;
  int generation = 0;
  int best = 0;

  int size() const { return static_cast<int>(members.size()); }
  const Individual& best_member() const { return members[static_cast<std::size_t>(best)]; }
  /// Recomputes `best` from cached fitness; ties resolve to the lowest index.
  void update_best();
};

struct GenerationStats {
  int generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  std::array<long, 4> strategy_counts{0, 0, 0, 0};
};

struct RunHistory {
  std::vector<GenerationStats> generations;  // entry 0 is the initial population
  std::vector<double> best_genome;
  double best_fitness = 0.0;
  double wall_seconds = 0.0;  // reporting only; never part of compared output
};

struct DeConfig {
  int population = 50;
  int generations = 100;
  ParameterSampling f = ParameterSampling::fixed(0.9);
  ParameterSampling cr = ParameterSampling::fixed(0.1);
  std::vector<MutationStrategy> pool{MutationStrategy::Rand1};
  double k = 0.5;  // DE/current-to-rand/1 combination coefficient
  int threads = 1;

  /// Mixed-strategy configuration: four-strategy pool, F ~ N(0.5, 0.3),
  /// CR ~ N(0.5, 0.1).
  static DeConfig mixed_strategy();
};

struct GaConfig {
  int population = 50;
  int generations = 100;
  double crossover_probability = 0.8;
  double mutation_probability = 0.05;
  double mutation_sigma_fraction = 0.05;  // gene sigma as a fraction of range
  int threads = 1;
};

using GenerationCallback =
    std::function<void(const GenerationStats&, const Population&)>;

// --- Operations (exposed for direct testing) -------------------------------

/// x_i^j = lo_j + rand(0,1) (hi_j - lo_j), drawn individual-major,
/// component-minor from the stream.
std::vector<std::vector<double>> initialize_genomes(std::span<const double> lower,
                                                    std::span<const double> upper,
                                                    int np, Rng& rng);

/// `count` mutually exclusive indices from {0..np-1} \ {exclude}, via a
/// partial Fisher-Yates shuffle (consumes exactly `count` integer draws).
std::vector<int> distinct_indices(int count, int exclude, int np, Rng& rng);

/// Donor vector for one individual; unrepaired (may leave the bounds).
std::vector<double> mutate(MutationStrategy strategy, const Population& pop,
                           int i, double f, double k, Rng& rng);

/// Re-randomizes every out-of-bounds component within its range; in-bounds
/// components are untouched.
void repair_bounds(std::vector<double>& v, std::span<const double> lower,
                   std::span<const double> upper, Rng& rng);

/// Binomial crossover: j_rand is drawn first, then one uniform per component;
/// the j_rand component always comes from the donor.
std::vector<double> crossover_binomial(std::span<const double> target,
                                       std::span<const double> donor, double cr,
                                       Rng& rng);

/// Greedy selection for maximization; the trial survives ties.
inline bool trial_survives(double trial_fitness, double target_fitness) {
  return trial_fitness >= target_fitness;
}

/// F ~ N(0.5, 0.3); out-of-range values are accepted as drawn.
double sample_scale_factor(Rng& rng);

/// CR ~ N(0.5, 0.1), redrawn until it lands in [0, 1].
double sample_crossover_rate(Rng& rng);

// --- Engines ---------------------------------------------------------------

/// Mixed-strategy multi-sample DE.
///
/// Per generation the population and its best index are frozen; for each
/// individual i, draws happen sequentially in this order:
///   1. F (two uniforms, only if f.sampled)
///   2. strategy choice pp (one uniform, only if pool.size() > 1; the pool is
///      partitioned into equal probability bands in pool order)
///   3. mutation indices (one integer draw per index)
///   4. bound repair (one uniform per out-of-bounds component)
///   5. CR (two uniforms per attempt, only if cr.sampled; drawn for every
///      strategy, including the crossover-free one)
///   6. crossover (one integer j_rand + dim uniforms; skipped for
///      DE/current-to-rand/1)
///   7. objective noise draws (noise_draws() uniforms)
/// Fitness evaluations then run (possibly in parallel) and selections are
/// merged in index order, so results are independent of `threads`.
RunHistory run_msms_de(const MultiSampleObjective& objective, const DeConfig& config,
                       Rng& rng, const GenerationCallback& callback = {});

/// Plain DE/rand/1/bin with fixed F and CR (requires !f.sampled, !cr.sampled;
/// the strategy pool is ignored). With a single-sample objective this is the
/// DE1 baseline. Draw order matches run_msms_de with a one-strategy pool and
/// fixed parameters, which makes the two engines trajectory-identical in that
/// configuration.
RunHistory run_basic_de(const MultiSampleObjective& objective, const DeConfig& config,
                        Rng& rng, const GenerationCallback& callback = {});

/// Real-coded GA baseline: tournament selection of size 2, uniform crossover
/// with probability crossover_probability, per-gene Gaussian mutation with
/// probability mutation_probability (sigma = mutation_sigma_fraction * range,
/// clamped to bounds), elitism of 1.
RunHistory run_ga(const MultiSampleObjective& objective, const GaConfig& config,
                  Rng& rng, const GenerationCallback& callback = {});

}  // namespace qde
