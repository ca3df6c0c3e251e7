#include "qde/optimizers.hpp"

#include "qde/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qde {

int strategy_index_count(MutationStrategy s) {
  switch (s) {
    case MutationStrategy::Rand1: return 3;
    case MutationStrategy::RandToBest2: return 4;
    case MutationStrategy::Rand2: return 5;
    case MutationStrategy::CurrentToRand1: return 3;
  }
  throw std::invalid_argument("unknown mutation strategy");
}

bool strategy_uses_crossover(MutationStrategy s) {
  return s != MutationStrategy::CurrentToRand1;
}

void Population::update_best() {
  best = 0;
  for (int i = 1; i < size(); ++i)
    if (members[static_cast<std::size_t>(i)].fitness >
        members[static_cast<std::size_t>(best)].fitness)
      best = i;
}

DeConfig DeConfig::mixed_strategy() {
  DeConfig c;
  c.f = ParameterSampling::normal(0.5, 0.3);
  c.cr = ParameterSampling::normal(0.5, 0.1);
  c.pool = {MutationStrategy::Rand1, MutationStrategy::RandToBest2,
            MutationStrategy::Rand2, MutationStrategy::CurrentToRand1};
  return c;
}

std::vector<std::vector<double>> initialize_genomes(std::span<const double> lower,
                                                    std::span<const double> upper,
                                                    int np, Rng& rng) {
  if (lower.size() != upper.size() || lower.empty())
    throw std::invalid_argument("initialize_genomes: bad bounds");
  if (np < 1) throw std::invalid_argument("initialize_genomes: np must be >= 1");
  const std::size_t d = lower.size();
  std::vector<std::vector<double>> pop(static_cast<std::size_t>(np),
                                       std::vector<double>(d, 0.0));
  for (auto& x : pop)
    for (std::size_t j = 0; j < d; ++j)
      x[j] = lower[j] + rng.uniform() * (upper[j] - lower[j]);
  return pop;
}

std::vector<int> distinct_indices(int count, int exclude, int np, Rng& rng) {
  if (count > np - 1)
    throw std::invalid_argument("distinct_indices: population too small");
  std::vector<int> candidates;
  candidates.reserve(static_cast<std::size_t>(np) - 1);
  for (int j = 0; j < np; ++j)
    if (j != exclude) candidates.push_back(j);
  std::vector<int> out(static_cast<std::size_t>(count));
  for (int t = 0; t < count; ++t) {
    const int pick = t + rng.uniform_int(static_cast<int>(candidates.size()) - t);
    std::swap(candidates[static_cast<std::size_t>(t)],
              candidates[static_cast<std::size_t>(pick)]);
    out[static_cast<std::size_t>(t)] = candidates[static_cast<std::size_t>(t)];
  }
  return out;
}

std::vector<double> mutate(MutationStrategy strategy, const Population& pop, int i,
                           double f, double k, Rng& rng) {
  const auto r = distinct_indices(strategy_index_count(strategy), i, pop.size(), rng);
  const auto& x = [&](int idx) -> const std::vector<double>& {
    return pop.members[static_cast<std::size_t>(idx)].x;
  };
  const std::vector<double>& xi = x(i);
  const std::size_t d = xi.size();
  std::vector<double> v(d);
  switch (strategy) {
    case MutationStrategy::Rand1:
      for (std::size_t j = 0; j < d; ++j)
        v[j] = x(r[0])[j] + f * (x(r[1])[j] - x(r[2])[j]);
      break;
    case MutationStrategy::RandToBest2: {
      const std::vector<double>& xb = pop.best_member().x;
      for (std::size_t j = 0; j < d; ++j)
        v[j] = xi[j] + f * (xb[j] - xi[j]) + f * (x(r[0])[j] - x(r[1])[j]) +
               f * (x(r[2])[j] - x(r[3])[j]);
      break;
    }
    case MutationStrategy::Rand2:
      for (std::size_t j = 0; j < d; ++j)
        v[j] = x(r[0])[j] + f * (x(r[1])[j] - x(r[2])[j]) +
               f * (x(r[3])[j] - x(r[4])[j]);
      break;
    case MutationStrategy::CurrentToRand1:
      for (std::size_t j = 0; j < d; ++j)
        v[j] = xi[j] + k * (x(r[0])[j] - xi[j]) + f * (x(r[1])[j] - x(r[2])[j]);
      break;
  }
  return v;
}

void repair_bounds(std::vector<double>& v, std::span<const double> lower,
                   std::span<const double> upper, Rng& rng) {
  for (std::size_t j = 0; j < v.size(); ++j)
    if (v[j] < lower[j] || v[j] > upper[j])
      v[j] = lower[j] + rng.uniform() * (upper[j] - lower[j]);
}

std::vector<double> crossover_binomial(std::span<const double> target,
                                       std::span<const double> donor, double cr,
                                       Rng& rng) {
  if (target.size() != donor.size())
    throw std::invalid_argument("crossover: dimension mismatch");
  const int d = static_cast<int>(target.size());
  const int j_rand = rng.uniform_int(d);
  std::vector<double> trial(target.begin(), target.end());
  for (int j = 0; j < d; ++j) {
    const double u = rng.uniform();
    if (u <= cr || j == j_rand) trial[static_cast<std::size_t>(j)] = donor[static_cast<std::size_t>(j)];
  }
  return trial;
}

double sample_scale_factor(Rng& rng) { return rng.normal(0.5, 0.3); }

double sample_crossover_rate(Rng& rng) {
  double cr = rng.normal(0.5, 0.1);
  while (cr < 0.0 || cr > 1.0) cr = rng.normal(0.5, 0.1);
  return cr;
}

namespace {

void validate_common(const MultiSampleObjective& objective, int np, int generations) {
  if (objective.dim() < 1)
    throw std::invalid_argument("optimizer: objective dimension must be >= 1");
  if (objective.lower_bounds().size() != static_cast<std::size_t>(objective.dim()) ||
      objective.upper_bounds().size() != static_cast<std::size_t>(objective.dim()))
    throw std::invalid_argument("optimizer: bounds do not match dimension");
  if (generations < 0) throw std::invalid_argument("optimizer: negative generation count");
  if (np < 5) throw std::invalid_argument("optimizer: population must be >= 5");
}

GenerationStats snapshot(const Population& pop, const std::array<long, 4>& counts) {
  GenerationStats stats;
  stats.generation = pop.generation;
  stats.best_fitness = pop.best_member().fitness;
  double sum = 0.0;
  for (const auto& m : pop.members) sum += m.fitness;
  stats.mean_fitness = sum / double(pop.size());
  stats.strategy_counts = counts;
  return stats;
}

// Draws the per-evaluation noise block (may be empty) from the stream.
std::vector<double> draw_noise(const MultiSampleObjective& objective, Rng& rng) {
  std::vector<double> noise(static_cast<std::size_t>(objective.noise_draws()));
  for (double& u : noise) u = rng.uniform();
  return noise;
}

Population evaluate_initial(const MultiSampleObjective& objective, int np, int threads,
                            Rng& rng) {
  Population pop;
  auto genomes = initialize_genomes(objective.lower_bounds(), objective.upper_bounds(),
                                    np, rng);
  std::vector<std::vector<double>> noise(static_cast<std::size_t>(np));
  for (int i = 0; i < np; ++i) noise[static_cast<std::size_t>(i)] = draw_noise(objective, rng);
  pop.members.resize(static_cast<std::size_t>(np));
  for (int i = 0; i < np; ++i)
    pop.members[static_cast<std::size_t>(i)].x = std::move(genomes[static_cast<std::size_t>(i)]);
  parallel_for(np, threads, [&](int i) {
    auto& m = pop.members[static_cast<std::size_t>(i)];
    m.fitness = objective.average_fitness(m.x, noise[static_cast<std::size_t>(i)]);
  });
  pop.generation = 0;
  pop.update_best();
  return pop;
}

RunHistory finish(Population& pop, RunHistory history,
                  std::chrono::steady_clock::time_point t0) {
  history.best_genome = pop.best_member().x;
  history.best_fitness = pop.best_member().fitness;
  history.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return history;
}

}  // namespace

RunHistory run_msms_de(const MultiSampleObjective& objective, const DeConfig& config,
                       Rng& rng, const GenerationCallback& callback) {
  validate_common(objective, config.population, config.generations);
  if (config.pool.empty()) throw std::invalid_argument("msms_de: empty strategy pool");
  for (const auto s : config.pool)
    if (strategy_index_count(s) > config.population - 1)
      throw std::invalid_argument("msms_de: population too small for strategy " +
                                  std::to_string(static_cast<int>(s)));

  const auto t0 = std::chrono::steady_clock::now();
  const int np = config.population;
  const int pool_size = static_cast<int>(config.pool.size());
  const auto& lower = objective.lower_bounds();
  const auto& upper = objective.upper_bounds();

  Population pop = evaluate_initial(objective, np, config.threads, rng);
  RunHistory history;
  history.generations.push_back(snapshot(pop, {0, 0, 0, 0}));
  if (callback) callback(history.generations.back(), pop);

  std::vector<std::vector<double>> trials(static_cast<std::size_t>(np));
  std::vector<std::vector<double>> noise(static_cast<std::size_t>(np));
  std::vector<double> trial_fitness(static_cast<std::size_t>(np), 0.0);

  for (int g = 1; g <= config.generations; ++g) {
    std::array<long, 4> counts{0, 0, 0, 0};

    // Sequential phase: all stochastic decisions against the frozen population.
    for (int i = 0; i < np; ++i) {
      const double f =
          config.f.sampled ? rng.normal(config.f.mean, config.f.stddev) : config.f.value;
      MutationStrategy strategy = config.pool.front();
      if (pool_size > 1) {
        const double pp = rng.uniform();
        int band = static_cast<int>(pp * pool_size);
        band = std::min(band, pool_size - 1);
        strategy = config.pool[static_cast<std::size_t>(band)];
      }
      ++counts[static_cast<std::size_t>(static_cast<int>(strategy) - 1)];

      std::vector<double> donor = mutate(strategy, pop, i, f, config.k, rng);
      repair_bounds(donor, lower, upper, rng);

      double cr = config.cr.value;
      if (config.cr.sampled) {
        cr = rng.normal(config.cr.mean, config.cr.stddev);
        while (cr < 0.0 || cr > 1.0) cr = rng.normal(config.cr.mean, config.cr.stddev);
      }

      if (strategy_uses_crossover(strategy)) {
        trials[static_cast<std::size_t>(i)] = crossover_binomial(
            pop.members[static_cast<std::size_t>(i)].x, donor, cr, rng);
      } else {
        trials[static_cast<std::size_t>(i)] = std::move(donor);
      }
      noise[static_cast<std::size_t>(i)] = draw_noise(objective, rng);
    }

    // Parallel phase: pure fitness evaluations.
    parallel_for(np, config.threads, [&](int i) {
      trial_fitness[static_cast<std::size_t>(i)] = objective.average_fitness(
          trials[static_cast<std::size_t>(i)], noise[static_cast<std::size_t>(i)]);
    });

    // Merge in index order.
    const double previous_best = pop.best_member().fitness;
    for (int i = 0; i < np; ++i) {
      auto& m = pop.members[static_cast<std::size_t>(i)];
      if (trial_survives(trial_fitness[static_cast<std::size_t>(i)], m.fitness)) {
        m.x = std::move(trials[static_cast<std::size_t>(i)]);
        m.fitness = trial_fitness[static_cast<std::size_t>(i)];
      }
    }
    pop.generation = g;
    pop.update_best();
    if (pop.best_member().fitness < previous_best)
      throw std::logic_error("msms_de: best fitness decreased");

    history.generations.push_back(snapshot(pop, counts));
    if (callback) callback(history.generations.back(), pop);
  }
  return finish(pop, std::move(history), t0);
}

RunHistory run_basic_de(const MultiSampleObjective& objective, const DeConfig& config,
                        Rng& rng, const GenerationCallback& callback) {
  validate_common(objective, config.population, config.generations);
  if (config.f.sampled || config.cr.sampled)
    throw std::invalid_argument("basic_de: F and CR must be fixed");

  const auto t0 = std::chrono::steady_clock::now();
  const int np = config.population;
  const auto& lower = objective.lower_bounds();
  const auto& upper = objective.upper_bounds();

  Population pop = evaluate_initial(objective, np, config.threads, rng);
  RunHistory history;
  history.generations.push_back(snapshot(pop, {0, 0, 0, 0}));
  if (callback) callback(history.generations.back(), pop);

  std::vector<std::vector<double>> trials(static_cast<std::size_t>(np));
  std::vector<std::vector<double>> noise(static_cast<std::size_t>(np));
  std::vector<double> trial_fitness(static_cast<std::size_t>(np), 0.0);

  for (int g = 1; g <= config.generations; ++g) {
    std::array<long, 4> counts{0, 0, 0, 0};
    for (int i = 0; i < np; ++i) {
      ++counts[0];
      std::vector<double> donor =
          mutate(MutationStrategy::Rand1, pop, i, config.f.value, config.k, rng);
      repair_bounds(donor, lower, upper, rng);
      trials[static_cast<std::size_t>(i)] = crossover_binomial(
          pop.members[static_cast<std::size_t>(i)].x, donor, config.cr.value, rng);
      noise[static_cast<std::size_t>(i)] = draw_noise(objective, rng);
    }
    parallel_for(np, config.threads, [&](int i) {
      trial_fitness[static_cast<std::size_t>(i)] = objective.average_fitness(
          trials[static_cast<std::size_t>(i)], noise[static_cast<std::size_t>(i)]);
    });
    for (int i = 0; i < np; ++i) {
      auto& m = pop.members[static_cast<std::size_t>(i)];
      if (trial_survives(trial_fitness[static_cast<std::size_t>(i)], m.fitness)) {
        m.x = std::move(trials[static_cast<std::size_t>(i)]);
        m.fitness = trial_fitness[static_cast<std::size_t>(i)];
      }
    }
    pop.generation = g;
    pop.update_best();
    history.generations.push_back(snapshot(pop, counts));
    if (callback) callback(history.generations.back(), pop);
  }
  return finish(pop, std::move(history), t0);
}

RunHistory run_ga(const MultiSampleObjective& objective, const GaConfig& config,
                  Rng& rng, const GenerationCallback& callback) {
  validate_common(objective, config.population, config.generations);
  if (config.crossover_probability < 0.0 || config.crossover_probability > 1.0 ||
      config.mutation_probability < 0.0 || config.mutation_probability > 1.0)
    throw std::invalid_argument("ga: probabilities must be in [0, 1]");

  const auto t0 = std::chrono::steady_clock::now();
  const int np = config.population;
  const std::size_t d = static_cast<std::size_t>(objective.dim());
  const auto& lower = objective.lower_bounds();
  const auto& upper = objective.upper_bounds();

  Population pop = evaluate_initial(objective, np, config.threads, rng);
  RunHistory history;
  history.generations.push_back(snapshot(pop, {0, 0, 0, 0}));
  if (callback) callback(history.generations.back(), pop);

  // Tournament of two by cached fitness; ties resolve to the lower index.
  const auto tournament = [&](Rng& r) -> const Individual& {
    const int a = r.uniform_int(np);
    const int b = r.uniform_int(np);
    const auto& ma = pop.members[static_cast<std::size_t>(a)];
    const auto& mb = pop.members[static_cast<std::size_t>(b)];
    if (ma.fitness > mb.fitness) return ma;
    if (mb.fitness > ma.fitness) return mb;
    return a <= b ? ma : mb;
  };

  std::vector<std::vector<double>> children(static_cast<std::size_t>(np - 1));
  std::vector<std::vector<double>> noise(static_cast<std::size_t>(np - 1));
  std::vector<double> child_fitness(static_cast<std::size_t>(np - 1), 0.0);

  for (int g = 1; g <= config.generations; ++g) {
    const Individual elite = pop.best_member();

    for (int s = 0; s < np - 1; ++s) {
      const Individual& pa = tournament(rng);
      const Individual& pb = tournament(rng);
      std::vector<double> child = pa.x;
      if (rng.uniform() < config.crossover_probability) {
        for (std::size_t j = 0; j < d; ++j)
          if (rng.uniform() < 0.5) child[j] = pb.x[j];
      }
      for (std::size_t j = 0; j < d; ++j) {
        if (rng.uniform() < config.mutation_probability) {
          const double sigma = config.mutation_sigma_fraction * (upper[j] - lower[j]);
          child[j] = std::clamp(child[j] + rng.normal(0.0, sigma), lower[j], upper[j]);
        }
      }
      children[static_cast<std::size_t>(s)] = std::move(child);
      noise[static_cast<std::size_t>(s)] = draw_noise(objective, rng);
    }

    parallel_for(np - 1, config.threads, [&](int s) {
      child_fitness[static_cast<std::size_t>(s)] = objective.average_fitness(
          children[static_cast<std::size_t>(s)], noise[static_cast<std::size_t>(s)]);
    });

    pop.members[0] = elite;
    for (int s = 0; s < np - 1; ++s) {
      auto& m = pop.members[static_cast<std::size_t>(s) + 1];
      m.x = std::move(children[static_cast<std::size_t>(s)]);
      m.fitness = child_fitness[static_cast<std::size_t>(s)];
    }
    pop.generation = g;
    pop.update_best();
    history.generations.push_back(snapshot(pop, {0, 0, 0, 0}));
    if (callback) callback(history.generations.back(), pop);
  }
  return finish(pop, std::move(history), t0);
}

}  // namespace qde
