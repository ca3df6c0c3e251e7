#include "qde/problems.hpp"

#include "qde/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qde {

UncertaintySampleGrid make_grid(double e, int points, int n_params) {
  if (points < 1) throw std::invalid_argument("make_grid: points must be >= 1");
  if (e < 0.0 || e > 1.0) throw std::invalid_argument("make_grid: E must be in [0, 1]");
  if (n_params < 0) throw std::invalid_argument("make_grid: negative parameter count");

  UncertaintySampleGrid grid;
  grid.bound = e;
  grid.points = points;
  grid.params = n_params;

  std::vector<double> values(static_cast<std::size_t>(points), 1.0);
  if (points > 1) {
    for (int p = 0; p < points; ++p)
      values[static_cast<std::size_t>(p)] =
          1.0 + e * (2.0 * double(p) / double(points - 1) - 1.0);
  }

  long count = 1;
  for (int p = 0; p < n_params; ++p) count *= points;
  grid.tuples.reserve(static_cast<std::size_t>(count));
  std::vector<double> tuple(static_cast<std::size_t>(n_params), 1.0);
  for (long k = 0; k < count; ++k) {
    long rem = k;
    for (int p = n_params - 1; p >= 0; --p) {
      tuple[static_cast<std::size_t>(p)] = values[static_cast<std::size_t>(rem % points)];
      rem /= points;
    }
    grid.tuples.push_back(tuple);
  }
  return grid;
}

double fidelity_objective(const CoherentVector& target, const CoherentVector& reached) {
  if (target.dim != reached.dim ||
      target.components.size() != reached.components.size())
    throw std::invalid_argument("fidelity_objective: dimension mismatch");
  const double n = target.dim;
  const double d2 = (target.components - reached.components).squaredNorm();
  return 1.0 - n / (8.0 * (n - 1.0)) * d2;
}

// ---------------------------------------------------------------------------
// Ensemble problem (open two-level system)
// ---------------------------------------------------------------------------

namespace {

LindbladModel make_ensemble_model(double phi) {
  const ComplexMatrix sx = pauli(PauliAxis::X);
  const ComplexMatrix sy = pauli(PauliAxis::Y);
  const ComplexMatrix sz = pauli(PauliAxis::Z);
  ComplexMatrix l1(2, 2), l2(2, 2), l3(2, 2);
  l1 << 0, 0, 0.1, 0;
  l2 << 0, 0.2, 0, 0;
  l3 << 0.2, 0, 0, 0;
  return LindbladModel(0.5 * sz, {std::cos(phi) * sx + std::sin(phi) * sy},
                       {{l1, 1.0}, {l2, 1.0}, {l3, 1.0}});
}

}  // namespace

EnsembleProblem::EnsembleProblem() : EnsembleProblem(Params{}) {}

EnsembleProblem::EnsembleProblem(Params params)
    : params_(params),
      basis_(2),
      model_(make_ensemble_model(params.phi)),
      bloch_(build_bloch_system(model_, basis_)),
      grid_(make_grid(params.e, params.grid_points, 2)),
      lower_(static_cast<std::size_t>(params.steps), params.control_min),
      upper_(static_cast<std::size_t>(params.steps), params.control_max) {
  if (params_.steps < 1) throw std::invalid_argument("ensemble: steps must be >= 1");
  if (params_.t_final <= 0.0) throw std::invalid_argument("ensemble: horizon must be positive");
  if (params_.substeps < 1) throw std::invalid_argument("ensemble: substeps must be >= 1");
}

CoherentVector EnsembleProblem::initial_coherent() const {
  CoherentVector y;
  y.dim = 2;
  y.components = Eigen::Vector3d(0.0, 0.0, 1.0);
  return y;
}

CoherentVector EnsembleProblem::target_coherent() const {
  CoherentVector y;
  y.dim = 2;
  y.components = Eigen::Vector3d(0.0, 0.0, -1.0);
  return y;
}

PiecewiseConstantControl EnsembleProblem::control_from_genome(
    std::span<const double> genome) const {
  return PiecewiseConstantControl::from_genome(
      genome, 1, params_.steps, dt(), {{params_.control_min, params_.control_max}});
}

double EnsembleProblem::evaluate(std::span<const double> genome,
                                 std::span<const double> theta) const {
  if (theta.size() != 2) throw std::invalid_argument("ensemble: theta must be (theta0, theta1)");
  const UncertaintyTuple tuple{theta[0], {theta[1]}};
  if (params_.backend == Backend::Lindblad)
    return evaluate_lindblad(genome, theta, params_.substeps);
  const PiecewiseConstantControl control = control_from_genome(genome);
  const CoherentVector y_final =
      propagate_bloch(bloch_, control, tuple, initial_coherent(), {params_.substeps});
  return fidelity_objective(target_coherent(), y_final);
}

double EnsembleProblem::evaluate_lindblad(std::span<const double> genome,
                                          std::span<const double> theta,
                                          int substeps) const {
  const UncertaintyTuple tuple{theta[0], {theta[1]}};
  const PiecewiseConstantControl control = control_from_genome(genome);
  ComplexMatrix rho0(2, 2);
  rho0 << 1, 0, 0, 0;
  const DensityOperator rho_final = propagate_lindblad(
      model_, control, tuple, DensityOperator(rho0), {substeps});
  return fidelity_objective(target_coherent(), to_coherent(rho_final, basis_));
}

// ---------------------------------------------------------------------------
// Consensus problem (three-qubit network)
// ---------------------------------------------------------------------------

ConsensusProblem::ConsensusProblem() : ConsensusProblem(Params{}) {}

ConsensusProblem::ConsensusProblem(Params params)
    : params_(params),
      grid_(make_grid(params.e, params.grid_points, 2)),
      lower_(static_cast<std::size_t>(6 * params.steps), params.control_min),
      upper_(static_cast<std::size_t>(6 * params.steps), params.control_max) {
  if (params_.steps < 1) throw std::invalid_argument("consensus: steps must be >= 1");
  const ComplexMatrix sx = pauli(PauliAxis::X);
  const ComplexMatrix sz = pauli(PauliAxis::Z);
  const ComplexMatrix id = ComplexMatrix::Identity(2, 2);

  h0_ = params_.omega * (tensor(tensor(sx, sx), id) + tensor(tensor(id, sx), sx) +
                         tensor(tensor(sx, id), sx));
  controls_ = {tensor(tensor(sx, id), id), tensor(tensor(sz, id), id),
               tensor(tensor(id, sx), id), tensor(tensor(id, sz), id),
               tensor(tensor(id, id), sx), tensor(tensor(id, id), sz)};

  ComplexVector q0(2), qminus(2), q1(2);
  q0 << 1, 0;
  qminus << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  q1 << 0, 1;
  psi0_.resize(8);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        psi0_(4 * a + 2 * b + c) = q0(a) * qminus(b) * q1(c);

  psi_target_ = ComplexVector::Constant(8, Complex(1.0 / std::sqrt(8.0), 0.0));

  h0_fixed_ = h0_;
  for (std::size_t j = 0; j < 6; ++j) controls_fixed_[j] = controls_[j];
  psi0_fixed_ = psi0_;
  target_fixed_ = psi_target_;
}

ConsensusProblem::Vector8 ConsensusProblem::propagate_fixed(
    std::span<const double> genome, std::span<const double> theta) const {
  if (genome.size() != static_cast<std::size_t>(genome_dim()))
    throw std::invalid_argument("consensus: genome length must be 6 * steps");
  if (theta.size() != 2)
    throw std::invalid_argument("consensus: theta must be (theta_x, theta_z)");
  const auto steps = static_cast<std::size_t>(params_.steps);
  for (std::size_t j = 0; j < genome.size(); ++j)
    if (genome[j] < params_.control_min - 1e-12 || genome[j] > params_.control_max + 1e-12)
      throw std::invalid_argument("consensus: genome value outside control bounds");

  const std::array<double, 6> channel_theta{theta[0], theta[1], theta[0],
                                            theta[1], theta[0], theta[1]};
  const Complex minus_i_dt(0.0, -dt());
  Vector8 psi = psi0_fixed_;
  Matrix8 a;
  Vector8 term, next;
  for (std::size_t s = 0; s < steps; ++s) {
    a = h0_fixed_;
    for (std::size_t j = 0; j < 6; ++j)
      a += (channel_theta[j] * genome[j * steps + s]) * controls_fixed_[j];
    a *= minus_i_dt;
    // psi <- exp(a) psi; plain Taylor, ||a|| <= ~1.3 for in-bounds controls.
    term = psi;
    const double ref = psi.norm();
    for (int k = 1; k <= 64; ++k) {
      next.noalias() = a * term;
      next /= double(k);
      psi += next;
      term = next;
      if (term.norm() < 1e-14 * ref) break;
    }
  }
  return psi;
}

DensityOperator ConsensusProblem::initial_state() const {
  return DensityOperator::pure(psi0_);
}

DensityOperator ConsensusProblem::target_state() const {
  return DensityOperator(ComplexMatrix(ones_matrix(8) / 8.0));
}

PiecewiseConstantControl ConsensusProblem::control_from_genome(
    std::span<const double> genome) const {
  return PiecewiseConstantControl::from_genome(
      genome, 6, params_.steps, dt(),
      std::vector<ChannelBounds>(6, {params_.control_min, params_.control_max}));
}

UncertaintyTuple ConsensusProblem::expand_theta(std::span<const double> theta) const {
  if (theta.size() != 2)
    throw std::invalid_argument("consensus: theta must be (theta_x, theta_z)");
  // Channels are ordered u1x, u1z, u2x, u2z, u3x, u3z.
  return UncertaintyTuple{1.0, {theta[0], theta[1], theta[0], theta[1], theta[0], theta[1]}};
}

ComplexVector ConsensusProblem::final_statevector(std::span<const double> genome,
                                                  std::span<const double> theta) const {
  return propagate_fixed(genome, theta);
}

double ConsensusProblem::evaluate(std::span<const double> genome,
                                  std::span<const double> theta) const {
  const Vector8 psi = propagate_fixed(genome, theta);
  // For unit-trace states on a tr(U_l U_m) = 2 delta basis,
  //   ||y_a - y_b||^2 = 2 ||rho_a - rho_b||_F^2,
  // and for pure states that is 4 (1 - |<psi_a|psi_b>|^2). Same number as the
  // explicit to_coherent route, without materialising 63 generator traces.
  const double overlap2 = std::norm(target_fixed_.dot(psi));
  const double d2 = 4.0 * (1.0 - overlap2);
  return 1.0 - 8.0 / (8.0 * 7.0) * d2;
}

double ConsensusProblem::evaluate_via_density(std::span<const double> genome,
                                              std::span<const double> theta) const {
  const PiecewiseConstantControl control = control_from_genome(genome);
  const DensityOperator rho_final = propagate_unitary(
      h0_, controls_, control, expand_theta(theta), initial_state());
  const GeneratorBasis basis(8);
  return fidelity_objective(to_coherent(target_state(), basis),
                            to_coherent(rho_final, basis));
}

// ---------------------------------------------------------------------------
// Benchmark problems
// ---------------------------------------------------------------------------

SphereProblem::SphereProblem() : SphereProblem(Params{}) {}

SphereProblem::SphereProblem(Params params)
    : params_(params),
      lower_(static_cast<std::size_t>(params.dim), params.min),
      upper_(static_cast<std::size_t>(params.dim), params.max) {
  if (params_.dim < 1) throw std::invalid_argument("sphere: dim must be >= 1");
}

double SphereProblem::evaluate(std::span<const double> genome,
                               std::span<const double>) const {
  double s = 0.0;
  for (const double x : genome) s += x * x;
  return -s;
}

NoisyLandscapeProblem::NoisyLandscapeProblem() : NoisyLandscapeProblem(Params{}) {}

NoisyLandscapeProblem::NoisyLandscapeProblem(Params params)
    : params_(params),
      lower_(static_cast<std::size_t>(params.dim), 0.0),
      upper_(static_cast<std::size_t>(params.dim), 2.0 * M_PI) {
  if (params_.dim < 1) throw std::invalid_argument("noisy-landscape: dim must be >= 1");
}

double NoisyLandscapeProblem::evaluate(std::span<const double> genome,
                                       std::span<const double>) const {
  double s = 0.0;
  for (const double x : genome) s += std::cos(x - M_PI);
  return s / double(genome.size());
}

// ---------------------------------------------------------------------------
// Fitness aggregation and robustness protocols
// ---------------------------------------------------------------------------

FitnessBreakdown grid_fitness(const RobustControlProblem& problem,
                              const UncertaintySampleGrid& grid,
                              std::span<const double> genome, int threads) {
  FitnessBreakdown out;
  out.per_sample.resize(grid.tuples.size());
  parallel_for(static_cast<int>(grid.tuples.size()), threads, [&](int k) {
    const auto& tuple = grid.tuples[static_cast<std::size_t>(k)];
    out.per_sample[static_cast<std::size_t>(k)] = problem.evaluate(genome, tuple);
  });
  out.average = out.per_sample.empty()
                    ? 0.0
                    : std::accumulate(out.per_sample.begin(), out.per_sample.end(), 0.0) /
                          double(out.per_sample.size());
  return out;
}

FitnessBreakdown ensemble_fitness(std::span<const double> genome,
                                  const EnsembleProblem& problem, int threads) {
  return grid_fitness(problem, problem.grid(), genome, threads);
}

FitnessBreakdown consensus_fitness(std::span<const double> genome,
                                   const ConsensusProblem& problem, int threads) {
  return grid_fitness(problem, problem.grid(), genome, threads);
}

ConsensusCheck check_consensus(const DensityOperator& rho,
                               std::span<const int> local_dims, double tol) {
  const int m = static_cast<int>(local_dims.size());
  std::vector<DensityOperator> reduced;
  reduced.reserve(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) reduced.push_back(partial_trace(rho, local_dims, j));

  ConsensusCheck check;
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      const double d = trace_distance(reduced[static_cast<std::size_t>(a)],
                                      reduced[static_cast<std::size_t>(b)]);
      check.pairwise.push_back(d);
      check.max_pairwise = std::max(check.max_pairwise, d);
    }
  check.is_consensus = check.max_pairwise <= tol;
  return check;
}

DriftSeries free_drift_analysis(const DensityOperator& rho,
                                const ComplexMatrix& h0,
                                std::span<const int> local_dims,
                                const DensityOperator& target_reduced,
                                double horizon, double dt) {
  if (dt <= 0.0 || horizon < 0.0)
    throw std::invalid_argument("free_drift_analysis: bad time grid");
  const int steps = static_cast<int>(std::llround(horizon / dt));
  const int m = static_cast<int>(local_dims.size());
  const int pairs = m * (m - 1) / 2;

  DriftSeries series;
  series.times.resize(static_cast<std::size_t>(steps) + 1);
  series.to_target.setZero(steps + 1, m);
  series.pairwise.setZero(steps + 1, pairs);

  const ComplexMatrix u0 = unitary_step(h0, dt);
  ComplexMatrix state = rho.matrix();
  for (int s = 0; s <= steps; ++s) {
    if (s > 0) state = u0 * state * u0.adjoint();
    series.times[static_cast<std::size_t>(s)] = s * dt;
    const DensityOperator snapshot(state);
    std::vector<DensityOperator> reduced;
    reduced.reserve(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) reduced.push_back(partial_trace(snapshot, local_dims, j));
    for (int j = 0; j < m; ++j)
      series.to_target(s, j) = trace_distance(reduced[static_cast<std::size_t>(j)],
                                              target_reduced);
    int p = 0;
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b)
        series.pairwise(s, p++) = trace_distance(reduced[static_cast<std::size_t>(a)],
                                                 reduced[static_cast<std::size_t>(b)]);
  }
  return series;
}

std::vector<std::vector<double>> additive_noise_samples(
    std::span<const double> genome, std::span<const double> lower,
    std::span<const double> upper, double fraction, NoiseMode mode, int count,
    Rng& rng) {
  if (fraction < 0.0 || fraction >= 1.0)
    throw std::invalid_argument("additive_noise_samples: fraction must be in [0, 1)");
  if (genome.size() != lower.size() || genome.size() != upper.size())
    throw std::invalid_argument("additive_noise_samples: bounds length mismatch");
  const std::size_t d = genome.size();
  const auto clamp_to_bounds = [&](std::vector<double>& v) {
    for (std::size_t j = 0; j < d; ++j) v[j] = std::clamp(v[j], lower[j], upper[j]);
  };

  std::vector<std::vector<double>> samples;
  if (mode == NoiseMode::Training) {
    samples.assign(3, std::vector<double>(genome.begin(), genome.end()));
    for (std::size_t j = 0; j < d; ++j)
      samples[1][j] += fraction * (upper[j] - lower[j]) * rng.uniform();
    for (std::size_t j = 0; j < d; ++j)
      samples[2][j] -= fraction * (upper[j] - lower[j]) * rng.uniform();
    clamp_to_bounds(samples[1]);
    clamp_to_bounds(samples[2]);
  } else {
    if (count < 0) throw std::invalid_argument("additive_noise_samples: negative count");
    samples.assign(static_cast<std::size_t>(count),
                   std::vector<double>(genome.begin(), genome.end()));
    for (auto& s : samples) {
      for (std::size_t j = 0; j < d; ++j)
        s[j] += fraction * (upper[j] - lower[j]) * (2.0 * rng.uniform() - 1.0);
      clamp_to_bounds(s);
    }
  }
  return samples;
}

RobustnessReport RobustnessReport::from_samples(std::vector<std::vector<double>> thetas,
                                                std::vector<double> fitness) {
  RobustnessReport report;
  report.thetas = std::move(thetas);
  report.fitness = std::move(fitness);
  if (report.fitness.empty()) return report;
  const double n = double(report.fitness.size());
  report.mean = std::accumulate(report.fitness.begin(), report.fitness.end(), 0.0) / n;
  report.min = *std::min_element(report.fitness.begin(), report.fitness.end());
  report.max = *std::max_element(report.fitness.begin(), report.fitness.end());
  double ss = 0.0;
  for (const double f : report.fitness) ss += (f - report.mean) * (f - report.mean);
  report.stddev = report.fitness.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return report;
}

RobustnessReport monte_carlo_test(const RobustControlProblem& problem,
                                  std::span<const double> genome,
                                  int n_samples, Rng& rng, int threads) {
  if (n_samples < 0) throw std::invalid_argument("monte_carlo_test: negative sample count");
  if (genome.size() != static_cast<std::size_t>(problem.genome_dim()))
    throw std::invalid_argument("monte_carlo_test: genome dimension mismatch");
  const int p = problem.uncertain_params();
  const double e = problem.uncertainty_bound();

  std::vector<std::vector<double>> thetas(
      static_cast<std::size_t>(n_samples),
      std::vector<double>(static_cast<std::size_t>(p), 1.0));
  for (auto& tuple : thetas)
    for (double& t : tuple) t = rng.uniform(1.0 - e, 1.0 + e);

  std::vector<double> fitness(static_cast<std::size_t>(n_samples), 0.0);
  parallel_for(n_samples, threads, [&](int k) {
    fitness[static_cast<std::size_t>(k)] =
        problem.evaluate(genome, thetas[static_cast<std::size_t>(k)]);
  });
  return RobustnessReport::from_samples(std::move(thetas), std::move(fitness));
}

RobustnessReport additive_noise_test(const RobustControlProblem& problem,
                                     std::span<const double> genome,
                                     double fraction, int n_samples, Rng& rng,
                                     int threads) {
  if (genome.size() != static_cast<std::size_t>(problem.genome_dim()))
    throw std::invalid_argument("additive_noise_test: genome dimension mismatch");
  const auto samples = additive_noise_samples(genome, problem.lower_bounds(),
                                              problem.upper_bounds(), fraction,
                                              NoiseMode::Testing, n_samples, rng);
  std::vector<double> fitness(samples.size(), 0.0);
  parallel_for(static_cast<int>(samples.size()), threads, [&](int k) {
    fitness[static_cast<std::size_t>(k)] =
        problem.evaluate(samples[static_cast<std::size_t>(k)], {});
  });
  return RobustnessReport::from_samples(
      std::vector<std::vector<double>>(samples.size()), std::move(fitness));
}

DriftSeries averaged_free_drift(const ConsensusProblem& problem,
                                std::span<const double> genome,
                                const std::vector<std::vector<double>>& thetas,
                                double horizon, double dt, int threads) {
  if (thetas.empty())
    throw std::invalid_argument("averaged_free_drift: no uncertainty samples");
  const std::array<int, 3> dims{2, 2, 2};
  const DensityOperator target_reduced(ComplexMatrix(ones_matrix(2) / 2.0));

  std::vector<DriftSeries> per_sample(thetas.size());
  parallel_for(static_cast<int>(thetas.size()), threads, [&](int k) {
    const auto ku = static_cast<std::size_t>(k);
    const ComplexVector psi = problem.final_statevector(genome, thetas[ku]);
    per_sample[ku] = free_drift_analysis(DensityOperator::pure(psi), problem.h0(),
                                         dims, target_reduced, horizon, dt);
  });

  DriftSeries mean = per_sample.front();
  for (std::size_t k = 1; k < per_sample.size(); ++k) {
    mean.to_target += per_sample[k].to_target;
    mean.pairwise += per_sample[k].pairwise;
  }
  mean.to_target /= double(per_sample.size());
  mean.pairwise /= double(per_sample.size());
  return mean;
}

}  // namespace qde
