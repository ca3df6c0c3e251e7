#pragma once

#include "qde/dynamics.hpp"
#include "qde/quantum_state.hpp"
#include "qde/rng.hpp"

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace qde {

/// Finite set of uncertainty tuples used for averaged fitness. Per-parameter
/// sample values are equally spaced over [1-E, 1+E] including the endpoints
/// ({1-E, 1, 1+E} for points=3); tuples enumerate the Cartesian product in
/// lexicographic order with the first parameter varying slowest.
struct UncertaintySampleGrid {
  double bound = 0.0;  // E
  int points = 1;      // samples per parameter
  int params = 0;
  std::vector<std::vector<double>> tuples;

  int size() const { return static_cast<int>(tuples.size()); }
};

UncertaintySampleGrid make_grid(double e, int points, int n_params);

/// J = 1 - n/(8(n-1)) ||y_target - y_reached||^2; in [0, 1] whenever both
/// coherent vectors come from valid states.
double fidelity_objective(const CoherentVector& target, const CoherentVector& reached);

/// A control-search problem with box genome bounds and a scalar objective
/// parameterised by an uncertainty tuple. Objectives are pure and therefore
/// safe to evaluate concurrently.
class RobustControlProblem {
public:
  virtual ~RobustControlProblem() = default;
  virtual std::string name() const = 0;
  virtual int genome_dim() const = 0;
  virtual const std::vector<double>& lower_bounds() const = 0;
  virtual const std::vector<double>& upper_bounds() const = 0;
  /// Number of uncertain parameters; 0 for deterministic benchmark functions.
  virtual int uncertain_params() const = 0;
  virtual double uncertainty_bound() const = 0;  // E
  /// Objective value for one uncertainty sample; theta has uncertain_params()
  /// entries (ignored when uncertain_params() == 0).
  virtual double evaluate(std::span<const double> genome,
                          std::span<const double> theta) const = 0;
};

/// Inhomogeneous open two-level ensemble: H = theta0 sigma_z/2 +
/// theta1 u(t)(cos(phi) sigma_x + sin(phi) sigma_y) with three fixed
/// dissipation channels, steering (0,0,1) to (0,0,-1) over T=10.
class EnsembleProblem : public RobustControlProblem {
public:
  enum class Backend { Bloch, Lindblad };

  struct Params {
    double phi = 0.0;
    double t_final = 10.0;
    int steps = 200;
    double control_min = -10.0;
    double control_max = 10.0;
    double e = 0.2;
    int grid_points = 3;
    int substeps = 4;
    Backend backend = Backend::Bloch;
  };

  EnsembleProblem();
  explicit EnsembleProblem(Params params);

  std::string name() const override { return "ensemble"; }
  int genome_dim() const override { return params_.steps; }
  const std::vector<double>& lower_bounds() const override { return lower_; }
  const std::vector<double>& upper_bounds() const override { return upper_; }
  int uncertain_params() const override { return 2; }  // (theta0, theta1)
  double uncertainty_bound() const override { return params_.e; }
  double evaluate(std::span<const double> genome,
                  std::span<const double> theta) const override;

  /// Same objective through the density-matrix backend regardless of the
  /// configured default; the cross-check oracle for the Bloch fast path.
  double evaluate_lindblad(std::span<const double> genome,
                           std::span<const double> theta, int substeps) const;

  const Params& params() const { return params_; }
  const LindbladModel& model() const { return model_; }
  const AffineBlochSystem& bloch_system() const { return bloch_; }
  const UncertaintySampleGrid& grid() const { return grid_; }
  const GeneratorBasis& basis() const { return basis_; }
  CoherentVector initial_coherent() const;  // (0,0,1)
  CoherentVector target_coherent() const;   // (0,0,-1)
  double dt() const { return params_.t_final / params_.steps; }
  PiecewiseConstantControl control_from_genome(std::span<const double> genome) const;

private:
  Params params_;
  GeneratorBasis basis_;
  LindbladModel model_;
  AffineBlochSystem bloch_;
  UncertaintySampleGrid grid_;
  std::vector<double> lower_, upper_;
};

/// Three-qubit network with pairwise sigma_x sigma_x couplings and six local
/// control channels (x and z per qubit, channel-major genome layout:
/// u1x, u1z, u2x, u2z, u3x, u3z), driven toward the symmetric consensus
/// state ones_matrix(8)/8. Uncertainties (theta_x, theta_z) scale all x- and
/// all z-channels respectively.
class ConsensusProblem : public RobustControlProblem {
public:
  struct Params {
    double omega = 0.1;  // rad/ns; couplings omega_12 = omega_23 = omega_13
    double t_final = 20.0;  // ns
    int steps = 100;
    double control_min = 0.0;
    double control_max = 1.0;
    double e = 0.02;
    int grid_points = 3;
  };

  ConsensusProblem();
  explicit ConsensusProblem(Params params);

  std::string name() const override { return "consensus"; }
  int genome_dim() const override { return 6 * params_.steps; }
  const std::vector<double>& lower_bounds() const override { return lower_; }
  const std::vector<double>& upper_bounds() const override { return upper_; }
  int uncertain_params() const override { return 2; }  // (theta_x, theta_z)
  double uncertainty_bound() const override { return params_.e; }
  double evaluate(std::span<const double> genome,
                  std::span<const double> theta) const override;

  /// Same objective via propagate_unitary + to_coherent; the oracle for the
  /// statevector fast path used by evaluate().
  double evaluate_via_density(std::span<const double> genome,
                              std::span<const double> theta) const;

  const Params& params() const { return params_; }
  const ComplexMatrix& h0() const { return h0_; }
  const std::vector<ComplexMatrix>& control_ops() const { return controls_; }
  const UncertaintySampleGrid& grid() const { return grid_; }
  DensityOperator initial_state() const;
  const ComplexVector& initial_statevector() const { return psi0_; }
  DensityOperator target_state() const;
  double dt() const { return params_.t_final / params_.steps; }
  PiecewiseConstantControl control_from_genome(std::span<const double> genome) const;
  /// Expands (theta_x, theta_z) to per-channel multipliers.
  UncertaintyTuple expand_theta(std::span<const double> theta) const;
  /// Final pure state for one genome and uncertainty sample.
  ComplexVector final_statevector(std::span<const double> genome,
                                  std::span<const double> theta) const;

private:
  using Matrix8 = Eigen::Matrix<Complex, 8, 8>;
  using Vector8 = Eigen::Matrix<Complex, 8, 1>;

  Vector8 propagate_fixed(std::span<const double> genome,
                          std::span<const double> theta) const;

  Params params_;
  ComplexMatrix h0_;
  std::vector<ComplexMatrix> controls_;
  ComplexVector psi0_;
  ComplexVector psi_target_;
  UncertaintySampleGrid grid_;
  std::vector<double> lower_, upper_;
  // Fixed-size copies for the allocation-free fitness kernel.
  Matrix8 h0_fixed_;
  std::array<Matrix8, 6> controls_fixed_;
  Vector8 psi0_fixed_, target_fixed_;
};

/// Maximize -||x||^2; the standard optimizer sanity benchmark.
class SphereProblem : public RobustControlProblem {
public:
  struct Params {
    int dim = 30;
    double min = -5.12;
    double max = 5.12;
  };
  SphereProblem();
  explicit SphereProblem(Params params);

  std::string name() const override { return "sphere"; }
  int genome_dim() const override { return params_.dim; }
  const std::vector<double>& lower_bounds() const override { return lower_; }
  const std::vector<double>& upper_bounds() const override { return upper_; }
  int uncertain_params() const override { return 0; }
  double uncertainty_bound() const override { return 0.0; }
  double evaluate(std::span<const double> genome,
                  std::span<const double> theta) const override;

private:
  Params params_;
  std::vector<double> lower_, upper_;
};

/// Smooth phase-mask landscape on [0, 2*pi]^dim, mean_j cos(x_j - pi),
/// maximized (value 1) at the flat mask x_j = pi. Exercises the additive
/// phase-noise robustness protocol.
class NoisyLandscapeProblem : public RobustControlProblem {
public:
  struct Params {
    int dim = 80;
  };
  NoisyLandscapeProblem();
  explicit NoisyLandscapeProblem(Params params);

  std::string name() const override { return "noisy-landscape"; }
  int genome_dim() const override { return params_.dim; }
  const std::vector<double>& lower_bounds() const override { return lower_; }
  const std::vector<double>& upper_bounds() const override { return upper_; }
  int uncertain_params() const override { return 0; }
  double uncertainty_bound() const override { return 0.0; }
  double evaluate(std::span<const double> genome,
                  std::span<const double> theta) const override;

private:
  Params params_;
  std::vector<double> lower_, upper_;
};

struct FitnessBreakdown {
  double average = 0.0;
  std::vector<double> per_sample;
};

/// Mean objective over the problem's own grid (the training fitness).
FitnessBreakdown grid_fitness(const RobustControlProblem& problem,
                              const UncertaintySampleGrid& grid,
                              std::span<const double> genome, int threads = 1);

FitnessBreakdown ensemble_fitness(std::span<const double> genome,
                                  const EnsembleProblem& problem, int threads = 1);
FitnessBreakdown consensus_fitness(std::span<const double> genome,
                                   const ConsensusProblem& problem, int threads = 1);

struct ConsensusCheck {
  bool is_consensus = false;
  double max_pairwise = 0.0;
  std::vector<double> pairwise;  // (0,1), (0,2), ..., row-major over pairs
};

/// Reduces a multipartite state to every subsystem and compares them
/// pairwise by trace distance.
ConsensusCheck check_consensus(const DensityOperator& rho,
                               std::span<const int> local_dims,
                               double tol = 1e-6);

/// Trace-distance time series under free evolution (controls withdrawn).
struct DriftSeries {
  std::vector<double> times;
  RealMatrix to_target;  // (steps+1) x subsystems
  RealMatrix pairwise;   // (steps+1) x pairs, pair order as in ConsensusCheck
};

/// Propagates rho under h0 alone for `horizon` in steps of `dt`, recording
/// each subsystem's trace distance to `target_reduced` and all pairwise
/// distances (the post-control stability diagnostic).
DriftSeries free_drift_analysis(const DensityOperator& rho,
                                const ComplexMatrix& h0,
                                std::span<const int> local_dims,
                                const DensityOperator& target_reduced,
                                double horizon, double dt);

enum class NoiseMode { Training, Testing };

/// Additive-noise sample protocol. Training mode returns three genomes:
/// the nominal one, one with +fraction*range*rand(0,1) per component and one
/// with -fraction*range*rand(0,1) per component. Testing mode returns `count`
/// genomes with fraction*range*(2*rand(0,1)-1) per component. All results are
/// clamped to the bounds.
std::vector<std::vector<double>> additive_noise_samples(
    std::span<const double> genome, std::span<const double> lower,
    std::span<const double> upper, double fraction, NoiseMode mode, int count,
    Rng& rng);

struct RobustnessReport {
  std::vector<std::vector<double>> thetas;  // empty rows for noise-mode tests
  std::vector<double> fitness;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double stddev = 0.0;  // sample standard deviation

  static RobustnessReport from_samples(std::vector<std::vector<double>> thetas,
                                       std::vector<double> fitness);
};

/// Uniform Monte-Carlo robustness test: draws n_samples uncertainty tuples
/// from [1-E, 1+E]^params (sequentially, so the seeded stream fixes the
/// sample set regardless of threads) and evaluates the genome on each.
RobustnessReport monte_carlo_test(const RobustControlProblem& problem,
                                  std::span<const double> genome,
                                  int n_samples, Rng& rng, int threads = 1);

/// Additive-noise robustness test (testing mode of the sample protocol).
RobustnessReport additive_noise_test(const RobustControlProblem& problem,
                                     std::span<const double> genome,
                                     double fraction, int n_samples, Rng& rng,
                                     int threads = 1);

/// Mean drift curves over a set of uncertainty samples: for each tuple the
/// final controlled state is computed, then evolved freely; curves are
/// averaged pointwise (the 2000-sample testing picture for the network).
DriftSeries averaged_free_drift(const ConsensusProblem& problem,
                                std::span<const double> genome,
                                const std::vector<std::vector<double>>& thetas,
                                double horizon, double dt, int threads = 1);

}  // namespace qde
