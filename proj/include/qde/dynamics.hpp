#pragma once

#include "qde/quantum_state.hpp"

#include <span>
#include <vector>

namespace qde {

/// Per-channel admissible range for a control value.
struct ChannelBounds {
  double lo = 0.0;
  double hi = 0.0;
};

/// M control channels x D time steps of piecewise-constant amplitudes, each
/// step lasting dt. Values are validated against the per-channel bounds.
class PiecewiseConstantControl {
public:
  PiecewiseConstantControl(RealMatrix values, double dt,
                           std::vector<ChannelBounds> bounds);

  /// Unpacks a flat channel-major genome (all steps of channel 0, then all
  /// steps of channel 1, ...) into a control.
  static PiecewiseConstantControl from_genome(std::span<const double> genome,
                                              int channels, int steps, double dt,
                                              std::vector<ChannelBounds> bounds);

  int channels() const { return static_cast<int>(values_.rows()); }
  int steps() const { return static_cast<int>(values_.cols()); }
  double dt() const { return dt_; }
  double horizon() const { return dt_ * steps(); }
  double value(int channel, int step) const { return values_(channel, step); }
  const RealMatrix& values() const { return values_; }
  const std::vector<ChannelBounds>& bounds() const { return bounds_; }

private:
  RealMatrix values_;  // channels x steps
  double dt_;
  std::vector<ChannelBounds> bounds_;
};

struct LindbladTerm {
  ComplexMatrix op;
  double rate = 1.0;
};

/// Drift Hamiltonian, control Hamiltonians and dissipation channels of an
/// open system. Hamiltonian terms are validated Hermitian within 1e-12.
struct LindbladModel {
  ComplexMatrix h0;
  std::vector<ComplexMatrix> controls;
  std::vector<LindbladTerm> dissipators;

  LindbladModel(ComplexMatrix h0_in, std::vector<ComplexMatrix> controls_in,
                std::vector<LindbladTerm> dissipators_in);

  int dim() const { return static_cast<int>(h0.rows()); }
};

/// Dimensionless multipliers (theta_0, theta_1, ..., theta_M) applied to the
/// drift and to each control channel; all 1 for the nominal system.
struct UncertaintyTuple {
  double theta0 = 1.0;
  std::vector<double> theta;  // one per control channel

  static UncertaintyTuple nominal(int channels) {
    return UncertaintyTuple{1.0, std::vector<double>(static_cast<std::size_t>(channels), 1.0)};
  }
};

/// Affine flow of the coherent vector,
///   ydot = (theta0 * hamiltonian_drift + dissipative_drift
///           + sum_j theta_j u_j controls[j]) y + offset.
struct AffineBlochSystem {
  RealMatrix hamiltonian_drift;    // scales with theta0
  RealMatrix dissipative_drift;    // fixed
  RealVector offset;               // l0
  std::vector<RealMatrix> controls;

  RealMatrix drift(double theta0) const {
    return theta0 * hamiltonian_drift + dissipative_drift;
  }
};

struct PropagateOptions {
  int substeps = 4;  // RK4 substeps per control step
};

/// Right-hand side of the master equation for an arbitrary Hermitian operator
/// x: -i[H, x] + sum_k gamma_k (L x L^+ - (L^+ L x + x L^+ L)/2).
/// The result is traceless and Hermitian for Hermitian input.
ComplexMatrix lindblad_rhs(const ComplexMatrix& x, const ComplexMatrix& h,
                           const LindbladModel& model);

/// Fixed-substep RK4 integration of the master equation with
/// H(t) = theta0 H0 + sum_j theta_j u_j(t) H_j per control step.
/// Throws if the trace drifts by more than 1e-6 after any step. When
/// `trajectory` is non-null the state after every control step is appended.
DensityOperator propagate_lindblad(const LindbladModel& model,
                                   const PiecewiseConstantControl& control,
                                   const UncertaintyTuple& theta,
                                   const DensityOperator& rho0,
                                   const PropagateOptions& opts = {},
                                   std::vector<ComplexMatrix>* trajectory = nullptr);

/// Closed-system evolution: per control step rho <- U rho U^+ with
/// U = exp(-i H dt) for the step's constant H. Exact up to the matrix
/// exponential; preserves spectrum and purity.
DensityOperator propagate_unitary(const ComplexMatrix& h0,
                                  std::span<const ComplexMatrix> controls,
                                  const PiecewiseConstantControl& control,
                                  const UncertaintyTuple& theta,
                                  const DensityOperator& rho0,
                                  std::vector<ComplexMatrix>* trajectory = nullptr);

/// Statevector counterpart of propagate_unitary for pure initial states;
/// applies exp(-i H dt) to psi via a truncated Taylor series (terms added
/// until they fall below 1e-14 relative). Agrees with propagate_unitary to
/// ~1e-12 and is an order of magnitude faster for repeated fitness calls.
ComplexVector propagate_unitary_statevector(const ComplexMatrix& h0,
                                            std::span<const ComplexMatrix> controls,
                                            const PiecewiseConstantControl& control,
                                            const UncertaintyTuple& theta,
                                            ComplexVector psi0);

/// exp(-i h dt) for Hermitian h.
ComplexMatrix unitary_step(const ComplexMatrix& h, double dt);

/// Numerically assembles the coherent-vector representation of the model's
/// flow by pushing every basis element (and I/n, for the offset) through
/// lindblad_rhs. No symbolic superoperator formulas are involved, so the
/// construction is valid for any dimension and is itself a consistency check
/// against hand-derived two-level coefficients.
AffineBlochSystem build_bloch_system(const LindbladModel& model,
                                     const GeneratorBasis& basis);

/// Classical RK4 with fixed substeps on the affine coherent-vector flow.
CoherentVector propagate_bloch(const AffineBlochSystem& sys,
                               const PiecewiseConstantControl& control,
                               const UncertaintyTuple& theta,
                               const CoherentVector& y0,
                               const PropagateOptions& opts = {});

}  // namespace qde
