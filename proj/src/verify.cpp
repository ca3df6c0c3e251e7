#include "qde/harness.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace qde {

namespace {

struct Checker {
  std::ostream& out;
  int failures = 0;

  void check(const std::string& name, double residual, double tol) {
    const bool ok = residual < tol;
    if (!ok) ++failures;
    out << (ok ? "PASS " : "FAIL ") << std::left << std::setw(34) << name
        << " residual " << std::scientific << std::setprecision(3) << residual
        << "  tol " << tol << std::defaultfloat << '\n';
  }
};

DensityOperator random_state(int n, Rng& rng) {
  ComplexMatrix g(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      g(r, c) = Complex(rng.normal(0.0, 1.0), rng.normal(0.0, 1.0));
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace();
  return DensityOperator(std::move(rho));
}

std::vector<double> random_genome(const RobustControlProblem& p, double scale, Rng& rng) {
  std::vector<double> g(static_cast<std::size_t>(p.genome_dim()));
  const auto& lo = p.lower_bounds();
  const auto& hi = p.upper_bounds();
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double mid = 0.5 * (lo[j] + hi[j]);
    const double half = 0.5 * (hi[j] - lo[j]) * scale;
    g[j] = mid + (2.0 * rng.uniform() - 1.0) * half;
  }
  return g;
}

// Expected coherent-space control generator for the two-level model, up to a
// global sign (the flow is invariant under flipping both the matrix and the
// control sign, and the bounds are symmetric).
double control_block_residual(const RealMatrix& b, double phi) {
  RealMatrix expected(3, 3);
  expected << 0, 0, -2 * std::sin(phi),
              0, 0, 2 * std::cos(phi),
              2 * std::sin(phi), -2 * std::cos(phi), 0;
  const double plus = (b - expected).cwiseAbs().maxCoeff();
  const double minus = (b + expected).cwiseAbs().maxCoeff();
  return std::min(plus, minus);
}

}  // namespace

int cmd_verify(std::ostream& out) {
  Checker c{out};
  Rng rng(42);

  // Generator bases: traceless, Hermitian, tr(Ul Um) = 2 delta.
  for (const int n : {2, 3, 4, 8}) {
    const GeneratorBasis basis(n);
    double residual = 0.0;
    for (std::size_t l = 0; l < basis.size(); ++l) {
      residual = std::max(residual, std::abs(basis[l].trace()));
      residual = std::max(residual, hermiticity_residual(basis[l]));
      for (std::size_t m = 0; m < basis.size(); ++m) {
        const double expected = l == m ? 2.0 : 0.0;
        residual = std::max(residual,
                            std::abs((basis[l] * basis[m]).trace() - expected));
      }
    }
    c.check("generator_basis_n" + std::to_string(n), residual, 1e-12);
  }

  // Two-level coherent-vector flow: drift, offset and control coefficients.
  for (const double phi : {0.0, 0.7}) {
    const EnsembleProblem problem({.phi = phi});
    const AffineBlochSystem& sys = problem.bloch_system();
    RealMatrix drift_expected(3, 3);
    drift_expected << -0.045, -1, 0, 1, -0.045, 0, 0, 0, -0.05;
    RealVector offset_expected(3);
    offset_expected << 0, 0, 0.03;
    const std::string tag = phi == 0.0 ? "phi0" : "phi07";
    c.check("bloch_drift_" + tag,
            (sys.drift(1.0) - drift_expected).cwiseAbs().maxCoeff(), 1e-10);
    c.check("bloch_offset_" + tag,
            (sys.offset - offset_expected).cwiseAbs().maxCoeff(), 1e-10);
    c.check("bloch_control_" + tag, control_block_residual(sys.controls[0], phi),
            1e-10);
  }

  // Symmetric network target: reduced states, stationarity, free evolution.
  {
    const ConsensusProblem problem;
    const DensityOperator target = problem.target_state();
    const std::array<int, 3> dims{2, 2, 2};
    const ComplexMatrix half_ones = ones_matrix(2) / 2.0;
    double reduced_residual = 0.0;
    for (int q = 0; q < 3; ++q)
      reduced_residual =
          std::max(reduced_residual, (partial_trace(target, dims, q).matrix() -
                                      half_ones).cwiseAbs().maxCoeff());
    c.check("consensus_reduced_states", reduced_residual, 1e-12);

    const ComplexMatrix comm = problem.h0() * target.matrix() -
                               target.matrix() * problem.h0();
    c.check("consensus_commutator", comm.cwiseAbs().maxCoeff(), 1e-12);

    const ConsensusCheck check = check_consensus(target, dims, 1e-12);
    c.check("consensus_pairwise", check.max_pairwise, 1e-12);

    // Free evolution through the real propagator (zero control amplitudes).
    const std::vector<double> zero(static_cast<std::size_t>(problem.genome_dim()), 0.0);
    const std::array<double, 2> nominal{1.0, 1.0};
    const PiecewiseConstantControl control = problem.control_from_genome(zero);
    const DensityOperator evolved = propagate_unitary(
        problem.h0(), problem.control_ops(), control, problem.expand_theta(nominal),
        target);
    c.check("consensus_free_evolution",
            (evolved.matrix() - target.matrix()).cwiseAbs().maxCoeff(), 1e-9);
  }

  // Fidelity bounds and the purity identity on random states.
  {
    double bound_residual = 0.0;
    double purity_residual = 0.0;
    double roundtrip_residual = 0.0;
    for (const int n : {2, 8}) {
      const GeneratorBasis basis(n);
      for (int trial = 0; trial < 50; ++trial) {
        const DensityOperator a = random_state(n, rng);
        const DensityOperator b = random_state(n, rng);
        const CoherentVector ya = to_coherent(a, basis);
        const CoherentVector yb = to_coherent(b, basis);
        const double j = fidelity_objective(ya, yb);
        bound_residual = std::max(bound_residual, std::max(-j, j - 1.0));
        purity_residual = std::max(
            purity_residual, std::abs(ya.squared_norm() -
                                      2.0 * (a.purity() - 1.0 / double(n))));
        roundtrip_residual =
            std::max(roundtrip_residual,
                     (from_coherent(ya, basis).matrix() - a.matrix())
                         .cwiseAbs()
                         .maxCoeff());
      }
    }
    c.check("fidelity_bounds", bound_residual, 1e-12);
    c.check("purity_identity", purity_residual, 1e-9);
    c.check("coherent_roundtrip", roundtrip_residual, 1e-12);
  }

  // Propagator invariants on random ensemble controls.
  {
    const EnsembleProblem problem;
    double trace_residual = 0.0, herm_residual = 0.0, eig_floor = 0.0;
    double backend_residual = 0.0, purity_residual = 0.0;
    ComplexMatrix rho0(2, 2);
    rho0 << 1, 0, 0, 0;
    for (int trial = 0; trial < 10; ++trial) {
      const auto genome = random_genome(problem, 1.0, rng);
      const std::array<double, 2> theta{rng.uniform(0.8, 1.2), rng.uniform(0.8, 1.2)};
      const UncertaintyTuple tuple{theta[0], {theta[1]}};
      const auto control = problem.control_from_genome(genome);

      const DensityOperator rho_t = propagate_lindblad(
          problem.model(), control, tuple, DensityOperator(rho0), {8});
      trace_residual = std::max(trace_residual,
                                std::abs(rho_t.matrix().trace() - Complex(1.0, 0.0)));
      herm_residual = std::max(herm_residual, hermiticity_residual(rho_t.matrix()));
      eig_floor = std::min(eig_floor, rho_t.min_eigenvalue());

      const CoherentVector y_bloch = propagate_bloch(
          problem.bloch_system(), control, tuple, problem.initial_coherent(), {8});
      backend_residual = std::max(
          backend_residual,
          (to_coherent(rho_t, problem.basis()).components - y_bloch.components)
              .cwiseAbs()
              .maxCoeff());

      // Closed-system limit: strip the dissipators, compare purity.
      const LindbladModel closed(problem.model().h0, problem.model().controls, {});
      const auto mild = random_genome(problem, 0.2, rng);
      const auto mild_control = problem.control_from_genome(mild);
      const DensityOperator closed_t = propagate_lindblad(
          closed, mild_control, tuple, DensityOperator(rho0), {64});
      purity_residual = std::max(purity_residual, std::abs(closed_t.purity() - 1.0));
    }
    c.check("lindblad_trace", trace_residual, 1e-9);
    c.check("lindblad_hermiticity", herm_residual, 1e-9);
    c.check("lindblad_positivity", std::max(0.0, -eig_floor), 1e-8);
    c.check("bloch_lindblad_agreement", backend_residual, 1e-8);
    c.check("closed_system_purity", purity_residual, 1e-9);
  }

  // Unitary propagator: purity and spectrum preservation, step unitarity.
  {
    const ConsensusProblem problem;
    const auto genome = random_genome(problem, 1.0, rng);
    const std::array<double, 2> theta{1.01, 0.99};
    const DensityOperator rho0 = problem.initial_state();
    const DensityOperator rho_t =
        propagate_unitary(problem.h0(), problem.control_ops(),
                          problem.control_from_genome(genome),
                          problem.expand_theta(theta), rho0);
    c.check("unitary_purity", std::abs(rho_t.purity() - rho0.purity()), 1e-9);

    const ComplexMatrix u = unitary_step(problem.h0(), 0.2);
    c.check("unitary_step_unitarity",
            (u * u.adjoint() - ComplexMatrix::Identity(8, 8)).cwiseAbs().maxCoeff(),
            1e-10);

    const ComplexVector psi = propagate_unitary_statevector(
        problem.h0(), problem.control_ops(), problem.control_from_genome(genome),
        problem.expand_theta(theta), problem.initial_statevector());
    c.check("statevector_density_agreement",
            (DensityOperator::pure(psi).matrix() - rho_t.matrix()).cwiseAbs().maxCoeff(),
            1e-10);
  }

  // Richardson order check for the fixed-substep RK4 paths.
  {
    const EnsembleProblem problem;
    std::vector<double> genome(static_cast<std::size_t>(problem.genome_dim()));
    for (std::size_t j = 0; j < genome.size(); ++j)
      genome[j] = 2.0 * std::sin(2.0 * M_PI * double(j) / double(genome.size()));
    const auto control = problem.control_from_genome(genome);
    const UncertaintyTuple tuple{1.1, {0.9}};
    const auto run = [&](int substeps) {
      return propagate_bloch(problem.bloch_system(), control, tuple,
                             problem.initial_coherent(), {substeps});
    };
    const double d1 =
        (run(1).components - run(2).components).cwiseAbs().maxCoeff();
    const double d2 =
        (run(2).components - run(4).components).cwiseAbs().maxCoeff();
    const double exponent = std::log2(d1 / d2);
    c.check("rk4_order_exponent_deviation", std::abs(exponent - 4.0), 0.5);
  }

  out << (c.failures == 0 ? "verification passed" : "verification FAILED") << " ("
      << c.failures << " failures)\n";
  return c.failures;
}

}  // namespace qde
