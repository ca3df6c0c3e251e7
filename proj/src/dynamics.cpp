#include "qde/dynamics.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>
#include <string>

namespace qde {

namespace {
constexpr double kModelHermTol = 1e-12;
constexpr double kTraceDriftTol = 1e-6;
}  // namespace

PiecewiseConstantControl::PiecewiseConstantControl(RealMatrix values, double dt,
                                                   std::vector<ChannelBounds> bounds)
    : values_(std::move(values)), dt_(dt), bounds_(std::move(bounds)) {
  if (dt_ <= 0.0) throw std::invalid_argument("control: dt must be positive");
  if (values_.rows() < 1 || values_.cols() < 1)
    throw std::invalid_argument("control: need at least one channel and one step");
  if (bounds_.size() != static_cast<std::size_t>(values_.rows()))
    throw std::invalid_argument("control: one bounds pair per channel required");
  for (int c = 0; c < values_.rows(); ++c) {
    const auto& b = bounds_[static_cast<std::size_t>(c)];
    if (b.lo > b.hi) throw std::invalid_argument("control: inverted bounds");
    for (int s = 0; s < values_.cols(); ++s) {
      const double v = values_(c, s);
      if (v < b.lo - 1e-12 || v > b.hi + 1e-12)
        throw std::invalid_argument("control: value " + std::to_string(v) +
                                    " outside channel bounds");
    }
  }
}

PiecewiseConstantControl PiecewiseConstantControl::from_genome(
    std::span<const double> genome, int channels, int steps, double dt,
    std::vector<ChannelBounds> bounds) {
  if (genome.size() != static_cast<std::size_t>(channels) * static_cast<std::size_t>(steps))
    throw std::invalid_argument("control: genome length does not match channels*steps");
  RealMatrix values(channels, steps);
  for (int c = 0; c < channels; ++c)
    for (int s = 0; s < steps; ++s)
      values(c, s) = genome[static_cast<std::size_t>(c) * steps + s];
  return PiecewiseConstantControl(std::move(values), dt, std::move(bounds));
}

LindbladModel::LindbladModel(ComplexMatrix h0_in, std::vector<ComplexMatrix> controls_in,
                             std::vector<LindbladTerm> dissipators_in)
    : h0(std::move(h0_in)),
      controls(std::move(controls_in)),
      dissipators(std::move(dissipators_in)) {
  if (h0.rows() != h0.cols()) throw std::invalid_argument("model: H0 must be square");
  if (hermiticity_residual(h0) > kModelHermTol)
    throw std::invalid_argument("model: H0 not Hermitian");
  for (const auto& hj : controls) {
    if (hj.rows() != h0.rows() || hj.cols() != h0.cols())
      throw std::invalid_argument("model: control dimension mismatch");
    if (hermiticity_residual(hj) > kModelHermTol)
      throw std::invalid_argument("model: control Hamiltonian not Hermitian");
  }
  for (const auto& term : dissipators) {
    if (term.op.rows() != h0.rows() || term.op.cols() != h0.cols())
      throw std::invalid_argument("model: Lindblad operator dimension mismatch");
    if (term.rate < 0.0)
      throw std::invalid_argument("model: negative relaxation rate");
  }
}

ComplexMatrix lindblad_rhs(const ComplexMatrix& x, const ComplexMatrix& h,
                           const LindbladModel& model) {
  const Complex i(0.0, 1.0);
  ComplexMatrix out = -i * (h * x - x * h);
  for (const auto& term : model.dissipators) {
    if (term.rate == 0.0) continue;
    const ComplexMatrix& l = term.op;
    const ComplexMatrix ld = l.adjoint();
    const ComplexMatrix ldl = ld * l;
    out += term.rate * (l * x * ld - 0.5 * (ldl * x + x * ldl));
  }
  return out;
}

namespace {

// One RK4 step of xdot = rhs(x) with constant Hamiltonian h over time h_step.
ComplexMatrix rk4_lindblad_step(const ComplexMatrix& x, const ComplexMatrix& h,
                                const LindbladModel& model, double h_step) {
  const ComplexMatrix k1 = lindblad_rhs(x, h, model);
  const ComplexMatrix k2 = lindblad_rhs(x + 0.5 * h_step * k1, h, model);
  const ComplexMatrix k3 = lindblad_rhs(x + 0.5 * h_step * k2, h, model);
  const ComplexMatrix k4 = lindblad_rhs(x + h_step * k3, h, model);
  return x + (h_step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

ComplexMatrix assemble_hamiltonian(const ComplexMatrix& h0,
                                   std::span<const ComplexMatrix> controls,
                                   const PiecewiseConstantControl& control,
                                   const UncertaintyTuple& theta, int step) {
  if (theta.theta.size() != static_cast<std::size_t>(control.channels()))
    throw std::invalid_argument("propagate: one theta per control channel required");
  if (controls.size() != static_cast<std::size_t>(control.channels()))
    throw std::invalid_argument("propagate: control Hamiltonian count mismatch");
  ComplexMatrix h = theta.theta0 * h0;
  for (int j = 0; j < control.channels(); ++j)
    h += theta.theta[static_cast<std::size_t>(j)] * control.value(j, step) *
         controls[static_cast<std::size_t>(j)];
  return h;
}

}  // namespace

DensityOperator propagate_lindblad(const LindbladModel& model,
                                   const PiecewiseConstantControl& control,
                                   const UncertaintyTuple& theta,
                                   const DensityOperator& rho0,
                                   const PropagateOptions& opts,
                                   std::vector<ComplexMatrix>* trajectory) {
  if (model.dim() != rho0.dim())
    throw std::invalid_argument("propagate_lindblad: dimension mismatch");
  if (opts.substeps < 1)
    throw std::invalid_argument("propagate_lindblad: substeps must be >= 1");

  ComplexMatrix rho = rho0.matrix();
  const double h_step = control.dt() / opts.substeps;
  for (int s = 0; s < control.steps(); ++s) {
    const ComplexMatrix h =
        assemble_hamiltonian(model.h0, model.controls, control, theta, s);
    for (int k = 0; k < opts.substeps; ++k)
      rho = rk4_lindblad_step(rho, h, model, h_step);
    const double drift = std::abs(rho.trace() - Complex(1.0, 0.0));
    if (!(drift <= kTraceDriftTol))  // negated so NaN also aborts
      throw std::runtime_error(
          "propagate_lindblad: trace drift " + std::to_string(drift) +
          " after step " + std::to_string(s) +
          "; reduce dt or increase substeps");
    if (trajectory) trajectory->push_back(rho);
  }
  return DensityOperator(std::move(rho));
}

ComplexMatrix unitary_step(const ComplexMatrix& h, double dt) {
  const Complex i(0.0, 1.0);
  return ComplexMatrix(-i * dt * h).exp();
}

DensityOperator propagate_unitary(const ComplexMatrix& h0,
                                  std::span<const ComplexMatrix> controls,
                                  const PiecewiseConstantControl& control,
                                  const UncertaintyTuple& theta,
                                  const DensityOperator& rho0,
                                  std::vector<ComplexMatrix>* trajectory) {
  if (h0.rows() != rho0.dim())
    throw std::invalid_argument("propagate_unitary: dimension mismatch");
  ComplexMatrix rho = rho0.matrix();
  for (int s = 0; s < control.steps(); ++s) {
    const ComplexMatrix h = assemble_hamiltonian(h0, controls, control, theta, s);
    const ComplexMatrix u = unitary_step(h, control.dt());
    rho = u * rho * u.adjoint();
    if (trajectory) trajectory->push_back(rho);
  }
  return DensityOperator(std::move(rho));
}

ComplexVector propagate_unitary_statevector(const ComplexMatrix& h0,
                                            std::span<const ComplexMatrix> controls,
                                            const PiecewiseConstantControl& control,
                                            const UncertaintyTuple& theta,
                                            ComplexVector psi0) {
  const Complex i(0.0, 1.0);
  ComplexVector psi = std::move(psi0);
  ComplexVector term(psi.size()), next(psi.size());
  for (int s = 0; s < control.steps(); ++s) {
    const ComplexMatrix a =
        (-i * control.dt()) * assemble_hamiltonian(h0, controls, control, theta, s);
    // psi <- exp(a) psi by Taylor series; converges fast since ||a|| = O(1).
    term = psi;
    const double ref = psi.norm();
    for (int k = 1; k <= 64; ++k) {
      next.noalias() = a * term;
      next /= double(k);
      psi += next;
      term.swap(next);
      if (term.norm() < 1e-14 * ref) break;
    }
  }
  return psi;
}

AffineBlochSystem build_bloch_system(const LindbladModel& model,
                                     const GeneratorBasis& basis) {
  if (model.dim() != basis.dim())
    throw std::invalid_argument("build_bloch_system: dimension mismatch");
  const int n = model.dim();
  const auto m = static_cast<Eigen::Index>(basis.size());
  const LindbladModel drift_only(model.h0, {}, model.dissipators);
  const LindbladModel dissipation_only(ComplexMatrix::Zero(n, n), {}, model.dissipators);

  AffineBlochSystem sys;
  sys.hamiltonian_drift.setZero(m, m);
  sys.dissipative_drift.setZero(m, m);
  sys.offset.setZero(m);
  sys.controls.assign(model.controls.size(), RealMatrix::Zero(m, m));

  // For a linear map S, the coherent-space matrix is
  //   M(row, col) = (1/2) tr(U_row S[U_col]),
  // and the offset picks up S applied to the I/n part of rho.
  const ComplexMatrix zero = ComplexMatrix::Zero(n, n);
  for (Eigen::Index col = 0; col < m; ++col) {
    const ComplexMatrix& u = basis[static_cast<std::size_t>(col)];
    const ComplexMatrix h_image = lindblad_rhs(u, model.h0, LindbladModel(model.h0, {}, {}));
    const ComplexMatrix d_image = lindblad_rhs(u, zero, dissipation_only);
    for (Eigen::Index row = 0; row < m; ++row) {
      sys.hamiltonian_drift(row, col) =
          0.5 * (basis[static_cast<std::size_t>(row)] * h_image).trace().real();
      sys.dissipative_drift(row, col) =
          0.5 * (basis[static_cast<std::size_t>(row)] * d_image).trace().real();
    }
    for (std::size_t j = 0; j < model.controls.size(); ++j) {
      const ComplexMatrix c_image =
          lindblad_rhs(u, model.controls[j], LindbladModel(model.controls[j], {}, {}));
      for (Eigen::Index row = 0; row < m; ++row)
        sys.controls[j](row, col) =
            0.5 * (basis[static_cast<std::size_t>(row)] * c_image).trace().real();
    }
  }

  const ComplexMatrix id_image =
      lindblad_rhs(ComplexMatrix::Identity(n, n) / double(n), model.h0, model);
  for (Eigen::Index row = 0; row < m; ++row)
    sys.offset(row) = (basis[static_cast<std::size_t>(row)] * id_image).trace().real();
  return sys;
}

namespace {

// RK4 on ydot = M y + l with M, l constant across the step.
template <typename Mat, typename Vec>
void rk4_affine(const Mat& m, const Vec& l, double h, int substeps, Vec& y) {
  Vec k1, k2, k3, k4;
  for (int s = 0; s < substeps; ++s) {
    k1 = m * y + l;
    k2 = m * (y + 0.5 * h * k1) + l;
    k3 = m * (y + 0.5 * h * k2) + l;
    k4 = m * (y + h * k3) + l;
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
}

}  // namespace

CoherentVector propagate_bloch(const AffineBlochSystem& sys,
                               const PiecewiseConstantControl& control,
                               const UncertaintyTuple& theta,
                               const CoherentVector& y0,
                               const PropagateOptions& opts) {
  const auto m = sys.hamiltonian_drift.rows();
  if (y0.components.size() != m)
    throw std::invalid_argument("propagate_bloch: coherent-vector length mismatch");
  if (theta.theta.size() != static_cast<std::size_t>(control.channels()) ||
      sys.controls.size() != static_cast<std::size_t>(control.channels()))
    throw std::invalid_argument("propagate_bloch: channel count mismatch");
  if (opts.substeps < 1)
    throw std::invalid_argument("propagate_bloch: substeps must be >= 1");

  const double h = control.dt() / opts.substeps;
  CoherentVector y = y0;

  if (m == 3 && control.channels() == 1) {
    // Two-level fast path: fixed-size kernel, no allocation in the loop.
    const Eigen::Matrix3d ah = sys.hamiltonian_drift;
    const Eigen::Matrix3d ad = sys.dissipative_drift;
    const Eigen::Matrix3d b = sys.controls[0];
    const Eigen::Vector3d l = sys.offset;
    Eigen::Vector3d yv = y.components;
    const Eigen::Matrix3d drift = theta.theta0 * ah + ad;
    for (int s = 0; s < control.steps(); ++s) {
      const Eigen::Matrix3d mstep = drift + (theta.theta[0] * control.value(0, s)) * b;
      rk4_affine(mstep, l, h, opts.substeps, yv);
    }
    y.components = yv;
    return y;
  }

  const RealMatrix drift = sys.drift(theta.theta0);
  RealVector yv = y.components;
  for (int s = 0; s < control.steps(); ++s) {
    RealMatrix mstep = drift;
    for (int j = 0; j < control.channels(); ++j)
      mstep += theta.theta[static_cast<std::size_t>(j)] * control.value(j, s) *
               sys.controls[static_cast<std::size_t>(j)];
    rk4_affine(mstep, sys.offset, h, opts.substeps, yv);
  }
  y.components = std::move(yv);
  return y;
}

}  // namespace qde
