#include "qde/quantum_state.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <stdexcept>
#include <string>

namespace qde {

namespace {
constexpr double kHermTol = 1e-9;
constexpr double kTraceTol = 1e-9;
constexpr double kBasisTol = 1e-12;
}  // namespace

double hermiticity_residual(const ComplexMatrix& m) {
  return (m - m.adjoint().eval()).cwiseAbs().maxCoeff();
}

ComplexMatrix pauli(PauliAxis axis) {
  ComplexMatrix m(2, 2);
  const Complex i(0.0, 1.0);
  switch (axis) {
    case PauliAxis::X:
      m << 0, 1, 1, 0;
      break;
    case PauliAxis::Y:
      m << 0, -i, i, 0;
      break;
    case PauliAxis::Z:
      m << 1, 0, 0, -1;
      break;
  }
  return m;
}

ComplexMatrix ones_matrix(int n) {
  if (n < 1) throw std::invalid_argument("ones_matrix: n must be positive");
  return ComplexMatrix::Ones(n, n);
}

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

DensityOperator::DensityOperator(ComplexMatrix rho) : rho_(std::move(rho)) {
  if (rho_.rows() != rho_.cols() || rho_.rows() < 1)
    throw std::invalid_argument("DensityOperator: matrix must be square and nonempty");
  const double herm = hermiticity_residual(rho_);
  if (!(herm <= kHermTol))  // negated so NaN is rejected too
    throw std::invalid_argument("DensityOperator: Hermiticity residual " +
                                std::to_string(herm));
  const double tr_err = std::abs(rho_.trace() - Complex(1.0, 0.0));
  if (!(tr_err <= kTraceTol))
    throw std::invalid_argument("DensityOperator: trace deviates from 1 by " +
                                std::to_string(tr_err));
}

DensityOperator DensityOperator::pure(const ComplexVector& psi) {
  const double n2 = psi.squaredNorm();
  if (n2 <= 0.0) throw std::invalid_argument("DensityOperator::pure: zero vector");
  return DensityOperator(ComplexMatrix((psi * psi.adjoint()) / n2));
}

DensityOperator DensityOperator::maximally_mixed(int n) {
  if (n < 1) throw std::invalid_argument("maximally_mixed: n must be positive");
  return DensityOperator(ComplexMatrix(ComplexMatrix::Identity(n, n) / double(n)));
}

double DensityOperator::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double DensityOperator::purity() const {
  return (rho_ * rho_).trace().real();
}

GeneratorBasis::GeneratorBasis(int n) : dim_(n) {
  if (n < 2) throw std::invalid_argument("GeneratorBasis: n must be >= 2");
  generators_.reserve(static_cast<std::size_t>(n) * n - 1);
  const Complex i(0.0, 1.0);

  // Symmetric pair matrices |j><k| + |k><j|, j<k lexicographic.
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      ComplexMatrix m = ComplexMatrix::Zero(n, n);
      m(j, k) = 1.0;
      m(k, j) = 1.0;
      generators_.push_back(std::move(m));
    }
  }
  // Antisymmetric pair matrices -i(|j><k| - |k><j|).
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      ComplexMatrix m = ComplexMatrix::Zero(n, n);
      m(j, k) = -i;
      m(k, j) = i;
      generators_.push_back(std::move(m));
    }
  }
  // Diagonal matrices sqrt(2/(l(l+1))) (sum_{j<=l-1} |j><j| - l|l><l|).
  for (int l = 1; l < n; ++l) {
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    const double scale = std::sqrt(2.0 / (double(l) * (l + 1)));
    for (int j = 0; j < l; ++j) m(j, j) = scale;
    m(l, l) = -scale * l;
    generators_.push_back(std::move(m));
  }

  // For n=2 the construction above yields exactly (sigma_x, sigma_y, sigma_z).
  for (std::size_t l = 0; l < generators_.size(); ++l) {
    if (std::abs(generators_[l].trace()) > kBasisTol)
      throw std::logic_error("GeneratorBasis: generator not traceless");
    if (hermiticity_residual(generators_[l]) > kBasisTol)
      throw std::logic_error("GeneratorBasis: generator not Hermitian");
    for (std::size_t m = l; m < generators_.size(); ++m) {
      const Complex p = (generators_[l] * generators_[m]).trace();
      const double expected = (l == m) ? 2.0 : 0.0;
      if (std::abs(p - expected) > kBasisTol)
        throw std::logic_error("GeneratorBasis: orthogonality violated");
    }
  }
}

CoherentVector to_coherent(const DensityOperator& rho, const GeneratorBasis& basis) {
  if (rho.dim() != basis.dim())
    throw std::invalid_argument("to_coherent: dimension mismatch");
  CoherentVector y;
  y.dim = rho.dim();
  y.components.resize(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t l = 0; l < basis.size(); ++l) {
    const Complex t = (basis[l] * rho.matrix()).trace();
    if (std::abs(t.imag()) > 1e-12)
      throw std::invalid_argument("to_coherent: imaginary residue  " +
                                  std::to_string(t.imag()) +
                                  " signals a non-Hermitian input");
    y.components[static_cast<Eigen::Index>(l)] = t.real();
  }
  return y;
}

DensityOperator from_coherent(const CoherentVector& y, const GeneratorBasis& basis) {
  if (y.dim != basis.dim() ||
      y.components.size() != static_cast<Eigen::Index>(basis.size()))
    throw std::invalid_argument("from_coherent: dimension mismatch");
  const int n = y.dim;
  ComplexMatrix rho = ComplexMatrix::Identity(n, n) / double(n);
  for (std::size_t l = 0; l < basis.size(); ++l)
    rho += 0.5 * y.components[static_cast<Eigen::Index>(l)] * basis[l];
  return DensityOperator(std::move(rho));
}

double trace_distance(const DensityOperator& rho, const DensityOperator& sigma) {
  if (rho.dim() != sigma.dim())
    throw std::invalid_argument("trace_distance: dimension mismatch");
  ComplexMatrix diff = rho.matrix() - sigma.matrix();
  const double residue = hermiticity_residual(diff);
  if (residue > 1e-10)
    throw std::invalid_argument("trace_distance: symmetrization residue " +
                                std::to_string(residue));
  diff = 0.5 * (diff + diff.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(diff, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

DensityOperator partial_trace(const DensityOperator& rho,
                              std::span<const int> local_dims, int keep) {
  long total = 1;
  for (const int d : local_dims) {
    if (d < 1) throw std::invalid_argument("partial_trace: nonpositive local dim");
    total *= d;
  }
  if (total != rho.dim())
    throw std::invalid_argument("partial_trace: local dims do not factor the state");
  if (keep < 0 || keep >= static_cast<int>(local_dims.size()))
    throw std::invalid_argument("partial_trace: keep index out of range");

  const int m = static_cast<int>(local_dims.size());
  std::vector<long> stride(static_cast<std::size_t>(m), 1);
  for (int s = m - 2; s >= 0; --s)
    stride[static_cast<std::size_t>(s)] =
        stride[static_cast<std::size_t>(s + 1)] * local_dims[static_cast<std::size_t>(s + 1)];

  const int dk = local_dims[static_cast<std::size_t>(keep)];
  const long rest = total / dk;
  ComplexMatrix out = ComplexMatrix::Zero(dk, dk);

  // Enumerate the traced-out multi-index once; a and b sweep the kept factor.
  for (long r = 0; r < rest; ++r) {
    long base = 0;
    long rem = r;
    for (int s = m - 1; s >= 0; --s) {
      if (s == keep) continue;
      const auto su = static_cast<std::size_t>(s);
      const long idx = rem % local_dims[su];
      rem /= local_dims[su];
      base += idx * stride[su];
    }
    const long sk = stride[static_cast<std::size_t>(keep)];
    for (int a = 0; a < dk; ++a)
      for (int b = 0; b < dk; ++b)
        out(a, b) += rho.matrix()(base + a * sk, base + b * sk);
  }
  return DensityOperator(std::move(out));
}

}  // namespace qde
