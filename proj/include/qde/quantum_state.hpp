#pragma once

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <vector>

namespace qde {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Largest |entry| of M - M^dagger.
double hermiticity_residual(const ComplexMatrix& m);

enum class PauliAxis { X, Y, Z };

/// The 2x2 Pauli matrix for the given axis.
ComplexMatrix pauli(PauliAxis axis);

/// n x n matrix with every entry equal to 1. This is NOT the identity; it is
/// the all-ones matrix used e.g. for the symmetric three-qubit target state
/// ones_matrix(8) / 8.
ComplexMatrix ones_matrix(int n);

/// Kronecker product with standard lexicographic index ordering.
ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);

/// Hermitian, unit-trace matrix describing a quantum state.
///
/// Construction enforces Hermiticity and unit trace (1e-9). Positive
/// semidefiniteness is checked on demand via min_eigenvalue()/is_positive()
/// because intermediate numerical states may carry O(1e-10) negative
/// eigenvalues that callers want to inspect rather than fatally reject.
class DensityOperator {
public:
  explicit DensityOperator(ComplexMatrix rho);

  /// |psi><psi| for a (not necessarily normalised) state vector.
  static DensityOperator pure(const ComplexVector& psi);

  /// Maximally mixed state I/n.
  static DensityOperator maximally_mixed(int n);

  int dim() const { return static_cast<int>(rho_.rows()); }
  const ComplexMatrix& matrix() const { return rho_; }

  double min_eigenvalue() const;
  bool is_positive(double tol = 1e-8) const { return min_eigenvalue() >= -tol; }
  double purity() const;  // tr(rho^2)

private:
  ComplexMatrix rho_;
};

/// Ordered set of n^2-1 traceless Hermitian generators with
/// tr(U_l U_m) = 2 delta_lm; for n=2 this is exactly (sigma_x, sigma_y,
/// sigma_z). For n>2 the generalized Gell-Mann construction is used, ordered
/// as: symmetric pair matrices (j<k lexicographic), antisymmetric pair
/// matrices (same order), then diagonal matrices.
class GeneratorBasis {
public:
  explicit GeneratorBasis(int n);

  int dim() const { return dim_; }
  std::size_t size() const { return generators_.size(); }
  const ComplexMatrix& operator[](std::size_t l) const { return generators_[l]; }
  const std::vector<ComplexMatrix>& generators() const { return generators_; }

private:
  int dim_;
  std::vector<ComplexMatrix> generators_;
};

/// Convenience factory matching the operation vocabulary.
inline GeneratorBasis generator_basis(int n) { return GeneratorBasis(n); }

/// Real expansion coefficients y_l = tr(U_l rho); the Bloch vector for n=2.
struct CoherentVector {
  int dim = 0;          // Hilbert-space dimension n
  RealVector components;  // length n^2-1

  double squared_norm() const { return components.squaredNorm(); }
};

/// y_l = tr(U_l rho). Throws if any imaginary residue exceeds 1e-12 (which
/// signals a non-Hermitian input); the residue is discarded after the check.
CoherentVector to_coherent(const DensityOperator& rho, const GeneratorBasis& basis);

/// rho = I/n + (1/2) sum_l y_l U_l. Hermiticity and unit trace hold by
/// construction; positivity is the caller's concern (check is_positive()).
DensityOperator from_coherent(const CoherentVector& y, const GeneratorBasis& basis);

/// (1/2) sum |lambda_j| over eigenvalues of rho - sigma; in [0, 1].
double trace_distance(const DensityOperator& rho, const DensityOperator& sigma);

/// Reduced density operator of subsystem `keep` (0-based) of a composite
/// state with the given local dimensions. prod(local_dims) must equal dim(rho).
DensityOperator partial_trace(const DensityOperator& rho,
                              std::span<const int> local_dims, int keep);

}  // namespace qde
