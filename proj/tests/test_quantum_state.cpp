#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qde/quantum_state.hpp"
#include "test_util.hpp"

#include <array>
#include <cmath>

using namespace qde;
using namespace qde::testutil;

TEST_CASE("pauli matrices") {
  const ComplexMatrix sx = pauli(PauliAxis::X);
  CHECK(sx(0, 0) == Complex(0, 0));
  CHECK(sx(0, 1) == Complex(1, 0));
  CHECK(sx(1, 0) == Complex(1, 0));
  CHECK(sx(1, 1) == Complex(0, 0));

  const ComplexMatrix sz = pauli(PauliAxis::Z);
  CHECK(sz(0, 0) == Complex(1, 0));
  CHECK(sz(1, 1) == Complex(-1, 0));
  CHECK(sz(0, 1) == Complex(0, 0));

  const ComplexMatrix sy = pauli(PauliAxis::Y);
  CHECK(max_abs_diff(sy * sy, ComplexMatrix::Identity(2, 2)) == doctest::Approx(0.0));
}

TEST_CASE("generator basis: two-level case is the Pauli triple in order") {
  const GeneratorBasis basis(2);
  REQUIRE(basis.size() == 3);
  CHECK(max_abs_diff(basis[0], pauli(PauliAxis::X)) < 1e-15);
  CHECK(max_abs_diff(basis[1], pauli(PauliAxis::Y)) < 1e-15);
  CHECK(max_abs_diff(basis[2], pauli(PauliAxis::Z)) < 1e-15);
}

TEST_CASE("generator basis: counts and invariants for n in {2,3,4,8}") {
  for (const int n : {2, 3, 4, 8}) {
    const GeneratorBasis basis(n);
    REQUIRE(static_cast<int>(basis.size()) == n * n - 1);
    for (std::size_t l = 0; l < basis.size(); ++l) {
      CHECK(std::abs(basis[l].trace()) <= 1e-12);
      CHECK(hermiticity_residual(basis[l]) <= 1e-12);
      for (std::size_t m = 0; m < basis.size(); ++m) {
        const double expected = l == m ? 2.0 : 0.0;
        CHECK(std::abs((basis[l] * basis[m]).trace() - expected) <= 1e-12);
      }
    }
  }
}

TEST_CASE("generator basis rejects n < 2") {
  CHECK_THROWS_AS(GeneratorBasis(1), std::invalid_argument);
  CHECK_THROWS_AS(GeneratorBasis(0), std::invalid_argument);
}

TEST_CASE("tensor product") {
  const ComplexMatrix id2 = ComplexMatrix::Identity(2, 2);
  CHECK(max_abs_diff(tensor(id2, id2), ComplexMatrix::Identity(4, 4)) == 0.0);

  // sigma_x on qubit 1 of three: flips the most significant bit.
  const ComplexMatrix sx1 = tensor(tensor(pauli(PauliAxis::X), id2), id2);
  ComplexVector e0 = ComplexVector::Zero(8);
  e0(0) = 1.0;
  const ComplexVector flipped = sx1 * e0;
  CHECK(std::abs(flipped(4) - Complex(1, 0)) < 1e-15);

  Rng rng(11);
  for (int t = 0; t < 5; ++t) {
    const ComplexMatrix a = random_matrix(2, rng);
    const ComplexMatrix b = random_matrix(2, rng);
    CHECK(std::abs(tensor(a, b).trace() - a.trace() * b.trace()) < 1e-12);
  }
}

TEST_CASE("partial trace recovers factors of a product state") {
  Rng rng(5);
  const DensityOperator a = random_state(2, rng);
  const DensityOperator b = random_state(3, rng);
  const DensityOperator ab(ComplexMatrix(tensor(a.matrix(), b.matrix())));
  const std::array<int, 2> dims{2, 3};
  CHECK(max_abs_diff(partial_trace(ab, dims, 0).matrix(), a.matrix()) < 1e-12);
  CHECK(max_abs_diff(partial_trace(ab, dims, 1).matrix(), b.matrix()) < 1e-12);
}

TEST_CASE("partial trace of the all-ones three-qubit state") {
  const DensityOperator rho(ComplexMatrix(ones_matrix(8) / 8.0));
  const std::array<int, 3> dims{2, 2, 2};
  const ComplexMatrix expected = ones_matrix(2) / 2.0;
  for (int q = 0; q < 3; ++q)
    CHECK(max_abs_diff(partial_trace(rho, dims, q).matrix(), expected) < 1e-12);
}

TEST_CASE("partial trace of a Bell state is maximally mixed") {
  ComplexVector bell = ComplexVector::Zero(4);
  bell(0) = 1.0 / std::sqrt(2.0);
  bell(3) = 1.0 / std::sqrt(2.0);
  const DensityOperator rho = DensityOperator::pure(bell);
  const std::array<int, 2> dims{2, 2};
  const ComplexMatrix half = ComplexMatrix::Identity(2, 2) / 2.0;
  CHECK(max_abs_diff(partial_trace(rho, dims, 0).matrix(), half) < 1e-12);
  CHECK(max_abs_diff(partial_trace(rho, dims, 1).matrix(), half) < 1e-12);
}

TEST_CASE("partial trace preserves trace and Hermiticity") {
  Rng rng(7);
  const std::array<int, 3> dims{2, 2, 2};
  for (int t = 0; t < 10; ++t) {
    const DensityOperator rho = random_state(8, rng);
    for (int q = 0; q < 3; ++q) {
      const DensityOperator reduced = partial_trace(rho, dims, q);
      CHECK(std::abs(reduced.matrix().trace() - Complex(1, 0)) < 1e-12);
      CHECK(hermiticity_residual(reduced.matrix()) < 1e-12);
    }
  }
  CHECK_THROWS_AS(partial_trace(random_state(6, rng), dims, 0), std::invalid_argument);
}

TEST_CASE("coherent vector of basis states") {
  const GeneratorBasis basis(2);
  ComplexMatrix ground(2, 2);
  ground << 1, 0, 0, 0;
  const CoherentVector y = to_coherent(DensityOperator(ground), basis);
  CHECK(y.components(0) == doctest::Approx(0.0));
  CHECK(y.components(1) == doctest::Approx(0.0));
  CHECK(y.components(2) == doctest::Approx(1.0));

  const CoherentVector y_mixed =
      to_coherent(DensityOperator::maximally_mixed(2), basis);
  CHECK(y_mixed.components.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("all-ones state is pure: coherent norm reaches the bound") {
  const GeneratorBasis basis(8);
  const DensityOperator rho(ComplexMatrix(ones_matrix(8) / 8.0));
  const CoherentVector y = to_coherent(rho, basis);
  CHECK(y.squared_norm() == doctest::Approx(2.0 * (1.0 - 1.0 / 8.0)).epsilon(1e-12));
}

TEST_CASE("from_coherent reconstructs states") {
  const GeneratorBasis basis(2);
  CoherentVector y;
  y.dim = 2;
  y.components = Eigen::Vector3d(0.0, 0.0, -1.0);
  ComplexMatrix excited(2, 2);
  excited << 0, 0, 0, 1;
  CHECK(max_abs_diff(from_coherent(y, basis).matrix(), excited) < 1e-15);

  y.components.setZero();
  CHECK(max_abs_diff(from_coherent(y, basis).matrix(),
                     ComplexMatrix::Identity(2, 2) / 2.0) < 1e-15);
}

TEST_CASE("coherent round trip and purity identity on random states") {
  Rng rng(23);
  for (const int n : {2, 3, 4, 8}) {
    const GeneratorBasis basis(n);
    for (int t = 0; t < (n == 8 ? 10 : 50); ++t) {
      const DensityOperator rho = random_state(n, rng);
      const CoherentVector y = to_coherent(rho, basis);
      CHECK(max_abs_diff(from_coherent(y, basis).matrix(), rho.matrix()) < 1e-12);
      CHECK(std::abs(y.squared_norm() - 2.0 * (rho.purity() - 1.0 / n)) < 1e-9);
      CHECK(y.squared_norm() <= 2.0 * (1.0 - 1.0 / n) + 1e-9);
    }
  }
}

TEST_CASE("trace distance on known pairs") {
  ComplexMatrix g(2, 2), e(2, 2), plus(2, 2);
  g << 1, 0, 0, 0;
  e << 0, 0, 0, 1;
  plus << 0.5, 0.5, 0.5, 0.5;
  const DensityOperator ground(g), excited(e), superposed(plus);
  CHECK(trace_distance(ground, ground) == doctest::Approx(0.0));
  CHECK(trace_distance(ground, excited) == doctest::Approx(1.0));
  CHECK(trace_distance(ground, superposed) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("trace distance: symmetry, range, triangle inequality") {
  Rng rng(31);
  for (int t = 0; t < 25; ++t) {
    const DensityOperator a = random_state(4, rng);
    const DensityOperator b = random_state(4, rng);
    const DensityOperator c = random_state(4, rng);
    const double dab = trace_distance(a, b);
    const double dba = trace_distance(b, a);
    CHECK(dab == doctest::Approx(dba).epsilon(1e-12));
    CHECK(dab >= 0.0);
    CHECK(dab <= 1.0 + 1e-12);
    CHECK(dab <= trace_distance(a, c) + trace_distance(c, b) + 1e-9);
  }
}

TEST_CASE("density operator validation") {
  ComplexMatrix bad(2, 2);
  bad << 1, Complex(0, 1), 0, 0;  // not Hermitian
  CHECK_THROWS_AS(DensityOperator{bad}, std::invalid_argument);

  ComplexMatrix wrong_trace(2, 2);
  wrong_trace << 1, 0, 0, 1;  // trace 2
  CHECK_THROWS_AS(DensityOperator{wrong_trace}, std::invalid_argument);

  const DensityOperator mixed = DensityOperator::maximally_mixed(4);
  CHECK(mixed.min_eigenvalue() == doctest::Approx(0.25));
  CHECK(mixed.is_positive());
  CHECK(mixed.purity() == doctest::Approx(0.25));
}

TEST_CASE("to_coherent flags inputs with non-negligible imaginary residue") {
  // A matrix inside the DensityOperator Hermiticity tolerance (1e-9) but
  // outside the 1e-12 residue budget of the coherent projection.
  ComplexMatrix skew(2, 2);
  skew << 0.5, Complex(0.0, 5e-11), Complex(0.0, 5e-11), 0.5;
  const DensityOperator rho(skew);
  const GeneratorBasis basis(2);
  CHECK_THROWS_AS(to_coherent(rho, basis), std::invalid_argument);
}

TEST_CASE("ones_matrix is the all-ones matrix, not the identity") {
  const ComplexMatrix m = ones_matrix(3);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) CHECK(m(r, c) == Complex(1, 0));
}
