#include <gtest/gtest.h>

#include "qig/matrix_core.hpp"

using namespace qig;

TEST(HermitianMatrix, RejectsNonHermitian) {
  ComplexMatrix m(2, 2);
  m << 1, 2, 3, 4;
  EXPECT_THROW(HermitianMatrix{m}, InvariantViolation);
  EXPECT_THROW(HermitianMatrix{ComplexMatrix(2, 3)}, DimensionMismatch);
  m << 1, cplx(0, 1), cplx(0, -1), 2;
  EXPECT_NO_THROW(HermitianMatrix{m});
  m(0, 0) = cplx(1, 1e-6);
  EXPECT_THROW(HermitianMatrix{m}, InvariantViolation);
}

TEST(SpectralDecompose, IdentityAndPauli) {
  auto id = spectral_decompose(HermitianMatrix::identity(2));
  EXPECT_NEAR(id.values(0), 1.0, 1e-15);
  EXPECT_NEAR(id.values(1), 1.0, 1e-15);

  auto s1 = spectral_decompose(pauli(1));
  EXPECT_NEAR(s1.values(0), -1.0, 1e-15);
  EXPECT_NEAR(s1.values(1), 1.0, 1e-15);
}

TEST(SpectralDecompose, ReconstructsRandomHermitian) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const Index n = 1 + static_cast<Index>(seed % 8);
    HermitianMatrix h = random_hermitian(seed, n);
    Spectrum s = spectral_decompose(h);
    for (Index i = 1; i < n; ++i) ASSERT_LE(s.values(i - 1), s.values(i));
    ComplexMatrix rec = s.vectors * s.values.cast<cplx>().asDiagonal() * s.vectors.adjoint();
    ASSERT_LT((rec - h.matrix()).norm(), 1e-10) << "seed " << seed;
    ASSERT_LT((s.vectors.adjoint() * s.vectors - ComplexMatrix::Identity(n, n)).norm(), 1e-10);
  }
}

TEST(GellMann, QubitIsHalfPauli) {
  auto b = gell_mann_basis(2);
  ASSERT_EQ(b.size(), 3);
  for (int k = 0; k < 3; ++k)
    EXPECT_LT((b[k].matrix() - 0.5 * pauli(k + 1).matrix()).norm(), 1e-15);
  EXPECT_LT((b.gram() - 0.5 * RealMatrix::Identity(3, 3)).norm(), 1e-15);
}

TEST(GellMann, GramIsHalfIdentityAndTraceless) {
  for (Index n = 2; n <= 6; ++n) {
    auto b = gell_mann_basis(n);
    ASSERT_EQ(b.size(), n * n - 1);
    EXPECT_LT((b.gram() - 0.5 * RealMatrix::Identity(n * n - 1, n * n - 1)).norm(), 1e-14) << n;
    for (const auto& e : b.elements()) EXPECT_LT(std::abs(e.hermitian().trace()), 1e-14);
  }
  EXPECT_THROW(gell_mann_basis(1), DomainError);
}

TEST(GellMann, ExpansionReconstructsTangents) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Index n = 2 + static_cast<Index>(seed % 4);
    auto b = gell_mann_basis(n);
    TangentVector t = random_tangent(seed, n);
    EXPECT_LT(frobenius_distance(b.combine(b.coordinates(t)), t), 1e-12);
  }
}

TEST(RandomDensity, DeterministicFlooredNormalized) {
  auto a = random_density(0, 2, 0.05);
  auto b = random_density(0, 2, 0.05);
  EXPECT_EQ(a.matrix(), b.matrix());
  auto c = random_density(1, 3, 0.01);
  EXPECT_NEAR(c.hermitian().trace(), 1.0, 1e-12);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto d = random_density(seed, 2 + static_cast<Index>(seed % 5), 0.05);
    EXPECT_GE(d.min_eigenvalue(), 0.05);
    EXPECT_NEAR(d.hermitian().trace(), 1.0, 1e-12);
  }
  EXPECT_THROW(random_density(0, 2, 0.5), DomainError);
  EXPECT_THROW(random_density(0, 4, 0.3), DomainError);
}

TEST(RandomTangent, TracelessUnitNormDeterministic) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto t = random_tangent(seed, 2 + static_cast<Index>(seed % 5));
    EXPECT_LT(std::abs(t.hermitian().trace()), 1e-14);
    EXPECT_NEAR(t.hermitian().frobenius_norm(), 1.0, 1e-12);
  }
  EXPECT_EQ(random_tangent(7, 3).matrix(), random_tangent(7, 3).matrix());
}

TEST(DensityMatrix, RejectsInvalid) {
  EXPECT_THROW(DensityMatrix(HermitianMatrix::identity(2)), InvariantViolation);
  EXPECT_THROW(DensityMatrix(HermitianMatrix::diagonal(RealVector::Unit(2, 0))), NotPositive);
  RealVector d(2);
  d << 1.2, -0.2;
  EXPECT_THROW(DensityMatrix(HermitianMatrix::diagonal(d)), NotPositive);
  EXPECT_THROW(TangentVector(HermitianMatrix::identity(2)), InvariantViolation);
}

TEST(RandomUnitary, IsUnitary) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto u = random_unitary(seed, 4);
    EXPECT_LT((u.adjoint() * u - ComplexMatrix::Identity(4, 4)).norm(), 1e-12);
  }
}
