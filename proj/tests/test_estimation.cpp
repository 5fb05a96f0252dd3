#include <gtest/gtest.h>

#include "qig/estimation.hpp"

using namespace qig;

namespace {

double min_eig(const RealMatrix& m) {
  return Eigen::SelfAdjointEigenSolver<RealMatrix>(0.5 * (m + m.transpose())).eigenvalues()(0);
}

// D_theta = diag softmax(a + theta b): a commuting exponential family.
StatisticalModel softmax_family(const RealVector& a, const RealVector& b) {
  auto map = [a, b](const RealVector& th) {
    RealVector w = (a + th(0) * b).array().exp();
    return DensityMatrix(HermitianMatrix::diagonal(w / w.sum()));
  };
  return StatisticalModel("softmax", 1, map);
}

}  // namespace

TEST(Models, BlochRadial) {
  auto m = bloch_radial_model(0.5);
  EXPECT_NEAR(m.state().matrix()(0, 0).real(), 0.75, 1e-15);
  EXPECT_NEAR(m.state().matrix()(1, 1).real(), 0.25, 1e-15);
  EXPECT_LT(frobenius_distance(m.tangent(0), 0.5 * pauli(3)), 1e-15);
  EXPECT_TRUE(m.analytic_tangents());
  EXPECT_THROW(bloch_radial_model(1.0), DomainError);
}

TEST(Models, FiniteDifferenceTangentsMatchAnalytic) {
  for (auto model : {bloch_radial_model(0.3), bloch_full_model(Eigen::Vector3d(0.1, -0.2, 0.4))}) {
    auto fd = finite_difference_tangents(model.state_map(), model.param_dim(), {1e-4, false});
    for (Index i = 0; i < model.param_dim(); ++i)
      EXPECT_LT(frobenius_distance(fd[static_cast<std::size_t>(i)], model.tangent(i)), 1e-7);
  }
}

TEST(Models, GibbsStateAndRichardson) {
  auto m = gibbs_model(pauli(3), 1.0);
  const double e = std::exp(1.0);
  EXPECT_NEAR(m.state().matrix()(0, 0).real(), 1.0 / e / (e + 1.0 / e), 1e-14);
  EXPECT_NEAR(m.state().matrix()(1, 1).real(), e / (e + 1.0 / e), 1e-14);
  // d/dbeta of e^{-beta H}/Z is -(H - <H>) D
  const ComplexMatrix d = m.state().matrix(), h = pauli(3).matrix();
  const double mean = (d * h).trace().real();
  const ComplexMatrix exact = -(h - mean * ComplexMatrix::Identity(2, 2)) * d;
  EXPECT_LT((m.tangent(0).matrix() - exact).norm(), 1e-9);
  auto mr = gibbs_model(pauli(3), 1.0, {}, {1e-3, true});
  EXPECT_LT((mr.tangent(0).matrix() - exact).norm(), 1e-10);
  EXPECT_FALSE(m.analytic_tangents());
}

TEST(Models, CoefficientModel) {
  CoefficientMap c;
  c.offset = RealVector::Zero(3);
  c.offset(2) = 0.2;
  c.linear = RealMatrix::Zero(3, 1);
  c.linear(0, 0) = 1.0;
  c.terms.push_back({2, 0.5, {2}});
  auto m = coefficient_model(2, 1, c, 1e-6);
  EXPECT_LT(frobenius_distance(m.state(), bloch_state(0.0, 0.0, 0.2)), 1e-15);
  EXPECT_LT(frobenius_distance(m.tangent(0), 0.5 * pauli(1)), 1e-9);
  c.offset = RealVector::Zero(2);
  EXPECT_THROW(coefficient_model(2, 1, c, 1e-6), ConfigError);
}

TEST(LogDerivative, MinIsSld) {
  auto m = bloch_full_model(Eigen::Vector3d(0.2, 0.3, -0.1), {1});
  auto l = log_derivatives(m, MonotoneFunction::min()).front();
  const ComplexMatrix d = m.state().matrix();
  EXPECT_LT((d * l.matrix() + l.matrix() * d - 2.0 * m.tangent(0).matrix()).norm(), 1e-13);
  for (const auto& f : catalog()) EXPECT_LT(log_derivative_residual(m, f), 1e-8) << f.name();
}

TEST(LogDerivative, CommutingFamilyIsClassicalScore) {
  RealVector a(3), b(3);
  a << 0.1, -0.4, 0.7;
  b << 1.0, 0.2, -0.5;
  auto m = softmax_family(a, b);
  const ComplexMatrix dinv = m.state().matrix().inverse();
  for (const auto& f : catalog()) {
    auto l = log_derivatives(m, f).front();
    EXPECT_LT((l.matrix() - dinv * m.tangent(0).matrix()).norm(), 1e-8) << f.name();
  }
}

TEST(FisherMatrix, RadialUniversality) {
  for (double r : {-0.6, 0.0, 0.5, 0.9}) {
    for (const auto& f : catalog()) {
      auto fm = fisher_matrix(bloch_radial_model(r), f);
      EXPECT_NEAR(fm.g(0, 0), 1.0 / (1.0 - r * r), 1e-10 / (1.0 - r * r)) << f.name() << " " << r;
    }
  }
}

TEST(FisherMatrix, MaximallyMixedEquatorial) {
  auto m = bloch_full_model(Eigen::Vector3d::Zero(), {1, 2});
  for (const auto& f : catalog()) {
    auto fm = fisher_matrix(m, f);
    EXPECT_LT((fm.g - RealMatrix::Identity(2, 2)).norm(), 1e-12) << f.name();
    EXPECT_FALSE(fm.rank_deficient);
  }
}

TEST(FisherMatrix, RankDeficiencyReported) {
  auto m = bloch_full_model(Eigen::Vector3d(0.1, 0.0, 0.0), {1, 1});
  auto fm = fisher_matrix(m, MonotoneFunction::min());
  EXPECT_TRUE(fm.rank_deficient);
  EXPECT_THROW(optimal_bank(m, MonotoneFunction::min()), RankDeficient);
}

TEST(ScalarCr, OptimalEstimatorSaturates) {
  for (const auto& f : catalog()) {
    for (std::uint64_t s = 0; s < 20; ++s) {
      auto model = random_affine_model(s, 2 + Index(s % 3), 1);
      auto a = optimal_estimator(model, f);
      auto r = scalar_cr_check(model, a, f);
      EXPECT_NEAR(r.slack, 0.0, 1e-9) << f.name();
      EXPECT_NEAR(r.variance, 1.0 / fisher_matrix(model, f).g(0, 0), 1e-9);
    }
  }
}

TEST(ScalarCr, MinIsProportionalToSld) {
  auto model = bloch_radial_model(0.4);
  auto a = optimal_estimator(model, MonotoneFunction::min());
  auto l = sld(model.state(), model.tangent(0));
  const cplx ratio = a.matrix()(0, 0) / l.matrix()(0, 0);
  EXPECT_LT((a.matrix() - ratio * l.matrix()).norm(), 1e-12);
}

TEST(ScalarCr, PerturbedEstimatorHasPositiveSlack) {
  for (const auto& f : catalog()) {
    auto model = random_affine_model(42, 3, 1);
    auto bank = noisy_bank(model, f, 7, 0.3);
    auto r = scalar_cr_check(model, bank[0], f);
    EXPECT_GT(r.slack, 1e-6) << f.name();
  }
}

TEST(ScalarCr, ClassicalCommutingScore) {
  RealVector a(2), b(2);
  a << 0.3, -0.2;
  b << 1.0, -1.0;
  auto model = softmax_family(a, b);
  const ComplexMatrix score = model.state().matrix().inverse() * model.tangent(0).matrix();
  const double info = (model.tangent(0).matrix() * score).trace().real();
  HermitianMatrix est = HermitianMatrix::hermitize(score / info);
  for (const auto& f : catalog()) EXPECT_NEAR(scalar_cr_check(model, est, f).slack, 0.0, 1e-9);
}

TEST(ScalarCr, RejectsBiasedEstimator) {
  auto model = bloch_radial_model(0.2);
  try {
    scalar_cr_check(model, 0.5 * pauli(3), MonotoneFunction::min());
    FAIL() << "expected CalibrationError";
  } catch (const CalibrationError& e) {
    EXPECT_NEAR(e.defect(), 0.5, 1e-12);
  }
}

TEST(MatrixCr, OptimalBankSaturatesNoisyBankStrict) {
  for (const auto& f : catalog()) {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const Index m = 2 + Index(s % 2);
      auto model = random_affine_model(derive_seed(s, 3), 3, m);
      auto opt = matrix_cr_check(model, optimal_bank(model, f), f);
      EXPECT_LT((opt.cov - opt.bound).norm(), 1e-9) << f.name();
      auto noisy = matrix_cr_check(model, noisy_bank(model, f, s), f);
      EXPECT_GE(noisy.gap_min_eigenvalue, -1e-9);
      EXPECT_GT(noisy.gap_trace, 0.0);
    }
  }
}

TEST(MatrixCr, OneParameterReducesToScalar) {
  auto model = random_affine_model(5, 3, 1);
  auto f = MonotoneFunction::beta(0.3);
  auto bank = noisy_bank(model, f, 9);
  auto mr = matrix_cr_check(model, bank, f);
  auto sr = scalar_cr_check(model, bank[0], f);
  EXPECT_NEAR(mr.gap_min_eigenvalue, sr.slack, 1e-12);
}

TEST(MatrixCr, RejectsUncalibratedBank) {
  auto model = random_affine_model(5, 3, 2);
  auto bank = optimal_bank(model, MonotoneFunction::min());
  EstimatorBank off({bank[0], 2.0 * bank[1]});
  EXPECT_THROW(matrix_cr_check(model, off, MonotoneFunction::min()), CalibrationError);
  EstimatorBank shifted({bank[0] + 0.1 * HermitianMatrix::identity(3), bank[1]});
  EXPECT_THROW(matrix_cr_check(model, shifted, MonotoneFunction::min()), CalibrationError);
}

TEST(BlockMatrix, ShapeIdentityBlocksAndPsd) {
  for (const auto& f : catalog()) {
    auto model = bloch_full_model(Eigen::Vector3d(0.2, -0.1, 0.3), {1, 3});
    auto bank = noisy_bank(model, f, 3);
    auto r = block_matrix_oracle(model, bank, f);
    ASSERT_EQ(r.m.rows(), 4);
    EXPECT_LT(r.off_diagonal_defect, 1e-7);
    EXPECT_TRUE(r.psd) << r.min_eigenvalue;
    EXPECT_TRUE(r.implication_holds);
    // Lower-right block is the Fisher matrix.
    EXPECT_LT((r.m.bottomRightCorner(2, 2) - fisher_matrix(model, f).g).norm(), 1e-10);
  }
}

TEST(BoundOrdering, MinimalMetricGivesSmallestFisherMatrix) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto model = random_affine_model(s, 3, 3);
    for (const auto& f : catalog()) EXPECT_GE(bound_ordering_gap(model, f), -1e-9) << f.name();
  }
  // and so its inverse dominates: G_min^{-1} - G_f^{-1} PSD
  auto model = random_affine_model(77, 3, 2);
  RealMatrix bmin = require_inverse(fisher_matrix(model, MonotoneFunction::min()));
  RealMatrix bkm = require_inverse(fisher_matrix(model, MonotoneFunction::kubo_mori()));
  EXPECT_GE(min_eig(bmin - bkm), -1e-9);
}
