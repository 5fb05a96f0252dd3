#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qig/channel.hpp"
#include "qig/divergence.hpp"

using namespace qig;

TEST(Kernel, AlphaKernelValues) {
  auto k = ContrastKernel::alpha(0.0);
  EXPECT_DOUBLE_EQ(k(1.0), 0.0);
  EXPECT_NEAR(k(4.0), 4.0 * (1.0 - 2.0), 1e-14);
  EXPECT_NEAR(k.second_derivative_at_one(), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(k.beta(), 0.5);
  EXPECT_TRUE(k.verified_convex());
  EXPECT_THROW(ContrastKernel::alpha(1.0), DomainError);
  EXPECT_THROW(k(0.0), DomainError);

  auto c = ContrastKernel::custom([](double t) { return t * std::log(t); }, "relative_entropy");
  EXPECT_FALSE(c.verified_convex());
  EXPECT_NEAR(c.second_derivative_at_one(), 1.0, 1e-7);
  EXPECT_THROW(ContrastKernel::custom([](double t) { return t; }), DomainError);
}

TEST(QuasiEntropy, VanishesOnDiagonal) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto d = random_density(s, 2 + Index(s % 4), 0.01);
    for (double a : {-0.6, 0.0, 0.8}) EXPECT_NEAR(quasi_entropy(d, d, ContrastKernel::alpha(a)), 0.0, 1e-13);
  }
  EXPECT_THROW(quasi_entropy(random_density(1, 2, 0.1), random_density(1, 3, 0.1), ContrastKernel::alpha(0.0)),
               DimensionMismatch);
}

TEST(QuasiEntropy, CommutingIsClassicalDivergence) {
  RealVector p(3), q(3);
  p << 0.2, 0.5, 0.3;
  q << 0.6, 0.1, 0.3;
  DensityMatrix d1(HermitianMatrix::diagonal(p)), d2(HermitianMatrix::diagonal(q));
  auto k = ContrastKernel::custom([](double t) { return -std::log(t); }, "neg_log");
  double ref = 0.0;
  for (int j = 0; j < 3; ++j) ref += p(j) * -std::log(q(j) / p(j));
  EXPECT_NEAR(quasi_entropy(d1, d2, k), ref, 1e-14);
  // relative entropy S(D1 || D2) through the kernel -log
  auto r = random_density(3, 3, 0.05), s = random_density(4, 3, 0.05);
  const double umegaki = (r.matrix() * (r.matrix().log() - s.matrix().log())).trace().real();
  EXPECT_NEAR(quasi_entropy(r, s, k), umegaki, 1e-12);
}

TEST(AlphaEntropy, MatchesQuasiEntropy) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Index n = 2 + Index(s % 4);
    auto d1 = random_density(derive_seed(s, 0), n, 0.01), d2 = random_density(derive_seed(s, 1), n, 0.01);
    for (double a : {-0.6, -0.2, 0.0, 0.4, 0.8}) {
      const double direct = alpha_entropy(d1, d2, a);
      EXPECT_NEAR(quasi_entropy(d1, d2, ContrastKernel::alpha(a)), direct, 1e-10) << s << " " << a;
      EXPECT_GT(direct, 0.0);
    }
  }
  EXPECT_THROW(alpha_entropy(random_density(1, 2, 0.1), random_density(2, 2, 0.1), -1.0), DomainError);
}

TEST(AlphaEntropy, HellingerAtAlphaZero) {
  const double p = 0.3, q = 0.8;
  RealVector a(2), b(2);
  a << p, 1 - p;
  b << q, 1 - q;
  const double ref = 4.0 * (1.0 - std::sqrt(p * q) - std::sqrt((1 - p) * (1 - q)));
  EXPECT_NEAR(alpha_entropy(DensityMatrix(HermitianMatrix::diagonal(a)), DensityMatrix(HermitianMatrix::diagonal(b)),
                            0.0),
              ref, 1e-14);
}

TEST(AlphaEntropy, ContrastPositivity) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    auto d1 = random_density(derive_seed(s, 0), 3, 0.01);
    // every fourth pair is a near-copy
    auto d2 = s % 4 == 0 ? d1 : random_density(derive_seed(s, 1), 3, 0.01);
    const double v = quasi_entropy(d1, d2, ContrastKernel::alpha(0.4));
    EXPECT_GE(v, -1e-14);
    if (v < 1e-12) {
      EXPECT_LT(frobenius_distance(d1, d2), 1e-6);
    }
  }
}

TEST(HessianRecovery, MatchesBetaMetric) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Index n = 2 + Index(s % 3);
    auto d = random_density(derive_seed(s, 0), n, 0.05);
    HermitianMatrix a = random_tangent(derive_seed(s, 1), n), b = random_tangent(derive_seed(s, 2), n);
    for (double alpha : {-0.6, 0.0, 0.4}) {
      MetricContext ctx(d, MonotoneFunction::beta(0.5 * (1.0 - alpha)));
      const double ref = fisher_info(ctx, a, b);
      auto r = hessian_recovery(d, a, b, alpha, 1e-4);
      EXPECT_NEAR(r.value, ref, 1e-5 * std::max(1.0, std::abs(ref))) << s << " " << alpha;
      // K is symmetric; the plain stencil is only symmetric up to its O(h^2) error
      EXPECT_NEAR(r.value, hessian_recovery(d, b, a, alpha).value, 1e-5 * std::max(1.0, std::abs(ref)));
      EXPECT_NEAR(hessian_recovery(d, a, b, alpha, 1e-3, true).value,
                  hessian_recovery(d, b, a, alpha, 1e-3, true).value, 1e-8 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST(HessianRecovery, WignerYanaseDiagonalAndZero) {
  auto d = random_density(5, 3, 0.05);
  HermitianMatrix a = random_tangent(6, 3);
  const double wy = fisher_info(MetricContext(d, MonotoneFunction::beta(0.5)), a);
  EXPECT_NEAR(hessian_recovery(d, a, a, 0.0).value, wy, 1e-5 * wy);
  EXPECT_NEAR(hessian_recovery(d, a, HermitianMatrix::zero(3), 0.0).value, 0.0, 1e-12);
}

TEST(HessianRecovery, SecondOrderConvergence) {
  auto d = random_density(8, 3, 0.05);
  HermitianMatrix a = random_tangent(9, 3), b = random_tangent(10, 3);
  const double ref = fisher_info(MetricContext(d, MonotoneFunction::beta(0.3)), a, b);
  const double e1 = std::abs(hessian_recovery(d, a, b, 0.4, 1e-3).value - ref);
  const double e2 = std::abs(hessian_recovery(d, a, b, 0.4, 5e-4).value - ref);
  const double e3 = std::abs(hessian_recovery(d, a, b, 0.4, 2.5e-4).value - ref);
  EXPECT_GE(e1 / e2, 3.5);
  EXPECT_LE(e1 / e2, 4.5);
  EXPECT_GE(e2 / e3, 3.5);
  EXPECT_LE(e2 / e3, 4.5);
}

TEST(HessianRecovery, ShrinksStepNearBoundary) {
  RealVector p(2);
  p << 1e-3, 1.0 - 1e-3;
  DensityMatrix d(HermitianMatrix::diagonal(p));
  HermitianMatrix a = 0.5 * pauli(3);
  auto r = hessian_recovery(d, a, a, 0.0, 0.01);
  EXPECT_LT(r.step_used, 0.01);
  // h ends up comparable to the small eigenvalue, so only coarse agreement
  EXPECT_NEAR(r.value, fisher_info(MetricContext(d, MonotoneFunction::beta(0.5)), a), 0.25 * r.value);
}

TEST(RuskaiBridge, RecoversBetaFamily) {
  for (double a : {-0.6, -0.2, 0.0, 0.4, 0.8}) {
    auto k = ContrastKernel::alpha(a);
    for (double t : log_grid(1e-4, 1e4, 100))
      EXPECT_NEAR(ruskai_bridge(k, t), f_beta(k.beta(), t), 1e-10 * std::max(1.0, t)) << a << " " << t;
    EXPECT_NEAR(ruskai_bridge(k, 1.0), 1.0, 1e-15);
    for (double t : {1.0 + 1e-7, 1.0 - 3e-6, 1.0 + 2e-5, 1.0 + 1e-3})
      EXPECT_NEAR(ruskai_bridge(k, t), f_beta(k.beta(), t), 1e-10) << a << " " << t;
  }
  EXPECT_NEAR(ruskai_bridge(ContrastKernel::alpha(0.0), 4.0), 9.0 / 4.0, 1e-14);
  // -log t kernel yields Kubo-Mori
  auto km = ContrastKernel::custom([](double t) { return -std::log(t); });
  EXPECT_NEAR(ruskai_bridge(km, 3.0), f_kubo_mori(3.0), 1e-14);
}

TEST(Wyd, IdentityHoldsWithCorrectedConstant) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const Index n = 2 + Index(s % 3);
    auto d = random_density(derive_seed(s, 0), n, 0.02);
    HermitianMatrix b = random_hermitian(derive_seed(s, 1), n);
    for (double beta : {0.1, 0.3, 0.5, 0.8}) {
      auto w = wyd_skew_check(d, b, beta);
      EXPECT_NEAR(w.metric_side, w.commutator_side, 1e-9 * std::max(1.0, w.metric_side));
      EXPECT_NEAR(w.printed_form, -0.5 * w.metric_side, 1e-9 * std::max(1.0, w.metric_side));
      auto v = wyd_skew_check(d, b, 1.0 - beta);
      EXPECT_NEAR(v.metric_side, w.metric_side, 1e-10 * std::max(1.0, w.metric_side));
      EXPECT_NEAR(v.commutator_side, w.commutator_side, 1e-10 * std::max(1.0, w.metric_side));
    }
  }
}

TEST(Wyd, CommutingObservableGivesZero) {
  auto d = random_density(3, 3, 0.05);
  HermitianMatrix b = spectral_apply(d.spectrum(), [](double x) { return x * x; });
  auto w = wyd_skew_check(d, b, 0.3);
  EXPECT_NEAR(w.metric_side, 0.0, 1e-14);
  EXPECT_NEAR(w.commutator_side, 0.0, 1e-14);
  EXPECT_THROW(wyd_skew_check(d, b, 1.0), DomainError);
}

TEST(Wyd, HalfQubitAgainstMatrixSqrt) {
  auto d = random_density(17, 2, 0.05);
  HermitianMatrix b = random_hermitian(18, 2);
  const ComplexMatrix r = d.matrix().sqrt();
  const ComplexMatrix c = r * b.matrix() - b.matrix() * r;
  const double ref = -4.0 * (c * c).trace().real();
  EXPECT_NEAR(wyd_skew_check(d, b, 0.5).metric_side, ref, 1e-10);
}

TEST(DataProcessing, AlphaEntropyDecreasesUnderChannels) {
  double worst = 1e300;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Index in = 2 + Index(s % 3), out = 2 + Index((s / 3) % 2);
    if (out > in) continue;
    auto ch = random_channel(derive_seed(s, 0), in, out, 1 + Index((s / 6) % 3) + (in > out ? 1 : 0));
    auto d1 = random_density(derive_seed(s, 1), in, 0.01), d2 = random_density(derive_seed(s, 2), in, 0.01);
    auto o1 = push_forward(ch, d1), o2 = push_forward(ch, d2);
    for (double a : {-0.6, 0.0, 0.8}) {
      const double up = alpha_entropy(d1, d2, a), down = alpha_entropy(o1.state, o2.state, a);
      worst = std::min(worst, up - down);
    }
  }
  EXPECT_GE(worst, -1e-9);
}
