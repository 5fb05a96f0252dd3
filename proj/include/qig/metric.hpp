#pragma once

// The superoperator J_D in spectral form, the monotone metrics
// gamma_D(A, B) = Tr A J_D^{-1}(B) and the generalized variances
// phi_D[A, B] = Tr A J_D(B), plus the integral-representation oracles.

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "qig/error.hpp"
#include "qig/matrix_core.hpp"
#include "qig/monotone.hpp"
#include "qig/quadrature.hpp"

namespace qig {

/// Footpoint D, function f and the table m(lambda_i, lambda_j) over D's spectrum.
class MetricContext {
 public:
  MetricContext(DensityMatrix d, MonotoneFunction f) : d_(std::move(d)), f_(f) {
    const RealVector& lam = d_.eigenvalues();
    const Index n = lam.size();
    table_.resize(n, n);
    for (Index i = 0; i < n; ++i) {
      table_(i, i) = lam(i);
      for (Index j = 0; j < i; ++j) table_(i, j) = table_(j, i) = f_.mean(lam(i), lam(j));
    }
    if (!(table_.minCoeff() > 0.0)) throw NotPositive("MetricContext: non-positive mean multiplier");
  }

  const DensityMatrix& state() const { return d_; }
  const MonotoneFunction& function() const { return f_; }
  const RealMatrix& multipliers() const { return table_; }
  Index dim() const { return d_.dim(); }

  ComplexMatrix to_eigenbasis(const HermitianMatrix& a) const {
    check_dim(a);
    const ComplexMatrix& u = d_.eigenvectors();
    return u.adjoint() * a.matrix() * u;
  }
  HermitianMatrix from_eigenbasis(const ComplexMatrix& a) const {
    const ComplexMatrix& u = d_.eigenvectors();
    return HermitianMatrix::hermitize(u * a * u.adjoint());
  }
  void check_dim(const HermitianMatrix& a) const {
    if (a.dim() != dim()) throw DimensionMismatch("MetricContext: operand dimension mismatch");
  }

 private:
  DensityMatrix d_;
  MonotoneFunction f_;
  RealMatrix table_;
};

/// J_D(A): entrywise m(lambda_i, lambda_j) A'_ij in D's eigenbasis.
inline HermitianMatrix apply_J(const MetricContext& ctx, const HermitianMatrix& a) {
  ComplexMatrix x = ctx.to_eigenbasis(a);
  x.array() *= ctx.multipliers().array().cast<cplx>();
  return ctx.from_eigenbasis(x);
}

inline HermitianMatrix apply_J_inv(const MetricContext& ctx, const HermitianMatrix& a) {
  ComplexMatrix x = ctx.to_eigenbasis(a);
  x.array() /= ctx.multipliers().array().cast<cplx>();
  return ctx.from_eigenbasis(x);
}

namespace detail {

// Re sum_ij conj(A'_ij) B'_ij w_ij, which is Tr A X for X' = w o B'.
inline double weighted_pairing(const ComplexMatrix& a, const ComplexMatrix& b, const RealMatrix& w) {
  return (a.conjugate().array() * b.array() * w.array().cast<cplx>()).sum().real();
}

}  // namespace detail

/// gamma_D(A, B) = Tr A J_D^{-1}(B).
inline double fisher_info(const MetricContext& ctx, const HermitianMatrix& a, const HermitianMatrix& b) {
  return detail::weighted_pairing(ctx.to_eigenbasis(a), ctx.to_eigenbasis(b),
                                  ctx.multipliers().cwiseInverse());
}

/// F_D(A) = gamma_D(A, A).
inline double fisher_info(const MetricContext& ctx, const HermitianMatrix& a) {
  const ComplexMatrix x = ctx.to_eigenbasis(a);
  return (x.cwiseAbs2().array() / ctx.multipliers().array()).sum();
}

/// phi_D[A, B] = Tr A J_D(B).
inline double variance(const MetricContext& ctx, const HermitianMatrix& a, const HermitianMatrix& b) {
  return detail::weighted_pairing(ctx.to_eigenbasis(a), ctx.to_eigenbasis(b), ctx.multipliers());
}

inline double variance(const MetricContext& ctx, const HermitianMatrix& a) {
  const ComplexMatrix x = ctx.to_eigenbasis(a);
  return (x.cwiseAbs2().array() * ctx.multipliers().array()).sum();
}

/// Symmetric logarithmic derivative: the L with DL + LD = 2A.
inline HermitianMatrix sld(const DensityMatrix& d, const HermitianMatrix& a) {
  return apply_J_inv(MetricContext(d, MonotoneFunction::min()), a);
}

// ---------------------------------------------------------------------------
// Integral representations, evaluated by quadrature with plain matrix
// arithmetic (resolvents by LU, powers and exponentials by Eigen's
// Schur/Pade matrix functions). They never touch the eigensolver path above.

/// int_0^inf (D+t)^{-1} A (D+t)^{-1} dt: J_D^{-1}(A) for Kubo-Mori.
inline QuadratureResult<ComplexMatrix> km_inverse_integral(const DensityMatrix& d, const HermitianMatrix& a,
                                                           const QuadratureOptions& opt = {}) {
  const Index n = d.dim();
  const ComplexMatrix& dm = d.matrix();
  auto integrand = [&](double t) -> ComplexMatrix {
    ComplexMatrix r = (dm + t * ComplexMatrix::Identity(n, n)).partialPivLu().inverse();
    return r * a.matrix() * r;
  };
  return integrate_half_line(integrand, opt);
}

/// int_0^inf Tr A (D+t)^{-1} B (D+t)^{-1} dt: the Kubo-Mori metric.
inline QuadratureResult<double> km_metric_integral(const DensityMatrix& d, const HermitianMatrix& a,
                                                   const HermitianMatrix& b, const QuadratureOptions& opt = {}) {
  const Index n = d.dim();
  const ComplexMatrix& dm = d.matrix();
  auto integrand = [&](double t) -> double {
    ComplexMatrix r = (dm + t * ComplexMatrix::Identity(n, n)).partialPivLu().inverse();
    return trace_product(a.matrix(), ComplexMatrix(r * b.matrix() * r)).real();
  };
  return integrate_half_line(integrand, opt);
}

/// int_0^1 Tr A D^t B D^{1-t} dt: the Kubo-Mori generalized variance.
inline QuadratureResult<double> km_variance_integral(const DensityMatrix& d, const HermitianMatrix& a,
                                                     const HermitianMatrix& b, const QuadratureOptions& opt = {}) {
  const ComplexMatrix logd = d.matrix().log();
  auto integrand = [&](double t) -> double {
    ComplexMatrix dt = (t * logd).exp();
    ComplexMatrix d1t = ((1.0 - t) * logd).exp();
    return trace_product(a.matrix(), ComplexMatrix(dt * b.matrix() * d1t)).real();
  };
  return integrate(integrand, 0.0, 1.0, opt);
}

/// int_0^1 D^t A D^{1-t} dt: J_D(A) for Kubo-Mori.
inline QuadratureResult<ComplexMatrix> km_J_integral(const DensityMatrix& d, const HermitianMatrix& a,
                                                     const QuadratureOptions& opt = {}) {
  const ComplexMatrix logd = d.matrix().log();
  auto integrand = [&](double t) -> ComplexMatrix {
    return ComplexMatrix((t * logd).exp() * a.matrix() * ((1.0 - t) * logd).exp());
  };
  return integrate(integrand, 0.0, 1.0, opt);
}

/// 2 int_0^inf e^{-tD} A e^{-tD} dt: the symmetric logarithmic derivative.
inline QuadratureResult<ComplexMatrix> sld_exponential_integral(const DensityMatrix& d, const HermitianMatrix& a,
                                                                const QuadratureOptions& opt = {}) {
  const ComplexMatrix& dm = d.matrix();
  auto integrand = [&](double t) -> ComplexMatrix {
    ComplexMatrix e = (-t * dm).exp();
    return 2.0 * e * a.matrix() * e;
  };
  return integrate_half_line(integrand, opt);
}

enum class KmIntegralKind { metric, variance, sld_exp };

/// Scalar oracle dispatcher: metric and variance give Tr-pairings of A and B;
/// sld_exp gives Tr B L with L the exponential-integral SLD of A.
inline QuadratureResult<double> km_integral_oracle(const DensityMatrix& d, const HermitianMatrix& a,
                                                   const HermitianMatrix& b, KmIntegralKind kind,
                                                   const QuadratureOptions& opt = {}) {
  switch (kind) {
    case KmIntegralKind::metric: return km_metric_integral(d, a, b, opt);
    case KmIntegralKind::variance: return km_variance_integral(d, a, b, opt);
    case KmIntegralKind::sld_exp: {
      auto l = sld_exponential_integral(d, a, opt);
      return {trace_product(b.matrix(), l.value).real(), l.error_estimate * b.frobenius_norm(),
              l.converged, l.evaluations};
    }
  }
  throw DomainError("km_integral_oracle: unknown kind");
}

// ---------------------------------------------------------------------------
// Qubit radial / tangential decomposition at D = (I + r sigma_3) / 2.

struct BlochSplit {
  double radial;             // 1 / (1 - r^2)
  double tangential;         // (1 / (1 + r)) / f((1 - r) / (1 + r))
  double direct_radial;      // F_D(sigma_3 / 2)
  double direct_tangential;  // F_D(sigma_1 / 2)
};

inline DensityMatrix bloch_state(double x1, double x2, double x3) {
  return DensityMatrix(
      0.5 * (pauli(0) + x1 * pauli(1) + x2 * pauli(2) + x3 * pauli(3)));
}

inline BlochSplit bloch_split(const MonotoneFunction& f, double r) {
  if (!(r > 0.0 && r < 1.0)) throw DomainError("bloch_split: r must lie in (0, 1)");
  BlochSplit s{};
  s.radial = 1.0 / (1.0 - r * r);
  s.tangential = 1.0 / ((1.0 + r) * f((1.0 - r) / (1.0 + r)));
  MetricContext ctx(bloch_state(0.0, 0.0, r), f);
  s.direct_radial = fisher_info(ctx, 0.5 * pauli(3));
  s.direct_tangential = fisher_info(ctx, 0.5 * pauli(1));
  return s;
}

struct RadialLimitReport {
  std::vector<std::pair<double, double>> samples;  // (r, tangential)
  bool converges = false;
  double f_at_zero = 0.0;
  double predicted_limit = std::numeric_limits<double>::infinity();  // 1 / (2 f(0))
  double last_value = 0.0;
};

/// Tangential component at r = 1 - 10^-k, k = 1..8. Convergent sequences
/// show shrinking increments; divergent ones (f(0) = 0) do not.
inline RadialLimitReport radial_limit_probe(const MonotoneFunction& f) {
  RadialLimitReport rep;
  for (int k = 1; k <= 8; ++k) {
    const double r = 1.0 - std::pow(10.0, -k);
    rep.samples.emplace_back(r, 1.0 / ((1.0 + r) * f((1.0 - r) / (1.0 + r))));
  }
  rep.f_at_zero = f.at_zero();
  if (rep.f_at_zero > 0.0) rep.predicted_limit = 0.5 / rep.f_at_zero;
  const auto& s = rep.samples;
  const std::size_t m = s.size();
  const double d_last = std::abs(s[m - 1].second - s[m - 2].second);
  const double d_prev = std::abs(s[m - 2].second - s[m - 3].second);
  rep.last_value = s[m - 1].second;
  rep.converges = d_last <= 1e-12 * std::max(1.0, std::abs(rep.last_value)) || d_last < 0.5 * d_prev;
  return rep;
}

}  // namespace qig
