#pragma once

// Quasi-entropies S_F(D1, D2) = Tr D1^{1/2} F(Delta) D1^{1/2} with the
// relative modular operator Delta = L_{D2} R_{D1}^{-1}, the alpha-entropies,
// recovery of the beta-family metrics as mixed second derivatives, the
// kernel-to-f bridge 1/f(t) = (F(t) + t F(1/t)) / (t - 1)^2, and the
// Wigner-Yanase-Dyson commutator identity.

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include <unsupported/Eigen/MatrixFunctions>

#include "qig/error.hpp"
#include "qig/matrix_core.hpp"
#include "qig/metric.hpp"
#include "qig/monotone.hpp"

namespace qig {

class ContrastKernel {
 public:
  enum class Family { alpha, custom };

  /// F(t) = 4/(1 - alpha^2) (1 - t^{(1+alpha)/2}).
  static ContrastKernel alpha(double a) {
    if (!(a > -1.0 && a < 1.0)) throw DomainError("alpha kernel: alpha must lie in (-1, 1)");
    const double c = 4.0 / (1.0 - a * a), p = 0.5 * (1.0 + a);
    ContrastKernel k;
    k.family_ = Family::alpha;
    k.alpha_ = a;
    k.f_ = [c, p](double t) { return -c * std::expm1(p * std::log(t)); };
    k.f_log_ = [c, p](double u) { return -c * std::expm1(p * u); };
    k.f2_at_one_ = c * p * (1.0 - p);  // = 1
    k.name_ = "alpha:" + detail::fmt(a);
    return k;
  }

  /// Any F with F(1) = 0. Operator convexity is not checked; F''(1) comes
  /// from a central difference.
  static ContrastKernel custom(std::function<double(double)> f, std::string name = "custom") {
    if (std::abs(f(1.0)) > 1e-12) throw DomainError("custom kernel: F(1) must vanish");
    ContrastKernel k;
    k.family_ = Family::custom;
    const double h = 1e-4;
    k.f2_at_one_ = (f(1.0 + h) - 2.0 * f(1.0) + f(1.0 - h)) / (h * h);
    k.f_ = std::move(f);
    k.name_ = std::move(name);
    return k;
  }

  double operator()(double t) const {
    if (!(t > 0.0)) throw DomainError("ContrastKernel: t must be positive");
    return f_(t);
  }
  /// F(e^u); exact in u for alpha kernels, so F(t) and F(1/t) see the same rounding.
  double at_log(double u) const { return f_log_ ? f_log_(u) : f_(std::exp(u)); }
  Family family() const { return family_; }
  double alpha_parameter() const { return alpha_; }
  double second_derivative_at_one() const { return f2_at_one_; }
  bool verified_convex() const { return family_ == Family::alpha; }
  const std::string& name() const { return name_; }

  /// The beta of the monotone metric this kernel generates, (1 - alpha)/2.
  double beta() const {
    if (family_ != Family::alpha) throw DomainError("ContrastKernel::beta: alpha kernels only");
    return 0.5 * (1.0 - alpha_);
  }

 private:
  ContrastKernel() = default;
  Family family_ = Family::custom;
  double alpha_ = 0.0;
  double f2_at_one_ = 0.0;
  std::function<double(double)> f_;
  std::function<double(double)> f_log_;
  std::string name_;
};

inline void require_same_dim(const DensityMatrix& a, const DensityMatrix& b, const char* who) {
  if (a.dim() != b.dim()) throw DimensionMismatch(std::string(who) + ": dimension mismatch");
}

/// sum_ij F(mu_i / lambda_j) lambda_j |<u_i|v_j>|^2 with (lambda, v) from D1
/// and (mu, u) from D2: Delta's spectral action without forming it.
inline double quasi_entropy(const DensityMatrix& d1, const DensityMatrix& d2, const ContrastKernel& k) {
  require_same_dim(d1, d2, "quasi_entropy");
  const RealVector& lam = d1.eigenvalues();
  const RealVector& mu = d2.eigenvalues();
  const RealMatrix overlap = (d2.eigenvectors().adjoint() * d1.eigenvectors()).cwiseAbs2();
  double s = 0.0;
  for (Index j = 0; j < lam.size(); ++j)
    for (Index i = 0; i < mu.size(); ++i) s += k(mu(i) / lam(j)) * lam(j) * overlap(i, j);
  return s;
}

inline constexpr double kRealnessTol = 1e-10;

/// 4/(1 - alpha^2) Tr (I - D2^p D1^{-p}) D1 with p = (1 + alpha)/2, evaluated
/// as written. The operator inside the trace is not Hermitian; its trace is
/// real and the imaginary part is checked.
inline double alpha_entropy(const DensityMatrix& d1, const DensityMatrix& d2, double a) {
  require_same_dim(d1, d2, "alpha_entropy");
  if (!(a > -1.0 && a < 1.0)) throw DomainError("alpha_entropy: alpha must lie in (-1, 1)");
  const double p = 0.5 * (1.0 + a);
  const Index n = d1.dim();
  const ComplexMatrix d2p = d2.matrix().pow(p);
  const ComplexMatrix d1mp = d1.matrix().pow(-p);
  const ComplexMatrix x = (ComplexMatrix::Identity(n, n) - d2p * d1mp) * d1.matrix();
  const cplx tr = x.trace();
  if (std::abs(tr.imag()) > kRealnessTol * std::max(1.0, std::abs(tr.real())))
    throw InvariantViolation("alpha_entropy: trace has imaginary part " + detail::fmt(tr.imag()));
  return 4.0 / (1.0 - a * a) * tr.real();
}

struct HessianRecovery {
  double value;      // minus the mixed central difference of S_alpha
  double step_used;  // h after any shrinking
};

namespace detail {

inline double mixed_difference(const DensityMatrix& d, const HermitianMatrix& a, const HermitianMatrix& b,
                               const ContrastKernel& k, double h) {
  auto at = [&](double st, double su) {
    DensityMatrix d1(d.hermitian() + (st * h) * a, 0.0);
    DensityMatrix d2(d.hermitian() + (su * h) * b, 0.0);
    if (d1.min_eigenvalue() <= 0.0 || d2.min_eigenvalue() <= 0.0) throw NotPositive("stencil");
    return quasi_entropy(d1, d2, k);
  };
  return (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
}

}  // namespace detail

/// K(A, B) = -d^2/dt du S_alpha(D + tA, D + uB) at t = u = 0 by the 4-point
/// central stencil. The mixed partial itself is negative definite, so the
/// metric is its negative; it equals fisher_info under f_beta, beta = (1-alpha)/2.
/// With extrapolate, the stencils at h and h/2 are combined as (4 K(h/2) - K(h)) / 3.
inline HessianRecovery hessian_recovery(const DensityMatrix& d, const HermitianMatrix& a, const HermitianMatrix& b,
                                        double alpha, double h = 1e-4, bool extrapolate = false) {
  if (a.dim() != d.dim() || b.dim() != d.dim()) throw DimensionMismatch("hessian_recovery: dimension mismatch");
  if (std::abs(a.trace()) > 1e-10 || std::abs(b.trace()) > 1e-10)
    throw InvariantViolation("hessian_recovery: A and B must be traceless");
  const auto k = ContrastKernel::alpha(alpha);
  for (int shrink = 0; shrink < 20; ++shrink, h *= 0.5) {
    try {
      double mixed = detail::mixed_difference(d, a, b, k, h);
      if (extrapolate) mixed = (4.0 * detail::mixed_difference(d, a, b, k, 0.5 * h) - mixed) / 3.0;
      return {-mixed, h};
    } catch (const NotPositive&) {
    }
  }
  throw NotPositive("hessian_recovery: stencil leaves the positive cone at every step tried");
}

/// f(t) = (t - 1)^2 / (F(t) + t F(1/t)). Within |log t| < 1e-5 the quotient
/// cancels badly, and f(t) = f(1) t^{1/2} (1 + O(log^2 t)) with f(1) = 1/F''(1) is used.
inline double ruskai_bridge(const ContrastKernel& k, double t) {
  if (!(t > 0.0)) throw DomainError("ruskai_bridge: t must be positive");
  const double u = std::log(t);
  if (std::abs(u) < 1e-5) return std::exp(0.5 * u) / k.second_derivative_at_one();
  const double g = k.at_log(u) + t * k.at_log(-u);
  const double tm1 = std::expm1(u);
  return tm1 * tm1 / g;
}

struct WydCheck {
  double metric_side;      // F^beta_D(i[D, B])
  double commutator_side;  // -Tr([D^beta, B][D^{1-beta}, B]) / (beta (1 - beta))
  double printed_form;     // Tr([D^beta, B][D^{1-beta}, B]) / (2 beta (1 - beta)) = -metric_side / 2
};

/// Skew-information identity at the tangent A = i[D, B].
inline WydCheck wyd_skew_check(const DensityMatrix& d, const HermitianMatrix& b, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("wyd_skew_check: beta must lie in (0, 1)");
  if (b.dim() != d.dim()) throw DimensionMismatch("wyd_skew_check: dimension mismatch");
  const cplx i(0.0, 1.0);
  const ComplexMatrix& dm = d.matrix();
  const HermitianMatrix a = HermitianMatrix::hermitize(i * (dm * b.matrix() - b.matrix() * dm));
  WydCheck w{};
  w.metric_side = fisher_info(MetricContext(d, MonotoneFunction::beta(beta)), a);

  const ComplexMatrix db = spectral_apply(d.spectrum(), [&](double x) { return std::pow(x, beta); }).matrix();
  const ComplexMatrix d1b = spectral_apply(d.spectrum(), [&](double x) { return std::pow(x, 1.0 - beta); }).matrix();
  const ComplexMatrix c1 = db * b.matrix() - b.matrix() * db;
  const ComplexMatrix c2 = d1b * b.matrix() - b.matrix() * d1b;
  const double tr = trace_product(c1, c2).real();
  const double bb = beta * (1.0 - beta);
  w.commutator_side = -tr / bb;
  w.printed_form = tr / (2.0 * bb);
  return w;
}

}  // namespace qig
