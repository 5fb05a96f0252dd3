#pragma once

// Completely positive trace-preserving maps in Kraus form, and the
// monotonicity probes for Fisher information and generalized variance.

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "qig/error.hpp"
#include "qig/matrix_core.hpp"
#include "qig/metric.hpp"

namespace qig {

inline constexpr double kTracePreservationTol = 1e-10;

/// Kraus representation X -> sum_k K_k X K_k^dag with sum_k K_k^dag K_k = I.
class Channel {
 public:
  explicit Channel(std::vector<ComplexMatrix> kraus) : kraus_(std::move(kraus)) {
    if (kraus_.empty()) throw DimensionMismatch("Channel: empty Kraus list");
    out_ = kraus_.front().rows();
    in_ = kraus_.front().cols();
    ComplexMatrix s = ComplexMatrix::Zero(in_, in_);
    for (const auto& k : kraus_) {
      if (k.rows() != out_ || k.cols() != in_)
        throw DimensionMismatch("Channel: Kraus operators of inconsistent shape");
      s += k.adjoint() * k;
    }
    const double defect = (s - ComplexMatrix::Identity(in_, in_)).norm();
    if (defect > kTracePreservationTol)
      throw InvariantViolation("Channel: not trace preserving (||sum K^dag K - I|| = " + detail::fmt(defect) + ")");
  }

  static Channel identity(Index n) { return Channel({ComplexMatrix::Identity(n, n)}); }

  static Channel unitary(const ComplexMatrix& u) { return Channel({u}); }

  /// Tr_2 on C^d1 (x) C^d2 (keep_first) or Tr_1 (otherwise).
  static Channel partial_trace(Index d1, Index d2, bool keep_first = true) {
    std::vector<ComplexMatrix> ks;
    const Index env = keep_first ? d2 : d1;
    for (Index k = 0; k < env; ++k) {
      ComplexMatrix bra = ComplexMatrix::Zero(1, env);
      bra(0, k) = 1.0;
      if (keep_first)
        ks.push_back(Eigen::kroneckerProduct(ComplexMatrix::Identity(d1, d1), bra).eval());
      else
        ks.push_back(Eigen::kroneckerProduct(bra, ComplexMatrix::Identity(d2, d2)).eval());
    }
    return Channel(std::move(ks));
  }

  /// Qubit depolarizing channel; strength 1 sends every state to I/2.
  static Channel depolarizing(double strength) {
    if (!(strength >= 0.0 && strength <= 1.0)) throw DomainError("depolarizing: strength must lie in [0, 1]");
    std::vector<ComplexMatrix> ks;
    ks.push_back(std::sqrt(1.0 - 0.75 * strength) * ComplexMatrix::Identity(2, 2));
    for (int k = 1; k <= 3; ++k) ks.push_back(std::sqrt(strength / 4.0) * pauli(k).matrix());
    return Channel(std::move(ks));
  }

  Index in_dim() const { return in_; }
  Index out_dim() const { return out_; }
  const std::vector<ComplexMatrix>& kraus() const { return kraus_; }

 private:
  std::vector<ComplexMatrix> kraus_;
  Index in_ = 0, out_ = 0;
};

/// second o first
inline Channel compose(const Channel& second, const Channel& first) {
  if (second.in_dim() != first.out_dim()) throw DimensionMismatch("compose: dimension mismatch");
  std::vector<ComplexMatrix> ks;
  for (const auto& b : second.kraus())
    for (const auto& a : first.kraus()) ks.push_back(b * a);
  return Channel(std::move(ks));
}

inline HermitianMatrix apply(const Channel& ch, const HermitianMatrix& x) {
  if (x.dim() != ch.in_dim()) throw DimensionMismatch("apply: input dimension mismatch");
  ComplexMatrix y = ComplexMatrix::Zero(ch.out_dim(), ch.out_dim());
  for (const auto& k : ch.kraus()) y += k * x.matrix() * k.adjoint();
  return HermitianMatrix::hermitize(y);
}

/// Hilbert-Schmidt adjoint: Y -> sum_k K_k^dag Y K_k (unital).
inline HermitianMatrix adjoint_apply(const Channel& ch, const HermitianMatrix& y) {
  if (y.dim() != ch.out_dim()) throw DimensionMismatch("adjoint_apply: input dimension mismatch");
  ComplexMatrix x = ComplexMatrix::Zero(ch.in_dim(), ch.in_dim());
  for (const auto& k : ch.kraus()) x += k.adjoint() * y.matrix() * k;
  return HermitianMatrix::hermitize(x);
}

/// Kraus operators cut from a seeded Haar isometry V: C^in -> C^out (x) C^env.
inline Channel random_channel(std::uint64_t seed, Index in_dim, Index out_dim, Index env_dim) {
  if (in_dim < 1 || out_dim < 1 || env_dim < 1) throw DomainError("random_channel: dimensions must be >= 1");
  if (out_dim * env_dim < in_dim) throw DomainError("random_channel: out_dim * env_dim must be >= in_dim");
  Rng rng(seed);
  ComplexMatrix v = random_unitary(rng, out_dim * env_dim, in_dim);
  std::vector<ComplexMatrix> ks;
  for (Index e = 0; e < env_dim; ++e) ks.push_back(v.block(e * out_dim, 0, out_dim, in_dim));
  return Channel(std::move(ks));
}

inline constexpr double kProbeMixing = 1e-9;

// When alpha(D) is too close to the boundary the probes run on the channel
// alpha' = (1 - eps) alpha + eps Tr(.) I/n instead. alpha' is itself CPTP, so
// the inequalities stay exact statements about a nearby coarse graining.
struct PushedState {
  DensityMatrix state;
  double mixing;  // eps, zero unless floored
  bool floored() const { return mixing > 0.0; }
};

inline HermitianMatrix apply_mixed(const Channel& ch, const HermitianMatrix& x, double eps) {
  HermitianMatrix y = apply(ch, x);
  if (eps == 0.0) return y;
  const Index n = y.dim();
  return (1.0 - eps) * y + (eps * x.trace() / double(n)) * HermitianMatrix::identity(n);
}

inline HermitianMatrix adjoint_apply_mixed(const Channel& ch, const HermitianMatrix& y, double eps) {
  HermitianMatrix x = adjoint_apply(ch, y);
  if (eps == 0.0) return x;
  return (1.0 - eps) * x + (eps * y.trace() / double(y.dim())) * HermitianMatrix::identity(x.dim());
}

inline PushedState push_forward(const Channel& ch, const DensityMatrix& d) {
  HermitianMatrix out = apply(ch, d.hermitian());
  // sum K^dag K = I only to 1e-10; renormalize the roundoff away
  out = (1.0 / out.trace()) * out;
  if (spectral_decompose(out).values(0) >= d.pd_floor()) return {DensityMatrix(out, d.pd_floor()), 0.0};
  const Index n = out.dim();
  HermitianMatrix mixed = (1.0 - kProbeMixing) * out + (kProbeMixing / double(n)) * HermitianMatrix::identity(n);
  return {DensityMatrix(mixed, std::min(d.pd_floor(), 0.5 * kProbeMixing / double(n))), kProbeMixing};
}

struct FisherMonotonicityProbe {
  double upstream;    // F_D(A)
  double downstream;  // F_{alpha(D)}(alpha(A))
  double margin;      // upstream - downstream, expected >= -1e-9
  bool floored;
};

inline FisherMonotonicityProbe probe_fisher_monotonicity(const DensityMatrix& d, const HermitianMatrix& a,
                                                         const MonotoneFunction& f, const Channel& ch) {
  auto pushed = push_forward(ch, d);
  const double up = fisher_info(MetricContext(d, f), a);
  const double down = fisher_info(MetricContext(pushed.state, f), apply_mixed(ch, a, pushed.mixing));
  return {up, down, up - down, pushed.floored()};
}

struct VarianceMonotonicityProbe {
  double lhs;     // phi_D[alpha*(A), alpha*(A)]
  double rhs;     // phi_{alpha(D)}[A, A]
  double margin;  // rhs - lhs, expected >= -1e-9
  bool floored;
};

/// A lives on the output system of ch.
inline VarianceMonotonicityProbe probe_variance_monotonicity(const DensityMatrix& d, const HermitianMatrix& a,
                                                             const MonotoneFunction& f, const Channel& ch) {
  auto pushed = push_forward(ch, d);
  const double lhs = variance(MetricContext(d, f), adjoint_apply_mixed(ch, a, pushed.mixing));
  const double rhs = variance(MetricContext(pushed.state, f), a);
  return {lhs, rhs, rhs - lhs, pushed.floored()};
}

// ---------------------------------------------------------------------------
// Superoperator form of monotonicity, as quadratic forms on the real space of
// Hermitian matrices (orthonormal Hilbert-Schmidt basis {I/sqrt(n), sqrt(2) E_k}).

namespace detail {

inline std::vector<HermitianMatrix> hs_orthonormal_basis(Index n) {
  std::vector<HermitianMatrix> out;
  out.push_back((1.0 / std::sqrt(double(n))) * HermitianMatrix::identity(n));
  const TracelessBasis gm = gell_mann_basis(n);
  for (const auto& e : gm.elements()) out.push_back(std::sqrt(2.0) * e.hermitian());
  return out;
}

template <class Form>
RealMatrix gram_of(const std::vector<HermitianMatrix>& basis, Form&& form) {
  const Index m = static_cast<Index>(basis.size());
  RealMatrix g(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j <= i; ++j) g(i, j) = g(j, i) = form(basis[static_cast<std::size_t>(i)],
                                                            basis[static_cast<std::size_t>(j)]);
  return g;
}

}  // namespace detail

struct SuperoperatorGap {
  double fisher_min_eigenvalue;    // of J_D^{-1} - alpha* J_{alpha(D)}^{-1} alpha
  double variance_min_eigenvalue;  // of J_{alpha(D)} - alpha J_D alpha*
};

/// Smallest eigenvalues of the two operator-inequality gaps, materialized as
/// n^2 x n^2 (input side) and k^2 x k^2 (output side) symmetric matrices.
inline SuperoperatorGap superoperator_gap(const DensityMatrix& d, const MonotoneFunction& f, const Channel& ch) {
  if (ch.in_dim() != d.dim()) throw DimensionMismatch("superoperator_gap: channel input dimension");
  if (d.dim() > 3 || ch.out_dim() > 3) throw DomainError("superoperator_gap: dimensions limited to 3");
  MetricContext up(d, f);
  auto pushed = push_forward(ch, d);
  MetricContext down(pushed.state, f);
  const double eps = pushed.mixing;

  auto in_basis = detail::hs_orthonormal_basis(d.dim());
  RealMatrix gf = detail::gram_of(in_basis, [&](const HermitianMatrix& x, const HermitianMatrix& y) {
    return fisher_info(up, x, y) - fisher_info(down, apply_mixed(ch, x, eps), apply_mixed(ch, y, eps));
  });
  auto out_basis = detail::hs_orthonormal_basis(ch.out_dim());
  RealMatrix gv = detail::gram_of(out_basis, [&](const HermitianMatrix& x, const HermitianMatrix& y) {
    return variance(down, x, y) - variance(up, adjoint_apply_mixed(ch, x, eps), adjoint_apply_mixed(ch, y, eps));
  });
  Eigen::SelfAdjointEigenSolver<RealMatrix> ef(gf, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<RealMatrix> ev(gv, Eigen::EigenvaluesOnly);
  return {ef.eigenvalues()(0), ev.eigenvalues()(0)};
}

}  // namespace qig
