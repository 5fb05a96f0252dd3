#pragma once

// Hermitian linear algebra substrate: validated matrix types, spectral
// decomposition, traceless Hermitian bases and seeded random generators.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qig/error.hpp"

namespace qig {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kDefaultPdFloor = 1e-10;

namespace detail {

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace detail

/// Complex square matrix equal to its conjugate transpose.
///
/// The public constructor validates the invariant and throws
/// InvariantViolation otherwise; inputs are never repaired.
/// `hermitize` is for results that are Hermitian by construction and only
/// need roundoff removed.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(ComplexMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0)
      throw DimensionMismatch("HermitianMatrix: expected a non-empty square matrix");
    if (!m_.allFinite()) throw InvariantViolation("HermitianMatrix: non-finite entry");
    const double scale = std::max(1.0, detail::max_abs(m_));
    const double asym = detail::max_abs(m_ - m_.adjoint());
    if (asym > kHermitianTol * scale)
      throw InvariantViolation("HermitianMatrix: not Hermitian (max |H - H^dag| = " +
                               detail::fmt(asym) + ")");
  }

  static HermitianMatrix hermitize(const ComplexMatrix& m) {
    HermitianMatrix h;
    h.m_ = 0.5 * (m + m.adjoint());
    return h;
  }
  static HermitianMatrix identity(Index n) { return HermitianMatrix(ComplexMatrix::Identity(n, n)); }
  static HermitianMatrix zero(Index n) { return HermitianMatrix(ComplexMatrix::Zero(n, n)); }
  static HermitianMatrix diagonal(const RealVector& d) {
    return HermitianMatrix(d.cast<cplx>().asDiagonal().toDenseMatrix());
  }

  Index dim() const { return m_.rows(); }
  const ComplexMatrix& matrix() const { return m_; }
  cplx operator()(Index i, Index j) const { return m_(i, j); }

  double trace() const { return m_.trace().real(); }
  double frobenius_norm() const { return m_.norm(); }

  friend HermitianMatrix operator+(const HermitianMatrix& a, const HermitianMatrix& b) {
    check_same(a, b);
    return hermitize(a.m_ + b.m_);
  }
  friend HermitianMatrix operator-(const HermitianMatrix& a, const HermitianMatrix& b) {
    check_same(a, b);
    return hermitize(a.m_ - b.m_);
  }
  friend HermitianMatrix operator*(double s, const HermitianMatrix& a) { return hermitize(s * a.m_); }
  friend HermitianMatrix operator*(const HermitianMatrix& a, double s) { return s * a; }

 private:
  HermitianMatrix() = default;
  static void check_same(const HermitianMatrix& a, const HermitianMatrix& b) {
    if (a.dim() != b.dim()) throw DimensionMismatch("HermitianMatrix: dimension mismatch");
  }

  ComplexMatrix m_;
};

/// Eigenvalues ascending, eigenvectors as the columns of a unitary.
struct Spectrum {
  RealVector values;
  ComplexMatrix vectors;
};

inline Spectrum spectral_decompose(const HermitianMatrix& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h.matrix());
  if (es.info() != Eigen::Success) throw Error("spectral_decompose: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

/// U diag(fn(lambda)) U^dag.
template <class Fn>
HermitianMatrix spectral_apply(const Spectrum& s, Fn&& fn) {
  RealVector mapped = s.values.unaryExpr([&](double x) { return fn(x); });
  return HermitianMatrix::hermitize(s.vectors * mapped.cast<cplx>().asDiagonal() *
                                    s.vectors.adjoint());
}

/// Tr(A B) for square complex matrices.
inline cplx trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a.transpose().cwiseProduct(b)).sum();
}

inline double trace_product(const HermitianMatrix& a, const HermitianMatrix& b) {
  return trace_product(a.matrix(), b.matrix()).real();
}

inline double frobenius_distance(const HermitianMatrix& a, const HermitianMatrix& b) {
  return (a.matrix() - b.matrix()).norm();
}

/// Strictly positive Hermitian matrix of unit trace, with its spectrum cached.
class DensityMatrix {
 public:
  explicit DensityMatrix(HermitianMatrix h, double pd_floor = kDefaultPdFloor)
      : h_(std::move(h)), floor_(pd_floor) {
    if (std::abs(h_.trace() - 1.0) > kTraceTol)
      throw InvariantViolation("DensityMatrix: trace " + detail::fmt(h_.trace()) + " != 1");
    spectrum_ = spectral_decompose(h_);
    if (spectrum_.values(0) < floor_)
      throw NotPositive("DensityMatrix: smallest eigenvalue " + detail::fmt(spectrum_.values(0)) +
                        " below floor " + detail::fmt(floor_));
  }

  static DensityMatrix maximally_mixed(Index n) {
    return DensityMatrix(HermitianMatrix::hermitize(ComplexMatrix::Identity(n, n) / double(n)));
  }

  Index dim() const { return h_.dim(); }
  const HermitianMatrix& hermitian() const { return h_; }
  const ComplexMatrix& matrix() const { return h_.matrix(); }
  const Spectrum& spectrum() const { return spectrum_; }
  const RealVector& eigenvalues() const { return spectrum_.values; }
  const ComplexMatrix& eigenvectors() const { return spectrum_.vectors; }
  double min_eigenvalue() const { return spectrum_.values(0); }
  double pd_floor() const { return floor_; }

  operator const HermitianMatrix&() const { return h_; }

 private:
  HermitianMatrix h_;
  double floor_;
  Spectrum spectrum_;
};

/// Traceless Hermitian matrix: a tangent direction of the density-matrix manifold.
class TangentVector {
 public:
  explicit TangentVector(HermitianMatrix h) : h_(std::move(h)) {
    const double scale = std::max(1.0, h_.frobenius_norm());
    if (std::abs(h_.trace()) > kTraceTol * scale)
      throw InvariantViolation("TangentVector: trace " + detail::fmt(h_.trace()) + " != 0");
  }

  Index dim() const { return h_.dim(); }
  const HermitianMatrix& hermitian() const { return h_; }
  const ComplexMatrix& matrix() const { return h_.matrix(); }

  operator const HermitianMatrix&() const { return h_; }

 private:
  HermitianMatrix h_;
};

/// Ordered Hilbert-Schmidt orthogonal basis of the traceless Hermitian
/// matrices with Tr(E_i E_j) = delta_ij / 2.
class TracelessBasis {
 public:
  TracelessBasis(Index n, std::vector<TangentVector> elements)
      : n_(n), elements_(std::move(elements)) {
    if (static_cast<Index>(elements_.size()) != n * n - 1)
      throw DimensionMismatch("TracelessBasis: expected n^2 - 1 elements");
    for (const auto& e : elements_)
      if (e.dim() != n) throw DimensionMismatch("TracelessBasis: element of wrong dimension");
  }

  Index dim() const { return n_; }
  Index size() const { return static_cast<Index>(elements_.size()); }
  const TangentVector& operator[](Index k) const { return elements_[static_cast<std::size_t>(k)]; }
  const std::vector<TangentVector>& elements() const { return elements_; }

  /// Expansion coefficients of the traceless part of h: c_k = 2 Tr(E_k h).
  RealVector coordinates(const HermitianMatrix& h) const {
    if (h.dim() != n_) throw DimensionMismatch("TracelessBasis::coordinates: dimension mismatch");
    RealVector c(size());
    for (Index k = 0; k < size(); ++k) c(k) = 2.0 * trace_product((*this)[k].hermitian(), h);
    return c;
  }

  /// sum_k c_k E_k
  HermitianMatrix combine(const RealVector& c) const {
    if (c.size() != size()) throw DimensionMismatch("TracelessBasis::combine: coefficient count");
    ComplexMatrix m = ComplexMatrix::Zero(n_, n_);
    for (Index k = 0; k < size(); ++k) m += c(k) * (*this)[k].matrix();
    return HermitianMatrix::hermitize(m);
  }

  RealMatrix gram() const {
    RealMatrix g(size(), size());
    for (Index i = 0; i < size(); ++i)
      for (Index j = 0; j < size(); ++j)
        g(i, j) = trace_product((*this)[i].hermitian(), (*this)[j].hermitian());
    return g;
  }

 private:
  Index n_;
  std::vector<TangentVector> elements_;
};

/// Generalized Gell-Mann matrices divided by two. For n = 2 this is
/// {sigma_1/2, sigma_2/2, sigma_3/2}: symmetric and antisymmetric pairs
/// first (j < k, in order), then the n - 1 diagonal elements.
inline TracelessBasis gell_mann_basis(Index n) {
  if (n < 2) throw DomainError("gell_mann_basis: n must be >= 2");
  std::vector<TangentVector> out;
  out.reserve(static_cast<std::size_t>(n * n - 1));
  const cplx I(0.0, 1.0);
  for (Index j = 0; j < n; ++j) {
    for (Index k = j + 1; k < n; ++k) {
      ComplexMatrix s = ComplexMatrix::Zero(n, n);
      s(j, k) = s(k, j) = 0.5;
      out.emplace_back(HermitianMatrix(s));
      ComplexMatrix a = ComplexMatrix::Zero(n, n);
      a(j, k) = -0.5 * I;
      a(k, j) = 0.5 * I;
      out.emplace_back(HermitianMatrix(a));
    }
  }
  for (Index l = 1; l < n; ++l) {
    const double c = 0.5 * std::sqrt(2.0 / double(l * (l + 1)));
    ComplexMatrix d = ComplexMatrix::Zero(n, n);
    for (Index j = 0; j < l; ++j) d(j, j) = c;
    d(l, l) = -double(l) * c;
    out.emplace_back(HermitianMatrix(d));
  }
  return TracelessBasis(n, std::move(out));
}

/// Pauli matrices; index 0 is the identity.
inline HermitianMatrix pauli(int k) {
  ComplexMatrix m(2, 2);
  const cplx I(0.0, 1.0);
  switch (k) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, -I, I, 0; break;
    case 3: m << 1, 0, 0, -1; break;
    default: throw DomainError("pauli: index must be 0..3");
  }
  return HermitianMatrix(m);
}

// ---------------------------------------------------------------------------
// Seeded random generators.

/// splitmix64 finalizer; per-case seeds are derive_seed(master, index).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  std::uint64_t next() { return engine_(); }

  ComplexMatrix ginibre(Index rows, Index cols) {
    ComplexMatrix g(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) g(i, j) = cplx(normal(), normal()) / std::sqrt(2.0);
    return g;
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Gaussian real and imaginary parts, symmetrized.
inline HermitianMatrix random_hermitian(Rng& rng, Index n) {
  ComplexMatrix g = rng.ginibre(n, n);
  return HermitianMatrix::hermitize(g + g.adjoint());
}

inline HermitianMatrix random_hermitian(std::uint64_t seed, Index n) {
  Rng rng(seed);
  return random_hermitian(rng, n);
}

/// Haar unitary from the QR decomposition of a Ginibre matrix with the
/// phases of R's diagonal absorbed into Q.
inline ComplexMatrix random_unitary(Rng& rng, Index n, Index cols = -1) {
  if (cols < 0) cols = n;
  Eigen::HouseholderQR<ComplexMatrix> qr(rng.ginibre(n, cols));
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, cols);
  const ComplexMatrix& r = qr.matrixQR();
  for (Index j = 0; j < cols; ++j) {
    const cplx d = r(j, j);
    if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

inline ComplexMatrix random_unitary(std::uint64_t seed, Index n) {
  Rng rng(seed);
  return random_unitary(rng, n);
}

/// Random full-rank density matrix with every eigenvalue >= spectrum_floor.
/// G G^dag normalized to unit trace; if its spectrum dips below the floor it
/// is mixed with I/n just enough to lift the smallest eigenvalue to the floor.
inline DensityMatrix random_density(Rng& rng, Index n, double spectrum_floor) {
  if (n < 2) throw DomainError("random_density: n must be >= 2");
  if (!(spectrum_floor > 0.0) || spectrum_floor >= 1.0 / double(n))
    throw DomainError("random_density: spectrum_floor must lie in (0, 1/n)");
  ComplexMatrix g = rng.ginibre(n, n);
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  HermitianMatrix h = HermitianMatrix::hermitize(rho);
  const double lmin = spectral_decompose(h).values(0);
  if (lmin < spectrum_floor) {
    // Aim a hair above the floor so roundoff cannot land below it.
    const double target = spectrum_floor * (1.0 + 1e-12);
    const double w = (target - lmin) / (1.0 / double(n) - lmin);
    rho = (1.0 - w) * h.matrix() + w * ComplexMatrix::Identity(n, n) / double(n);
    h = HermitianMatrix::hermitize(rho);
  }
  return DensityMatrix(h);
}

inline DensityMatrix random_density(std::uint64_t seed, Index n, double spectrum_floor) {
  Rng rng(seed);
  return random_density(rng, n, spectrum_floor);
}

/// Random traceless Hermitian matrix with unit Frobenius norm.
inline TangentVector random_tangent(Rng& rng, Index n) {
  if (n < 2) throw DomainError("random_tangent: n must be >= 2");
  ComplexMatrix h = random_hermitian(rng, n).matrix();
  h -= (h.trace() / double(n)) * ComplexMatrix::Identity(n, n);
  h /= h.norm();
  return TangentVector(HermitianMatrix::hermitize(h));
}

inline TangentVector random_tangent(std::uint64_t seed, Index n) {
  Rng rng(seed);
  return random_tangent(rng, n);
}

/// Traceless part of a Hermitian matrix.
inline TangentVector traceless_part(const HermitianMatrix& h) {
  const Index n = h.dim();
  return TangentVector(HermitianMatrix::hermitize(
      h.matrix() - (h.trace() / double(n)) * ComplexMatrix::Identity(n, n)));
}

/// U H U^dag
inline HermitianMatrix conjugate(const ComplexMatrix& u, const HermitianMatrix& h) {
  return HermitianMatrix::hermitize(u * h.matrix() * u.adjoint());
}

inline DensityMatrix conjugate(const ComplexMatrix& u, const DensityMatrix& d) {
  return DensityMatrix(conjugate(u, d.hermitian()), d.pd_floor());
}

}  // namespace qig
