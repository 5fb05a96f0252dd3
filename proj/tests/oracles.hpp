#pragma once

// Test-only reference computations. Everything here avoids the spectral
// multiplier path of the library: Kronecker-vectorized linear solves, Eigen's
// Schur-based matrix functions, brute-force formulas.

#include <cmath>
#include <complex>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "qig/matrix_core.hpp"

namespace qig::oracle {

inline ComplexMatrix vec(const ComplexMatrix& m) {
  return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}

inline ComplexMatrix unvec(const Eigen::VectorXcd& v, Index n) {
  return Eigen::Map<const ComplexMatrix>(v.data(), n, n);
}

/// Solve P X + X Q = C by vectorization: (I (x) P + Q^T (x) I) vec X = vec C.
inline ComplexMatrix sylvester(const ComplexMatrix& p, const ComplexMatrix& q, const ComplexMatrix& c) {
  const Index n = p.rows();
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  ComplexMatrix k = Eigen::kroneckerProduct(id, p).eval() + Eigen::kroneckerProduct(q.transpose(), id).eval();
  Eigen::VectorXcd x = k.fullPivLu().solve(Eigen::VectorXcd(vec(c)));
  return unvec(x, n);
}

/// Matrix power through Eigen's Schur-Pade MatrixPower.
inline ComplexMatrix mpow(const ComplexMatrix& d, double p) {
  return (p * d.log()).exp();
}

inline ComplexMatrix inverse(const ComplexMatrix& d) { return d.fullPivLu().inverse(); }

/// Traced commuting-case Fisher information Tr D^{-1} A^2.
inline double commuting_fisher(const ComplexMatrix& d, const ComplexMatrix& a) {
  return (inverse(d) * a * a).trace().real();
}

}  // namespace qig::oracle
