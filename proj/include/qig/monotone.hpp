#pragma once

// Catalog of symmetric, normalized operator monotone functions f
// (f(1) = 1, f(t) = t f(1/t)) and their two-variable means m(x, y) = y f(x/y).

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "qig/error.hpp"
#include "qig/matrix_core.hpp"

namespace qig {

namespace detail {

/// sinh(z)/z, with its Taylor series where the quotient loses digits.
inline double sinhc(double z) {
  const double z2 = z * z;
  if (std::abs(z) < 1e-3) return 1.0 + z2 / 6.0 * (1.0 + z2 / 20.0 * (1.0 + z2 / 42.0));
  return std::sinh(z) / z;
}

inline void require_positive(double t, const char* who) {
  if (!(t > 0.0)) throw DomainError(std::string(who) + ": argument must be > 0");
}

inline void require_beta(double beta) {
  if (!(beta > -1.0 && beta <= 1.0))
    throw DomainError("f_beta: beta must lie in (-1, 1)");
}

// Both means below are written in u = log(x/y):
//   kubo-mori:  m = sqrt(xy) sinhc(u/2)
//   beta:       m = sqrt(xy) sinhc(u/2)^2 / (sinhc(beta u/2) sinhc((1-beta) u/2))
// which equals the textbook quotients exactly and has no 0/0 at x = y.
inline double km_mean(double x, double y) {
  const double u = std::log(x) - std::log(y);
  return std::sqrt(x * y) * sinhc(0.5 * u);
}

inline double beta_mean(double beta, double x, double y) {
  const double u = std::log(x) - std::log(y);
  const double s = sinhc(0.5 * u);
  return std::sqrt(x * y) * s * s / (sinhc(0.5 * beta * u) * sinhc(0.5 * (1.0 - beta) * u));
}

}  // namespace detail

inline double f_min(double t) {
  detail::require_positive(t, "f_min");
  return 0.5 * (1.0 + t);
}

inline double f_max(double t) {
  detail::require_positive(t, "f_max");
  return 2.0 * t / (1.0 + t);
}

inline double f_kubo_mori(double t) {
  detail::require_positive(t, "f_kubo_mori");
  return detail::km_mean(t, 1.0);
}

/// beta(1-beta)(t-1)^2 / ((t^beta - 1)(t^(1-beta) - 1)); beta in {0, 1} is Kubo-Mori.
inline double f_beta(double beta, double t) {
  detail::require_beta(beta);
  detail::require_positive(t, "f_beta");
  if (beta == 0.0 || beta == 1.0) return f_kubo_mori(t);
  return detail::beta_mean(beta, t, 1.0);
}

enum class FunctionKind { min, max, beta, kubo_mori };

/// A member of the operator monotone catalog.
class MonotoneFunction {
 public:
  static MonotoneFunction min() { return MonotoneFunction(FunctionKind::min, 0.0); }
  static MonotoneFunction max() { return MonotoneFunction(FunctionKind::max, 0.0); }
  static MonotoneFunction kubo_mori() { return MonotoneFunction(FunctionKind::kubo_mori, 0.0); }
  static MonotoneFunction beta(double b) {
    detail::require_beta(b);
    if (b == 0.0 || b == 1.0) return kubo_mori();
    return MonotoneFunction(FunctionKind::beta, b);
  }

  /// "min" | "max" | "beta:<float>" | "km"
  static MonotoneFunction parse(std::string_view spec) {
    if (spec == "min") return min();
    if (spec == "max") return max();
    if (spec == "km") return kubo_mori();
    if (spec.substr(0, 5) == "beta:") {
      const std::string num(spec.substr(5));
      std::size_t used = 0;
      double b = 0.0;
      try {
        b = std::stod(num, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != num.size())
        throw ConfigError("function spec '" + std::string(spec) + "': bad beta value");
      return beta(b);
    }
    throw ConfigError("unknown function spec '" + std::string(spec) + "'");
  }

  FunctionKind kind() const { return kind_; }
  double beta_parameter() const { return beta_; }

  std::string name() const {
    switch (kind_) {
      case FunctionKind::min: return "min";
      case FunctionKind::max: return "max";
      case FunctionKind::kubo_mori: return "km";
      case FunctionKind::beta: {
        // shortest form that parses back to the same double
        char buf[40];
        auto res = std::to_chars(buf, buf + sizeof buf, beta_);
        return "beta:" + std::string(buf, res.ptr);
      }
    }
    return "?";
  }

  double operator()(double t) const {
    switch (kind_) {
      case FunctionKind::min: return f_min(t);
      case FunctionKind::max: return f_max(t);
      case FunctionKind::kubo_mori: return f_kubo_mori(t);
      case FunctionKind::beta: return f_beta(beta_, t);
    }
    return std::numeric_limits<double>::quiet_NaN();
  }

  /// lim_{t -> 0+} f(t).
  double at_zero() const {
    switch (kind_) {
      case FunctionKind::min: return 0.5;
      case FunctionKind::max: return 0.0;
      case FunctionKind::kubo_mori: return 0.0;
      case FunctionKind::beta: return beta_ > 0.0 && beta_ < 1.0 ? beta_ * (1.0 - beta_) : 0.0;
    }
    return 0.0;
  }

  /// m(x, y) = y f(x/y), the mean that scales J_D in D's eigenbasis.
  double mean(double x, double y) const {
    detail::require_positive(x, "mean");
    detail::require_positive(y, "mean");
    switch (kind_) {
      case FunctionKind::min: return 0.5 * (x + y);
      case FunctionKind::max: return 2.0 * x * y / (x + y);
      case FunctionKind::kubo_mori: return detail::km_mean(x, y);
      case FunctionKind::beta: return detail::beta_mean(beta_, x, y);
    }
    return std::numeric_limits<double>::quiet_NaN();
  }

  friend bool operator==(const MonotoneFunction& a, const MonotoneFunction& b) {
    return a.kind_ == b.kind_ && a.beta_ == b.beta_;
  }

 private:
  MonotoneFunction(FunctionKind k, double b) : kind_(k), beta_(b) {}

  FunctionKind kind_;
  double beta_;
};

/// min, max, beta:0.3, beta:-0.3, beta:0.5, km
inline std::vector<MonotoneFunction> catalog() {
  return {MonotoneFunction::min(),      MonotoneFunction::max(),
          MonotoneFunction::beta(0.3),  MonotoneFunction::beta(-0.3),
          MonotoneFunction::beta(0.5),  MonotoneFunction::kubo_mori()};
}

/// Log-spaced grid on [lo, hi], endpoints included.
inline std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> g;
  g.reserve(static_cast<std::size_t>(points));
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < points; ++i)
    g.push_back(std::exp(a + (b - a) * double(i) / double(points - 1)));
  return g;
}

struct MatrixMonotonicityReport {
  int trials = 0;
  int violations = 0;
  double worst_min_eigenvalue = std::numeric_limits<double>::infinity();
};

/// Necessary-condition check of operator monotonicity: for seeded pairs
/// 0 < A <= B, the smallest eigenvalue of f(B) - f(A) must be >= -1e-9.
inline MatrixMonotonicityReport check_matrix_monotone(const MonotoneFunction& f, std::uint64_t seed,
                                                      int trials, Index dim) {
  if (dim < 1 || dim > 4) throw DomainError("check_matrix_monotone: dim must be in 1..4");
  if (trials < 1) throw DomainError("check_matrix_monotone: trials must be >= 1");
  Rng rng(seed);
  MatrixMonotonicityReport rep;
  for (int k = 0; k < trials; ++k) {
    // Spread the spectra over a few decades so the check sees the tails of f.
    const double scale_a = std::pow(10.0, rng.uniform(-2.0, 2.0));
    const double scale_p = std::pow(10.0, rng.uniform(-3.0, 1.0)) * scale_a;
    ComplexMatrix g = rng.ginibre(dim, dim);
    ComplexMatrix p = rng.ginibre(dim, dim);
    ComplexMatrix a = scale_a * (g * g.adjoint() / double(dim) + 1e-2 * ComplexMatrix::Identity(dim, dim));
    ComplexMatrix b = a + scale_p * (p * p.adjoint()) / double(dim);
    auto fa = spectral_apply(spectral_decompose(HermitianMatrix::hermitize(a)), f);
    auto fb = spectral_apply(spectral_decompose(HermitianMatrix::hermitize(b)), f);
    const double lmin = spectral_decompose(fb - fa).values(0);
    const double tol = 1e-9 * std::max(1.0, fb.matrix().norm());
    rep.worst_min_eigenvalue = std::min(rep.worst_min_eigenvalue, lmin);
    if (lmin < -tol) ++rep.violations;
    ++rep.trials;
  }
  return rep;
}

}  // namespace qig
