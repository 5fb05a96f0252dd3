#pragma once

// Adaptive Simpson quadrature over arbitrary value types (scalars or Eigen
// matrices). Used only for the integral-representation oracles.

#include <cmath>
#include <functional>
#include <limits>
#include <type_traits>
#include <vector>

namespace qig {

struct QuadratureOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-15;
  int initial_panels = 200;  // 201 nodes
  int max_depth = 40;
};

template <class T>
struct QuadratureResult {
  T value;
  double error_estimate = 0.0;
  bool converged = true;
  long evaluations = 0;
};

namespace detail {

template <class T>
double magnitude(const T& v) {
  if constexpr (std::is_arithmetic_v<T>) {
    return std::abs(v);
  } else {
    return v.norm();
  }
}

template <class T, class F>
struct SimpsonState {
  F& f;
  long evals = 0;
  bool converged = true;
  double error = 0.0;
  int max_depth;

  T eval(double x) {
    ++evals;
    return f(x);
  }

  // Richardson-corrected recursive Simpson on [a, b] given f(a), f(m), f(b).
  T refine(double a, double b, const T& fa, const T& fm, const T& fb, const T& whole, double tol,
           int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    T flm = eval(lm);
    T frm = eval(rm);
    T left = ((m - a) / 6.0) * (fa + 4.0 * flm + fm);
    T right = ((b - m) / 6.0) * (fm + 4.0 * frm + fb);
    T sum = left + right;
    const double diff = magnitude(T(sum - whole));
    if (diff <= 15.0 * tol || depth >= max_depth) {
      if (depth >= max_depth && diff > 15.0 * tol) converged = false;
      error += diff / 15.0;
      return sum + (sum - whole) / 15.0;
    }
    return refine(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           refine(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
  }
};

}  // namespace detail

/// Integrate f over [a, b]. The tolerance is relative to the magnitude of a
/// coarse first pass and is distributed over panels by width.
template <class F>
auto integrate(F&& f, double a, double b, const QuadratureOptions& opt = {})
    -> QuadratureResult<std::decay_t<decltype(f(a))>> {
  using T = std::decay_t<decltype(f(a))>;
  detail::SimpsonState<T, std::remove_reference_t<F>> st{f, 0, true, 0.0, opt.max_depth};

  const int n = opt.initial_panels;
  const double h = (b - a) / double(n);
  std::vector<T> nodes;
  nodes.reserve(static_cast<std::size_t>(n + 1));
  for (int i = 0; i <= n; ++i) nodes.push_back(st.eval(a + h * double(i)));
  std::vector<T> mids;
  mids.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) mids.push_back(st.eval(a + h * (double(i) + 0.5)));

  T coarse = (h / 6.0) * (nodes[0] + 4.0 * mids[0] + nodes[1]);
  for (int i = 1; i < n; ++i) coarse = coarse + (h / 6.0) * (nodes[i] + 4.0 * mids[i] + nodes[i + 1]);
  const double tol = std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(coarse));

  T total = coarse - coarse;
  for (int i = 0; i < n; ++i) {
    const double lo = a + h * double(i), hi = lo + h;
    T whole = (h / 6.0) * (nodes[i] + 4.0 * mids[i] + nodes[i + 1]);
    total = total + st.refine(lo, hi, nodes[i], mids[i], nodes[i + 1], whole, tol / double(n), 1);
  }
  return {total, st.error, st.converged, st.evals};
}

/// Integrate f over [0, inf) via t = s / (1 - s), dt = (1 + t)^2 ds.
/// The endpoint s = 1 is evaluated as the limit f(t) (1 + t)^2 at t = 1e12,
/// which covers both exponential decay and 1/t^2 tails.
template <class F>
auto integrate_half_line(F&& f, const QuadratureOptions& opt = {})
    -> QuadratureResult<std::decay_t<decltype(f(0.0))>> {
  using T = std::decay_t<decltype(f(0.0))>;
  auto g = [&](double s) -> T {
    const double t = s >= 1.0 ? 1e12 : s / (1.0 - s);
    return f(t) * ((1.0 + t) * (1.0 + t));
  };
  return integrate(g, 0.0, 1.0, opt);
}

}  // namespace qig
