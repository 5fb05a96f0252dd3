#pragma once

// Riemannian geometry of the monotone metrics in the affine chart
// D(x) = I/n + sum_k x_k E_k (E_k the Gell-Mann matrices over two):
// metric tensor, scalar curvature by nested central differences with
// Richardson extrapolation, Gibbs-curve scans, and the exponential-family
// duality with the Kubo-Mori variance.

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "qig/channel.hpp"
#include "qig/error.hpp"
#include "qig/matrix_core.hpp"
#include "qig/metric.hpp"

namespace qig {

inline constexpr Index kMaxCurvatureDim = 4;
inline constexpr double kCurvatureStep = 1e-2;

class Chart {
 public:
  explicit Chart(Index n, double pd_floor = kDefaultPdFloor)
      : n_(n), basis_(gell_mann_basis(n)), origin_(DensityMatrix::maximally_mixed(n)), floor_(pd_floor) {}

  Index matrix_dim() const { return n_; }
  Index dim() const { return basis_.size(); }
  const TracelessBasis& basis() const { return basis_; }
  const DensityMatrix& origin() const { return origin_; }
  double pd_floor() const { return floor_; }

  HermitianMatrix to_hermitian(const RealVector& x) const {
    if (x.size() != dim()) throw DimensionMismatch("Chart: coordinate vector of wrong length");
    return origin_.hermitian() + basis_.combine(x);
  }

  DensityMatrix to_state(const RealVector& x) const {
    HermitianMatrix h = to_hermitian(x);
    const double lmin = spectral_decompose(h).values(0);
    if (!(lmin >= floor_))
      throw DomainError("Chart: point outside the positivity domain (lambda_min = " + detail::fmt(lmin) + ")");
    return DensityMatrix(h, floor_);
  }

  /// x_k = 2 Tr(E_k D)
  RealVector coordinates(const HermitianMatrix& d) const { return basis_.coordinates(d); }

  double min_eigenvalue(const RealVector& x) const { return spectral_decompose(to_hermitian(x)).values(0); }

 private:
  Index n_;
  TracelessBasis basis_;
  DensityMatrix origin_;
  double floor_;
};

/// g_ij(x) = gamma_{D(x)}(E_i, E_j).
inline RealMatrix metric_tensor(const Chart& chart, const MonotoneFunction& f, const RealVector& x) {
  MetricContext ctx(chart.to_state(x), f);
  const Index d = chart.dim();
  std::vector<ComplexMatrix> e;
  e.reserve(static_cast<std::size_t>(d));
  for (Index k = 0; k < d; ++k) e.push_back(ctx.to_eigenbasis(chart.basis()[k]));
  const RealMatrix w = ctx.multipliers().cwiseInverse();
  RealMatrix g(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j <= i; ++j)
      g(i, j) = g(j, i) = detail::weighted_pairing(e[static_cast<std::size_t>(i)], e[static_cast<std::size_t>(j)], w);
  return g;
}

namespace detail {

// gamma[i](j, k) = Gamma^i_{jk}
using Christoffel = std::vector<RealMatrix>;

inline RealVector offset(const RealVector& x, Index k, double h) {
  RealVector y = x;
  y(k) += h;
  return y;
}

inline Christoffel christoffel(const Chart& chart, const MonotoneFunction& f, const RealVector& x, double h) {
  const Index d = chart.dim();
  const RealMatrix ginv = metric_tensor(chart, f, x).inverse();
  std::vector<RealMatrix> dg;
  for (Index k = 0; k < d; ++k)
    dg.push_back((metric_tensor(chart, f, offset(x, k, h)) - metric_tensor(chart, f, offset(x, k, -h))) / (2.0 * h));
  // lowered symbols Gamma_{l,jk} = (d_j g_lk + d_k g_lj - d_l g_jk) / 2
  std::vector<RealMatrix> low(static_cast<std::size_t>(d), RealMatrix(d, d));
  for (Index l = 0; l < d; ++l)
    for (Index j = 0; j < d; ++j)
      for (Index k = 0; k < d; ++k)
        low[l](j, k) = 0.5 * (dg[j](l, k) + dg[k](l, j) - dg[l](j, k));
  Christoffel gam(static_cast<std::size_t>(d), RealMatrix::Zero(d, d));
  for (Index i = 0; i < d; ++i)
    for (Index l = 0; l < d; ++l) gam[i] += ginv(i, l) * low[l];
  return gam;
}

/// Scal = g^{jl} R_jl with R_jl = d_i G^i_jl - d_l G^i_ij + G^i_im G^m_jl - G^i_lm G^m_ij.
inline double scalar_curvature_at_step(const Chart& chart, const MonotoneFunction& f, const RealVector& x, double h) {
  const Index d = chart.dim();
  const RealMatrix ginv = metric_tensor(chart, f, x).inverse();
  const Christoffel gam = christoffel(chart, f, x, h);
  // dgam[k][i](l, j) = d_k Gamma^i_{lj}
  std::vector<Christoffel> dgam;
  for (Index k = 0; k < d; ++k) {
    Christoffel p = christoffel(chart, f, offset(x, k, h), h);
    Christoffel m = christoffel(chart, f, offset(x, k, -h), h);
    for (Index i = 0; i < d; ++i) p[i] = (p[i] - m[i]) / (2.0 * h);
    dgam.push_back(std::move(p));
  }
  RealVector trace_gam(d);  // Gamma^i_{im}
  for (Index m = 0; m < d; ++m) {
    trace_gam(m) = 0.0;
    for (Index i = 0; i < d; ++i) trace_gam(m) += gam[i](i, m);
  }
  RealMatrix ricci = RealMatrix::Zero(d, d);
  for (Index j = 0; j < d; ++j)
    for (Index l = 0; l < d; ++l) {
      double r = 0.0;
      for (Index i = 0; i < d; ++i) {
        r += dgam[i][i](j, l) - dgam[l][i](i, j);
        for (Index m = 0; m < d; ++m) r += -gam[i](l, m) * gam[m](i, j);
      }
      for (Index m = 0; m < d; ++m) r += trace_gam(m) * gam[m](j, l);
      ricci(j, l) = r;
    }
  return (ginv.cwiseProduct(ricci)).sum();
}

}  // namespace detail

struct CurvatureReport {
  RealVector point;
  double scalar_curvature = 0.0;     // at fd_step
  double fd_step = 0.0;
  double richardson_estimate = 0.0;  // (4 S(h/2) - S(h)) / 3
  double error_gauge = 0.0;          // |S(h) - S(h/2)|
  bool flagged = false;              // gauge above 1e-2 max(1, |estimate|)
};

/// The nested stencil reaches coordinate distance sqrt(2) h, i.e. operator
/// distance h; x must keep lambda_min(D(x)) > 2h.
inline CurvatureReport scalar_curvature(const Chart& chart, const MonotoneFunction& f, const RealVector& x,
                                        double h = kCurvatureStep) {
  if (chart.matrix_dim() > kMaxCurvatureDim)
    throw DomainError("scalar_curvature: matrix dimension limited to " + std::to_string(kMaxCurvatureDim));
  if (!(h > 0.0)) throw DomainError("scalar_curvature: step must be positive");
  const double lmin = chart.min_eigenvalue(x);
  if (!(lmin > 2.0 * h + chart.pd_floor()))
    throw DomainError("scalar_curvature: stencil ball leaves the positivity domain (lambda_min = " +
                      detail::fmt(lmin) + ", h = " + detail::fmt(h) + ")");
  CurvatureReport r;
  r.point = x;
  r.fd_step = h;
  r.scalar_curvature = detail::scalar_curvature_at_step(chart, f, x, h);
  const double half = detail::scalar_curvature_at_step(chart, f, x, 0.5 * h);
  r.richardson_estimate = (4.0 * half - r.scalar_curvature) / 3.0;
  r.error_gauge = std::abs(r.scalar_curvature - half);
  r.flagged = r.error_gauge > 1e-2 * std::max(1.0, std::abs(r.richardson_estimate));
  return r;
}

// Truncation error scales with h / lambda_min; Richardson over {h, h/2} is
// most accurate near h = lambda_min / 32, below which roundoff takes over.
inline constexpr double kStepPerEigenvalue = 1.0 / 32.0;

inline double adapted_step(double lambda_min, double h = kCurvatureStep) {
  return std::min(h, kStepPerEigenvalue * lambda_min);
}

inline double adapted_step(const Chart& chart, const RealVector& x, double h = kCurvatureStep) {
  return adapted_step(chart.min_eigenvalue(x), h);
}

// ---------------------------------------------------------------------------
// Gibbs curves

struct GibbsScanRow {
  double beta;
  bool skipped;             // state too close to the boundary for the stencil
  std::string notice;
  CurvatureReport report;
  // against the previous unskipped row; NaN on the first
  double rise = std::numeric_limits<double>::quiet_NaN();
  double allowance = std::numeric_limits<double>::quiet_NaN();
};

struct GibbsScan {
  std::vector<GibbsScanRow> rows;
  bool monotone_decreasing = true;
  std::vector<std::size_t> violations;  // rows whose value rose above the previous unskipped row beyond the gauges
  double worst_excess = -std::numeric_limits<double>::infinity();  // max over k of rise minus summed gauges
};

/// e^{-beta H} / Tr e^{-beta H}, spectrally with a shift against overflow.
inline DensityMatrix gibbs_density(const HermitianMatrix& h, double beta, double pd_floor = 0.0) {
  Spectrum s = spectral_decompose(h);
  RealVector w = (-beta * (s.values.array() - (beta >= 0 ? s.values.minCoeff() : s.values.maxCoeff()))).exp();
  w /= w.sum();
  return DensityMatrix(HermitianMatrix::hermitize(s.vectors * w.cast<cplx>().asDiagonal() * s.vectors.adjoint()),
                       pd_floor);
}

inline constexpr double kScanMinEigenvalue = 1e-6;

/// Scalar curvature along beta -> e^{-beta H}/Z. A rise between consecutive
/// points counts as a violation only when it exceeds the sum of both error
/// gauges (plus a 1e-9 relative roundoff allowance).
inline GibbsScan gibbs_scan(const HermitianMatrix& h, const MonotoneFunction& f, const std::vector<double>& beta_grid,
                            double step = kCurvatureStep) {
  for (std::size_t k = 1; k < beta_grid.size(); ++k)
    if (!(beta_grid[k] > beta_grid[k - 1])) throw DomainError("gibbs_scan: beta grid must be strictly ascending");
  Chart chart(h.dim(), 0.0);
  GibbsScan scan;
  for (double beta : beta_grid) {
    GibbsScanRow row;
    row.beta = beta;
    row.skipped = false;
    const DensityMatrix d = gibbs_density(h, beta);
    const RealVector x = chart.coordinates(d);
    const double lmin = d.min_eigenvalue();
    if (lmin < kScanMinEigenvalue) {
      row.skipped = true;
      row.notice = "lambda_min " + detail::fmt(lmin) + " below " + detail::fmt(kScanMinEigenvalue);
    } else {
      row.report = scalar_curvature(chart, f, x, adapted_step(lmin, step));
    }
    scan.rows.push_back(std::move(row));
  }
  const GibbsScanRow* prev = nullptr;
  for (std::size_t k = 0; k < scan.rows.size(); ++k) {
    GibbsScanRow& cur = scan.rows[k];
    if (cur.skipped) continue;
    if (prev) {
      const double rise = cur.report.richardson_estimate - prev->report.richardson_estimate;
      const double allowance = cur.report.error_gauge + prev->report.error_gauge +
                               1e-9 * std::max(1.0, std::abs(prev->report.richardson_estimate));
      cur.rise = rise;
      cur.allowance = allowance;
      scan.worst_excess = std::max(scan.worst_excess, rise - allowance);
      if (rise > allowance) {
        scan.monotone_decreasing = false;
        scan.violations.push_back(k);
      }
    }
    prev = &cur;
  }
  return scan;
}

// ---------------------------------------------------------------------------
// Coarse graining

struct CoarseGrainingProbe {
  CurvatureReport upstream;    // at D, in the n_in chart
  CurvatureReport downstream;  // at alpha(D), in the n_out chart
  bool conjecture_holds;       // Scal(D) < Scal(alpha(D)), raw values, no dimension normalization
  bool floored;
};

inline CoarseGrainingProbe coarse_graining_curvature_probe(const DensityMatrix& d, const MonotoneFunction& f,
                                                           const Channel& ch, double step = kCurvatureStep) {
  auto pushed = push_forward(ch, d);
  Chart up(d.dim(), 0.0), down(ch.out_dim(), 0.0);
  const RealVector xu = up.coordinates(d), xd = down.coordinates(pushed.state);
  CoarseGrainingProbe p;
  p.upstream = scalar_curvature(up, f, xu, adapted_step(d.min_eigenvalue(), step));
  p.downstream = scalar_curvature(down, f, xd, adapted_step(pushed.state.min_eigenvalue(), step));
  p.conjecture_holds = p.upstream.richardson_estimate < p.downstream.richardson_estimate;
  p.floored = pushed.floored();
  return p;
}

// ---------------------------------------------------------------------------
// Exponential parametrization

struct ExponentialDuality {
  double hessian;      // d^2/dt du log Tr exp(H0 + t Bi + u Bj) at 0
  double km_variance;  // Kubo-Mori phi_D[Bi - <Bi>, Bj - <Bj>] at D = e^{H0}/Z
};

/// log Tr e^H = lambda_max + log sum exp(lambda - lambda_max).
inline double log_trace_exp(const HermitianMatrix& h) {
  const RealVector lam = spectral_decompose(h).values;
  const double top = lam.maxCoeff();
  return top + std::log((lam.array() - top).exp().sum());
}

inline ExponentialDuality km_exponential_duality_check(const HermitianMatrix& h0, const HermitianMatrix& bi,
                                                       const HermitianMatrix& bj, double h = 1e-4) {
  if (bi.dim() != h0.dim() || bj.dim() != h0.dim()) throw DimensionMismatch("km_exponential_duality_check");
  auto psi = [&](double t, double u) { return log_trace_exp(h0 + (t * h) * bi + (u * h) * bj); };
  ExponentialDuality r{};
  r.hessian = (psi(1, 1) - psi(1, -1) - psi(-1, 1) + psi(-1, -1)) / (4.0 * h * h);
  const DensityMatrix d = gibbs_density(h0, -1.0);
  const HermitianMatrix id = HermitianMatrix::identity(h0.dim());
  const HermitianMatrix ci = bi - trace_product(d.hermitian(), bi) * id;
  const HermitianMatrix cj = bj - trace_product(d.hermitian(), bj) * id;
  r.km_variance = variance(MetricContext(d, MonotoneFunction::kubo_mori()), ci, cj);
  return r;
}

}  // namespace qig
