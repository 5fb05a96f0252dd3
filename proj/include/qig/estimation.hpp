#pragma once

// Parametric families of states, logarithmic derivatives, and the scalar and
// matrix Cramer-Rao inequalities phi_0[A] >= G^{-1} for locally unbiased
// estimators, together with the 2m x 2m block-matrix positivity check.

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "qig/error.hpp"
#include "qig/matrix_core.hpp"
#include "qig/metric.hpp"

namespace qig {

inline constexpr double kModelStep = 1e-5;
inline constexpr double kCenteringTol = 1e-9;
inline constexpr double kCalibrationTol = 1e-7;
inline constexpr double kUnbiasednessTol = 1e-6;
inline constexpr double kTangentTraceTol = 1e-10;

using StateMap = std::function<DensityMatrix(const RealVector&)>;

struct DerivativeOptions {
  double step = kModelStep;
  bool richardson = false;  // combine steps h and h/2: (4 D'(h/2) - D'(h)) / 3
};

/// Central differences of theta -> D_theta at theta = 0, one per parameter.
inline std::vector<TangentVector> finite_difference_tangents(const StateMap& state_at, Index param_dim,
                                                             const DerivativeOptions& opt = {}) {
  auto central = [&](Index i, double h) -> ComplexMatrix {
    RealVector e = RealVector::Zero(param_dim);
    e(i) = h;
    return (state_at(e).matrix() - state_at(-e).matrix()) / (2.0 * h);
  };
  std::vector<TangentVector> out;
  for (Index i = 0; i < param_dim; ++i) {
    ComplexMatrix t = central(i, opt.step);
    if (opt.richardson) t = (4.0 * central(i, 0.5 * opt.step) - t) / 3.0;
    HermitianMatrix h = HermitianMatrix::hermitize(t);
    if (std::abs(h.trace()) > kTangentTraceTol)
      throw InvariantViolation("finite_difference_tangents: family is not trace preserving (Tr dD = " +
                               detail::fmt(h.trace()) + ")");
    out.push_back(traceless_part(h));  // drop the O(eps/h) roundoff in the trace
  }
  return out;
}

/// m-parameter family theta -> D_theta with its tangents at theta = 0.
class StatisticalModel {
 public:
  /// Tangents supplied in closed form.
  StatisticalModel(std::string name, Index param_dim, StateMap state_at, std::vector<TangentVector> tangents)
      : name_(std::move(name)), m_(param_dim), state_at_(std::move(state_at)),
        d0_(state_at_(RealVector::Zero(param_dim))), tangents_(std::move(tangents)), analytic_(true) {
    validate();
  }

  /// Tangents by central differences.
  StatisticalModel(std::string name, Index param_dim, StateMap state_at, const DerivativeOptions& opt = {})
      : name_(std::move(name)), m_(param_dim), state_at_(std::move(state_at)),
        d0_(state_at_(RealVector::Zero(param_dim))),
        tangents_(finite_difference_tangents(state_at_, param_dim, opt)), analytic_(false) {
    validate();
  }

  const std::string& name() const { return name_; }
  Index param_dim() const { return m_; }
  Index dim() const { return d0_.dim(); }
  const DensityMatrix& state() const { return d0_; }
  DensityMatrix state_at(const RealVector& theta) const {
    if (theta.size() != m_) throw DimensionMismatch("StatisticalModel::state_at: parameter count");
    return state_at_(theta);
  }
  const StateMap& state_map() const { return state_at_; }
  const std::vector<TangentVector>& tangents() const { return tangents_; }
  const TangentVector& tangent(Index i) const { return tangents_.at(static_cast<std::size_t>(i)); }
  bool analytic_tangents() const { return analytic_; }

 private:
  void validate() const {
    if (m_ < 1) throw DomainError("StatisticalModel: param_dim must be >= 1");
    if (static_cast<Index>(tangents_.size()) != m_)
      throw DimensionMismatch("StatisticalModel: expected one tangent per parameter");
    for (const auto& t : tangents_)
      if (t.dim() != d0_.dim()) throw DimensionMismatch("StatisticalModel: tangent of wrong dimension");
  }

  std::string name_;
  Index m_;
  StateMap state_at_;
  DensityMatrix d0_;
  std::vector<TangentVector> tangents_;
  bool analytic_;
};

// ---------------------------------------------------------------------------
// Builtin families

/// D_theta = (I + (r + theta) sigma_3) / 2.
inline StatisticalModel bloch_radial_model(double r) {
  if (!(r > -1.0 && r < 1.0)) throw DomainError("bloch_radial: r must lie in (-1, 1)");
  auto map = [r](const RealVector& th) { return bloch_state(0.0, 0.0, r + th(0)); };
  return StatisticalModel("bloch_radial", 1, map, {TangentVector(0.5 * pauli(3))});
}

/// D_theta = (I + sum_k (x_k + sum_{i: axes_i = k} theta_i) sigma_k) / 2, axes in {1, 2, 3}.
inline StatisticalModel bloch_full_model(const Eigen::Vector3d& x, std::vector<int> axes = {1, 2, 3}) {
  if (!(x.norm() < 1.0)) throw DomainError("bloch_full: Bloch vector must lie in the open unit ball");
  if (axes.empty()) throw DomainError("bloch_full: at least one axis");
  std::vector<TangentVector> tangents;
  for (int a : axes) {
    if (a < 1 || a > 3) throw DomainError("bloch_full: axes must be 1, 2 or 3");
    tangents.emplace_back(0.5 * pauli(a));
  }
  auto map = [x, axes](const RealVector& th) {
    Eigen::Vector3d v = x;
    for (std::size_t i = 0; i < axes.size(); ++i) v(axes[i] - 1) += th(static_cast<Index>(i));
    return bloch_state(v(0), v(1), v(2));
  };
  return StatisticalModel("bloch_full", static_cast<Index>(axes.size()), map, std::move(tangents));
}

/// e^{-X} / Tr e^{-X} through the spectrum of X, shifted for stability.
inline DensityMatrix gibbs_state(const HermitianMatrix& x, double pd_floor = kDefaultPdFloor) {
  Spectrum s = spectral_decompose(x);
  const double lo = s.values.minCoeff();
  RealVector w = (-(s.values.array() - lo)).exp();
  w /= w.sum();
  ComplexMatrix m = s.vectors * w.cast<cplx>().asDiagonal() * s.vectors.adjoint();
  return DensityMatrix(HermitianMatrix::hermitize(m), pd_floor);
}

/// Gibbs family around beta0. With no directions the parameter is beta itself
/// (D_theta = e^{-(beta0 + theta) H} / Z); otherwise D_theta is proportional
/// to exp(-beta0 H + sum_i theta_i X_i). Tangents by central differences.
inline StatisticalModel gibbs_model(const HermitianMatrix& h, double beta0,
                                    std::vector<HermitianMatrix> directions = {},
                                    const DerivativeOptions& opt = {}) {
  if (directions.empty()) {
    auto map = [h, beta0](const RealVector& th) { return gibbs_state((beta0 + th(0)) * h); };
    return StatisticalModel("gibbs", 1, map, opt);
  }
  for (const auto& x : directions)
    if (x.dim() != h.dim()) throw DimensionMismatch("gibbs_model: direction of wrong dimension");
  const Index m = static_cast<Index>(directions.size());
  auto map = [h, beta0, directions](const RealVector& th) {
    HermitianMatrix x = beta0 * h;
    for (std::size_t i = 0; i < directions.size(); ++i) x = x - th(static_cast<Index>(i)) * directions[i];
    return gibbs_state(x);
  };
  return StatisticalModel("gibbs", m, map, opt);
}

/// Coefficients c(theta) of D_theta = I/n + sum_k c_k E_k in the Gell-Mann basis.
struct PolynomialTerm {
  Index coefficient;          // which E_k
  double weight;              // multiplies prod_i theta_i^powers_i
  std::vector<int> powers;    // one exponent per parameter
};

struct CoefficientMap {
  RealVector offset;                    // c(0), length n^2 - 1
  RealMatrix linear;                    // (n^2 - 1) x m, may be empty
  std::vector<PolynomialTerm> terms;    // higher-order corrections

  RealVector operator()(const RealVector& th) const {
    RealVector c = offset;
    if (linear.size() > 0) c += linear * th;
    for (const auto& t : terms) {
      double v = t.weight;
      for (std::size_t i = 0; i < t.powers.size(); ++i) v *= std::pow(th(static_cast<Index>(i)), t.powers[i]);
      c(t.coefficient) += v;
    }
    return c;
  }
};

/// Family in Gell-Mann coordinates; tangents by central differences.
inline StatisticalModel coefficient_model(Index n, Index param_dim, CoefficientMap coeffs, double floor,
                                          const DerivativeOptions& opt = {}) {
  const Index k = n * n - 1;
  if (coeffs.offset.size() != k) throw ConfigError("user_config: offset must have n^2 - 1 entries");
  if (coeffs.linear.size() > 0 && (coeffs.linear.rows() != k || coeffs.linear.cols() != param_dim))
    throw ConfigError("user_config: linear map must be (n^2 - 1) x param_dim");
  for (const auto& t : coeffs.terms)
    if (t.coefficient < 0 || t.coefficient >= k || static_cast<Index>(t.powers.size()) != param_dim)
      throw ConfigError("user_config: malformed polynomial term");
  auto basis = std::make_shared<TracelessBasis>(gell_mann_basis(n));
  auto map = [n, basis, coeffs, floor](const RealVector& th) {
    HermitianMatrix d = (1.0 / double(n)) * HermitianMatrix::identity(n) + basis->combine(coeffs(th));
    return DensityMatrix(d, floor);
  };
  return StatisticalModel("user_config", param_dim, map, opt);
}

/// D_theta = D_0 + sum_i theta_i T_i with seeded D_0 and unit tangents.
inline StatisticalModel random_affine_model(std::uint64_t seed, Index n, Index param_dim, double floor = 0.02) {
  Rng rng(seed);
  DensityMatrix d0 = random_density(rng, n, floor);
  std::vector<TangentVector> ts;
  for (Index i = 0; i < param_dim; ++i) ts.push_back(random_tangent(rng, n));
  auto map = [d0, ts](const RealVector& th) {
    HermitianMatrix d = d0.hermitian();
    for (std::size_t i = 0; i < ts.size(); ++i) d = d + th(static_cast<Index>(i)) * ts[i].hermitian();
    return DensityMatrix(d, 0.0);
  };
  return StatisticalModel("random_affine", param_dim, map, std::move(ts));
}

// ---------------------------------------------------------------------------
// Logarithmic derivatives and Fisher matrix

/// L_i = J_0^{-1}(d_i D), characterized by phi_0[L_i, B] = Tr (d_i D) B.
inline std::vector<HermitianMatrix> log_derivatives(const StatisticalModel& model, const MonotoneFunction& f) {
  MetricContext ctx(model.state(), f);
  std::vector<HermitianMatrix> out;
  for (const auto& t : model.tangents()) out.push_back(apply_J_inv(ctx, t));
  return out;
}

/// max_{i, B} |phi_0[L_i, B] - Tr (d_i D) B| over the Hilbert-Schmidt basis.
inline double log_derivative_residual(const StatisticalModel& model, const MonotoneFunction& f) {
  MetricContext ctx(model.state(), f);
  auto ls = log_derivatives(model, f);
  const Index n = model.dim();
  std::vector<HermitianMatrix> basis{HermitianMatrix::identity(n)};
  const TracelessBasis gm = gell_mann_basis(n);
  for (const auto& e : gm.elements()) basis.push_back(e.hermitian());
  double worst = 0.0;
  for (std::size_t i = 0; i < ls.size(); ++i)
    for (const auto& b : basis)
      worst = std::max(worst, std::abs(variance(ctx, ls[i], b) - trace_product(model.tangents()[i].hermitian(), b)));
  return worst;
}

inline constexpr double kRankTol = 1e-12;

struct FisherMatrix {
  RealMatrix g;
  double min_eigenvalue;
  bool rank_deficient;  // min eigenvalue <= 1e-12 * max eigenvalue: no bound is computed
};

/// G_ij = Tr (d_i D) J_0^{-1}(d_j D).
inline FisherMatrix fisher_matrix(const StatisticalModel& model, const MonotoneFunction& f) {
  MetricContext ctx(model.state(), f);
  const Index m = model.param_dim();
  RealMatrix g(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j <= i; ++j) g(i, j) = g(j, i) = fisher_info(ctx, model.tangent(i), model.tangent(j));
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(g, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(m - 1);
  return {g, lo, !(lo > kRankTol * std::max(hi, 0.0))};
}

inline RealMatrix require_inverse(const FisherMatrix& fm) {
  if (fm.rank_deficient)
    throw RankDeficient("Fisher matrix is singular (min eigenvalue " + detail::fmt(fm.min_eigenvalue) +
                        "); tangents are not independent");
  return fm.g.llt().solve(RealMatrix::Identity(fm.g.rows(), fm.g.cols()));
}

// ---------------------------------------------------------------------------
// Estimators

/// A - (Tr D_0 A) I.
inline HermitianMatrix center(const DensityMatrix& d0, const HermitianMatrix& a) {
  return a - trace_product(d0.hermitian(), a) * HermitianMatrix::identity(a.dim());
}

class EstimatorBank {
 public:
  explicit EstimatorBank(std::vector<HermitianMatrix> observables) : obs_(std::move(observables)) {
    if (obs_.empty()) throw DimensionMismatch("EstimatorBank: empty");
  }
  Index size() const { return static_cast<Index>(obs_.size()); }
  const HermitianMatrix& operator[](Index i) const { return obs_[static_cast<std::size_t>(i)]; }
  const std::vector<HermitianMatrix>& observables() const { return obs_; }

 private:
  std::vector<HermitianMatrix> obs_;
};

/// Every observable shifted so that Tr D_0 A_i = 0.
inline EstimatorBank centered(const StatisticalModel& model, const EstimatorBank& bank) {
  std::vector<HermitianMatrix> out;
  for (const auto& a : bank.observables()) out.push_back(center(model.state(), a));
  return EstimatorBank(std::move(out));
}

struct CalibrationDefect {
  double centering;    // max_i |Tr D_0 A_i|
  double calibration;  // max_ij |d_i Tr D_theta A_j - delta_ij|
};

inline CalibrationDefect calibration_defect(const StatisticalModel& model, const EstimatorBank& bank) {
  if (bank.size() != model.param_dim()) throw DimensionMismatch("EstimatorBank: one observable per parameter");
  CalibrationDefect d{0.0, 0.0};
  for (Index j = 0; j < bank.size(); ++j) {
    if (bank[j].dim() != model.dim()) throw DimensionMismatch("EstimatorBank: observable of wrong dimension");
    d.centering = std::max(d.centering, std::abs(trace_product(model.state().hermitian(), bank[j])));
    for (Index i = 0; i < model.param_dim(); ++i)
      d.calibration = std::max(d.calibration,
                               std::abs(trace_product(model.tangent(i).hermitian(), bank[j]) - (i == j ? 1.0 : 0.0)));
  }
  return d;
}

inline void require_calibrated(const StatisticalModel& model, const EstimatorBank& bank) {
  auto d = calibration_defect(model, bank);
  if (d.centering > kCenteringTol)
    throw CalibrationError("estimator bank not centered: max |Tr D0 A_i| = " + detail::fmt(d.centering), d.centering);
  if (d.calibration > kCalibrationTol)
    throw CalibrationError("estimator bank not calibrated: max |d_i Tr D A_j - delta_ij| = " +
                               detail::fmt(d.calibration), d.calibration);
}

struct ScalarCrResult {
  double variance;  // phi_0[A, A] of the centered estimator
  double bound;     // 1 / phi_0[L, L]
  double slack;     // variance - bound
  double unbiasedness_defect;
};

/// One-parameter inequality phi_0[A, A] >= 1 / phi_0[L, L]. A is centered
/// first; the derivative condition d Tr D_theta A = 1 is checked to 1e-6.
inline ScalarCrResult scalar_cr_check(const StatisticalModel& model, const HermitianMatrix& a,
                                      const MonotoneFunction& f) {
  if (model.param_dim() != 1) throw DimensionMismatch("scalar_cr_check: one-parameter model required");
  if (a.dim() != model.dim()) throw DimensionMismatch("scalar_cr_check: observable of wrong dimension");
  const HermitianMatrix ac = center(model.state(), a);
  const double defect = std::abs(trace_product(model.tangent(0).hermitian(), ac) - 1.0);
  if (defect > kUnbiasednessTol)
    throw CalibrationError("scalar_cr_check: estimator not locally unbiased (|d Tr D A - 1| = " +
                               detail::fmt(defect) + ")", defect);
  MetricContext ctx(model.state(), f);
  const double var = variance(ctx, ac);
  const double g = fisher_info(ctx, model.tangent(0));
  if (!(g > 0.0)) throw RankDeficient("scalar_cr_check: vanishing Fisher information");
  return {var, 1.0 / g, var - 1.0 / g, defect};
}

/// A = lambda J_0^{-1}(D') + c I with lambda from d Tr D_theta A = 1 and c
/// from Tr D_0 A = 0. This is the unique estimator attaining the bound.
inline HermitianMatrix optimal_estimator(const StatisticalModel& model, const MonotoneFunction& f) {
  if (model.param_dim() != 1) throw DimensionMismatch("optimal_estimator: one-parameter model required");
  const HermitianMatrix l = log_derivatives(model, f).front();
  const double slope = trace_product(model.tangent(0).hermitian(), l);
  if (!(slope > 1e-14 * std::max(1.0, l.frobenius_norm())))
    throw DomainError("optimal_estimator: degenerate tangent");
  return center(model.state(), (1.0 / slope) * l);
}

/// A_i = sum_j (G^{-1})_ij L_j: saturates the matrix bound.
inline EstimatorBank optimal_bank(const StatisticalModel& model, const MonotoneFunction& f) {
  const RealMatrix ginv = require_inverse(fisher_matrix(model, f));
  auto ls = log_derivatives(model, f);
  std::vector<HermitianMatrix> out;
  for (Index i = 0; i < model.param_dim(); ++i) {
    HermitianMatrix a = HermitianMatrix::zero(model.dim());
    for (Index j = 0; j < model.param_dim(); ++j) a = a + ginv(i, j) * ls[static_cast<std::size_t>(j)];
    out.push_back(center(model.state(), a));
  }
  return EstimatorBank(std::move(out));
}

/// Optimal bank plus seeded noise projected, in the phi_0 inner product, off
/// span{I, L_1, ..., L_m}; the result is still centered and calibrated.
inline EstimatorBank noisy_bank(const StatisticalModel& model, const MonotoneFunction& f, std::uint64_t seed,
                                double scale = 1.0) {
  MetricContext ctx(model.state(), f);
  EstimatorBank opt = optimal_bank(model, f);
  std::vector<HermitianMatrix> span{HermitianMatrix::identity(model.dim())};
  for (const auto& l : log_derivatives(model, f)) span.push_back(l);
  // orthonormalize the constraint span under phi_0
  std::vector<HermitianMatrix> q;
  for (auto v : span) {
    for (const auto& e : q) v = v - variance(ctx, e, v) * e;
    const double nv = std::sqrt(variance(ctx, v));
    if (nv > 1e-12) q.push_back((1.0 / nv) * v);
  }
  Rng rng(seed);
  std::vector<HermitianMatrix> out;
  for (Index i = 0; i < opt.size(); ++i) {
    HermitianMatrix r = random_hermitian(rng, model.dim());
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& e : q) r = r - variance(ctx, e, r) * e;
    out.push_back(opt[i] + scale * r);
  }
  return EstimatorBank(std::move(out));
}

struct MatrixCrResult {
  RealMatrix cov;    // phi_0[A_i, A_j]
  RealMatrix bound;  // G^{-1}
  double gap_min_eigenvalue;
  double gap_trace;
};

inline MatrixCrResult matrix_cr_check(const StatisticalModel& model, const EstimatorBank& bank,
                                      const MonotoneFunction& f) {
  require_calibrated(model, bank);
  MetricContext ctx(model.state(), f);
  const Index m = model.param_dim();
  MatrixCrResult r;
  r.cov.resize(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j <= i; ++j) r.cov(i, j) = r.cov(j, i) = variance(ctx, bank[i], bank[j]);
  r.bound = require_inverse(fisher_matrix(model, f));
  RealMatrix gap = r.cov - r.bound;
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(0.5 * (gap + gap.transpose()), Eigen::EigenvaluesOnly);
  r.gap_min_eigenvalue = es.eigenvalues()(0);
  r.gap_trace = gap.trace();
  return r;
}

struct BlockMatrixResult {
  RealMatrix m;                 // [[phi(A_i, A_j), phi(A_i, L_j)], [phi(L_i, A_j), phi(L_i, L_j)]]
  double min_eigenvalue;
  bool psd;                     // min eigenvalue >= -1e-9
  double off_diagonal_defect;   // max |phi(A_i, L_j) - delta_ij|
  bool implication_holds;       // psd implies the matrix bound
};

/// Assembles the block matrix entry by entry as Tr X J_0(Y).
inline BlockMatrixResult block_matrix_oracle(const StatisticalModel& model, const EstimatorBank& bank,
                                             const MonotoneFunction& f) {
  require_calibrated(model, bank);
  MetricContext ctx(model.state(), f);
  const Index m = model.param_dim();
  std::vector<HermitianMatrix> xs = bank.observables();
  for (const auto& l : log_derivatives(model, f)) xs.push_back(l);
  BlockMatrixResult r;
  r.m.resize(2 * m, 2 * m);
  for (Index j = 0; j < 2 * m; ++j) {
    const HermitianMatrix jy = apply_J(ctx, xs[static_cast<std::size_t>(j)]);
    for (Index i = 0; i < 2 * m; ++i) r.m(i, j) = trace_product(xs[static_cast<std::size_t>(i)], jy);
  }
  r.off_diagonal_defect = (r.m.topRightCorner(m, m) - RealMatrix::Identity(m, m)).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(0.5 * (r.m + r.m.transpose()), Eigen::EigenvaluesOnly);
  r.min_eigenvalue = es.eigenvalues()(0);
  r.psd = r.min_eigenvalue >= -1e-9;
  r.implication_holds = !r.psd || matrix_cr_check(model, bank, f).gap_min_eigenvalue >= -1e-9;
  return r;
}

/// Smallest eigenvalue of G_f - G_min. The minimal metric gives the smallest
/// Fisher matrix, so its inverse is the largest of the lower bounds.
inline double bound_ordering_gap(const StatisticalModel& model, const MonotoneFunction& f) {
  RealMatrix gap = fisher_matrix(model, f).g - fisher_matrix(model, MonotoneFunction::min()).g;
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(gap, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace qig
