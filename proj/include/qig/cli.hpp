#pragma once

// Batch commands behind the qig binary. Each command takes a JSON config and
// returns a Report: uniform rows (every row carries the tolerance it was
// judged by), a summary, and an overall verdict. Output is a pure function of
// the config, so identical configs give byte-identical files.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "qig/channel.hpp"
#include "qig/divergence.hpp"
#include "qig/estimation.hpp"
#include "qig/geometry.hpp"
#include "qig/io.hpp"
#include "qig/metric.hpp"
#include "qig/monotone.hpp"

namespace qig::cli {

using json = nlohmann::json;

inline constexpr const char* kVersion = "qig 0.1.0";

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides config "seed"
  unsigned threads = 1;
};

struct Report {
  std::string command;
  json config;                       // as run, with defaults and the effective seed filled in
  std::vector<std::string> columns;  // CSV header; every row has exactly these keys
  std::vector<json> rows;
  json summary;
  bool passed = true;
};

namespace detail {

using io::detail::get;
using io::detail::get_or;

// null for non-finite values; nlohmann would emit null anyway, this keeps
// the JSON and CSV paths symmetric.
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json flat(const RealMatrix& m) {
  json a = json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) a.push_back(num(m(i, j)));
  return a;
}

inline json flat(const RealVector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

inline std::vector<MonotoneFunction> functions(json& cfg, const char* key = "functions") {
  if (!cfg.contains(key)) cfg[key] = "catalog";
  const json& j = cfg.at(key);
  if (j.is_string() && j.get<std::string>() == "catalog") return catalog();
  if (j.is_string()) return {MonotoneFunction::parse(j.get<std::string>())};
  if (!j.is_array() || j.empty()) throw ConfigError(std::string(key) + ": expected \"catalog\" or a list of specs");
  std::vector<MonotoneFunction> out;
  for (const auto& s : j) {
    if (!s.is_string()) throw ConfigError(std::string(key) + ": specs must be strings");
    out.push_back(MonotoneFunction::parse(s.get<std::string>()));
  }
  return out;
}

inline std::uint64_t seed_of(json& cfg, const RunOptions& opt) {
  if (opt.seed) cfg["seed"] = *opt.seed;
  if (!cfg.contains("seed")) cfg["seed"] = 0;
  return get<std::uint64_t>(cfg, "seed", "config");
}

// Runs body(i) for i in [0, n); results land in caller-owned slots, so the
// output order never depends on scheduling. The first exception is rethrown.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += threads) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// fisher: F_D(A) and phi_D[A] per (case, f), with the min/max envelope as the verdict.

inline constexpr double kEnvelopeTol = 1e-12;

inline Report cmd_fisher(json cfg, const RunOptions& opt) {
  Report r{"fisher", {}, {"case", "f", "state", "observable", "fisher_info", "variance", "tolerance", "pass"}, {}, {}};
  detail::seed_of(cfg, opt);
  const auto fs = detail::functions(cfg);
  const json& cases = io::detail::need(cfg, "cases", "fisher");
  if (!cases.is_array() || cases.empty()) throw ConfigError("fisher: cases must be a non-empty list");
  int violations = 0;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const std::string where = "cases[" + std::to_string(c) + "]";
    const json& sj = io::detail::need(cases[c], "state", where);
    const json& aj = io::detail::need(cases[c], "observable", where);
    const DensityMatrix d = io::decode_state(sj, kDefaultPdFloor, where + ".state");
    const HermitianMatrix a = io::decode_observable(aj, where + ".observable");
    if (a.dim() != d.dim()) throw DimensionMismatch(where + ": state and observable dimensions differ");
    // min gives the smallest metric and the largest variance, max the reverse
    MetricContext lo(d, MonotoneFunction::min()), hi(d, MonotoneFunction::max());
    const double f_lo = fisher_info(lo, a), f_hi = fisher_info(hi, a);
    const double v_lo = variance(hi, a), v_hi = variance(lo, a);
    for (const auto& f : fs) {
      MetricContext ctx(d, f);
      const double fi = fisher_info(ctx, a), var = variance(ctx, a);
      const double tol = kEnvelopeTol * std::max({1.0, std::abs(f_hi), std::abs(v_hi)});
      const bool pass = fi >= f_lo - tol && fi <= f_hi + tol && var >= v_lo - tol && var <= v_hi + tol;
      if (!pass) ++violations;
      r.rows.push_back({{"case", c}, {"f", f.name()}, {"state", sj.dump()}, {"observable", aj.dump()},
                        {"fisher_info", detail::num(fi)}, {"variance", detail::num(var)},
                        {"tolerance", tol}, {"pass", pass}});
    }
  }
  r.passed = violations == 0;
  r.summary = {{"cases", cases.size()}, {"rows", r.rows.size()}, {"envelope_violations", violations}};
  r.config = std::move(cfg);
  return r;
}

// ---------------------------------------------------------------------------
// crbound: covariance vs G^{-1} and the block-matrix oracle, per f.

inline constexpr double kGapTol = 1e-9;

inline Report cmd_crbound(json cfg, const RunOptions& opt) {
  Report r{"crbound",
           {},
           {"f", "estimator", "params", "centering_defect", "calibration_defect", "covariance", "fisher", "bound",
            "gap_spectrum", "gap_min_eigenvalue", "gap_trace", "block_min_eigenvalue", "block_psd",
            "block_off_diagonal_defect", "scalar_bound", "scalar_slack", "tolerance", "error", "pass"},
           {},
           {}};
  const std::uint64_t seed = detail::seed_of(cfg, opt);
  const auto fs = detail::functions(cfg);
  const StatisticalModel model = io::decode_model(io::detail::need(cfg, "model", "crbound"), "model");
  if (!cfg.contains("estimator")) cfg["estimator"] = "optimal";
  const json est = cfg.at("estimator");
  const double scale = detail::get_or<double>(cfg, "noise_scale", 1.0, "crbound");
  std::optional<EstimatorBank> user_bank;
  std::string est_name;
  if (est.is_object()) {
    std::vector<HermitianMatrix> obs;
    for (const auto& a : io::detail::need(est, "bank", "estimator")) obs.push_back(io::decode_observable(a, "estimator.bank"));
    user_bank = EstimatorBank(std::move(obs));
    est_name = "user";
  } else if (est == "optimal" || est == "noisy") {
    est_name = est.get<std::string>();
  } else {
    throw ConfigError("crbound: estimator must be \"optimal\", \"noisy\" or {\"bank\": [...]}");
  }
  const Index m = model.param_dim();
  int failures = 0;
  for (std::size_t k = 0; k < fs.size(); ++k) {
    const auto& f = fs[k];
    const EstimatorBank bank = user_bank ? *user_bank
                               : est_name == "optimal" ? optimal_bank(model, f)
                                                       : noisy_bank(model, f, derive_seed(seed, k), scale);
    json row = {{"f", f.name()}, {"estimator", est_name}, {"params", m}, {"tolerance", kGapTol}, {"error", ""}};
    for (const char* c : {"covariance", "fisher", "bound", "gap_spectrum", "gap_min_eigenvalue", "gap_trace",
                          "block_min_eigenvalue", "block_psd", "block_off_diagonal_defect", "scalar_bound",
                          "scalar_slack"})
      row[c] = nullptr;
    const CalibrationDefect def = calibration_defect(model, bank);
    row["centering_defect"] = def.centering;
    row["calibration_defect"] = def.calibration;
    bool pass = false;
    try {
      const FisherMatrix fm = fisher_matrix(model, f);
      const MatrixCrResult cr = matrix_cr_check(model, bank, f);
      const BlockMatrixResult bm = block_matrix_oracle(model, bank, f);
      RealMatrix gap = cr.cov - cr.bound;
      Eigen::SelfAdjointEigenSolver<RealMatrix> es(0.5 * (gap + gap.transpose()), Eigen::EigenvaluesOnly);
      row["covariance"] = detail::flat(cr.cov);
      row["fisher"] = detail::flat(fm.g);
      row["bound"] = detail::flat(cr.bound);
      row["gap_spectrum"] = detail::flat(RealVector(es.eigenvalues()));
      row["gap_min_eigenvalue"] = cr.gap_min_eigenvalue;
      row["gap_trace"] = cr.gap_trace;
      row["block_min_eigenvalue"] = bm.min_eigenvalue;
      row["block_psd"] = bm.psd;
      row["block_off_diagonal_defect"] = bm.off_diagonal_defect;
      if (m == 1) {
        const ScalarCrResult sc = scalar_cr_check(model, bank[0], f);
        row["scalar_bound"] = sc.bound;
        row["scalar_slack"] = sc.slack;
      }
      pass = cr.gap_min_eigenvalue >= -kGapTol && bm.psd;
    } catch (const CalibrationError& e) {
      row["error"] = e.what();
    }
    if (!pass) ++failures;
    row["pass"] = pass;
    r.rows.push_back(std::move(row));
  }
  r.passed = failures == 0;
  r.summary = {{"model", model.name()}, {"params", m}, {"rows", r.rows.size()}, {"failures", failures}};
  r.config = std::move(cfg);
  return r;
}

// ---------------------------------------------------------------------------
// monotonicity: seeded (D, A, channel, f) cases, identity controls, and
// optionally the n^2 x n^2 operator-inequality gaps.

inline constexpr double kMarginTol = 1e-9;
inline constexpr double kOperatorGapTol = 1e-8;

inline Report cmd_monotonicity(json cfg, const RunOptions& opt) {
  Report r{"monotonicity",
           {},
           {"case", "kind", "f", "seed", "n_in", "n_out", "env", "lhs", "rhs", "margin", "floored", "skipped",
            "tolerance", "pass"},
           {},
           {}};
  const std::uint64_t master = detail::seed_of(cfg, opt);
  const auto fs = detail::functions(cfg);
  if (!cfg.contains("cases")) cfg["cases"] = 1000;
  if (!cfg.contains("dims")) cfg["dims"] = {2, 3, 4};
  if (!cfg.contains("floor")) cfg["floor"] = 1e-3;
  if (!cfg.contains("controls")) cfg["controls"] = true;
  if (!cfg.contains("superoperator")) cfg["superoperator"] = false;
  const auto cases = detail::get<std::size_t>(cfg, "cases", "monotonicity");
  const auto dims = detail::get<std::vector<Index>>(cfg, "dims", "monotonicity");
  const auto floor = detail::get<double>(cfg, "floor", "monotonicity");
  if (dims.empty()) throw ConfigError("monotonicity: dims must be non-empty");
  for (Index n : dims)
    if (n < 2) throw ConfigError("monotonicity: dims must be >= 2");

  auto row = [](std::size_t c, const char* kind, const MonotoneFunction& f, std::uint64_t seed, Index ni, Index no,
                Index env) {
    return json{{"case", c}, {"kind", kind}, {"f", f.name()}, {"seed", seed}, {"n_in", ni}, {"n_out", no},
                {"env", env}, {"lhs", nullptr}, {"rhs", nullptr}, {"margin", nullptr}, {"floored", false},
                {"skipped", false}, {"tolerance", kMarginTol}, {"pass", true}};
  };

  std::vector<std::array<json, 2>> slots(cases);
  detail::parallel_for(cases, opt.threads, [&](std::size_t c) {
    const std::uint64_t s = derive_seed(master, c);
    Rng rng(s);
    const Index ni = dims[rng.next() % dims.size()], no = dims[rng.next() % dims.size()];
    const Index env = (ni + no - 1) / no + Index(rng.next() % 2);
    const MonotoneFunction& f = fs[c % fs.size()];
    json fr = row(c, "fisher", f, s, ni, no, env), vr = row(c, "variance", f, s, ni, no, env);
    try {
      const Channel ch = random_channel(derive_seed(s, 0), ni, no, env);
      const DensityMatrix d = random_density(derive_seed(s, 1), ni, floor);
      const auto fp = probe_fisher_monotonicity(d, random_tangent(derive_seed(s, 2), ni), f, ch);
      const auto vp = probe_variance_monotonicity(d, random_hermitian(derive_seed(s, 3), no), f, ch);
      fr.update({{"lhs", fp.upstream}, {"rhs", fp.downstream}, {"margin", fp.margin}, {"floored", fp.floored},
                 {"pass", fp.margin >= -kMarginTol}});
      vr.update({{"lhs", vp.rhs}, {"rhs", vp.lhs}, {"margin", vp.margin}, {"floored", vp.floored},
                 {"pass", vp.margin >= -kMarginTol}});
    } catch (const NotPositive&) {
      fr["skipped"] = vr["skipped"] = true;
    }
    slots[c] = {std::move(fr), std::move(vr)};
  });
  for (auto& s : slots)
    for (auto& j : s) r.rows.push_back(std::move(j));

  std::size_t next = cases;
  if (cfg.at("controls").get<bool>()) {
    for (std::size_t k = 0; k < fs.size(); ++k, ++next) {
      const std::uint64_t s = derive_seed(master, next);
      const Index n = dims[k % dims.size()];
      const DensityMatrix d = random_density(derive_seed(s, 1), n, floor);
      const Channel id = Channel::identity(n);
      const auto fp = probe_fisher_monotonicity(d, random_tangent(derive_seed(s, 2), n), fs[k], id);
      const auto vp = probe_variance_monotonicity(d, random_hermitian(derive_seed(s, 3), n), fs[k], id);
      json fr = row(next, "control_fisher", fs[k], s, n, n, 1), vr = row(next, "control_variance", fs[k], s, n, n, 1);
      // equality up to roundoff, so the control is judged on |margin|
      fr.update({{"lhs", fp.upstream}, {"rhs", fp.downstream}, {"margin", fp.margin}, {"floored", fp.floored},
                 {"pass", std::abs(fp.margin) <= kMarginTol}});
      vr.update({{"lhs", vp.rhs}, {"rhs", vp.lhs}, {"margin", vp.margin}, {"floored", vp.floored},
                 {"pass", std::abs(vp.margin) <= kMarginTol}});
      r.rows.push_back(std::move(fr));
      r.rows.push_back(std::move(vr));
    }
  }
  if (cfg.at("superoperator").get<bool>()) {
    for (Index ni : {2, 3})
      for (Index no : {2, 3})
        for (const auto& f : fs) {
          const std::uint64_t s = derive_seed(master, next++);
          const Index env = (ni + no - 1) / no + 1;
          const auto gap = superoperator_gap(random_density(derive_seed(s, 1), ni, floor), f,
                                             random_channel(derive_seed(s, 0), ni, no, env));
          for (auto [kind, v] : {std::pair{"operator_fisher", gap.fisher_min_eigenvalue},
                                 std::pair{"operator_variance", gap.variance_min_eigenvalue}}) {
            json j = row(next - 1, kind, f, s, ni, no, env);
            j.update({{"margin", v}, {"tolerance", kOperatorGapTol}, {"pass", v >= -kOperatorGapTol}});
            r.rows.push_back(std::move(j));
          }
        }
  }

  double min_margin = std::numeric_limits<double>::infinity();
  std::size_t violations = 0, skipped = 0, floored = 0;
  for (const auto& j : r.rows) {
    if (j.at("skipped").get<bool>()) {
      ++skipped;
      continue;
    }
    if (!j.at("pass").get<bool>()) ++violations;
    if (j.at("floored").get<bool>()) ++floored;
    const std::string kind = j.at("kind");
    if (kind == "fisher" || kind == "variance") min_margin = std::min(min_margin, j.at("margin").get<double>());
  }
  r.passed = violations == 0;
  r.summary = {{"cases", cases},          {"rows", r.rows.size()}, {"min_margin", detail::num(min_margin)},
               {"violations", violations}, {"skipped", skipped},     {"floored", floored}};
  r.config = std::move(cfg);
  return r;
}

// ---------------------------------------------------------------------------
// curvature: Gibbs scans ("gibbs") or scalar curvature at a list of states ("points").

inline std::vector<double> beta_grid(json& cfg) {
  if (!cfg.contains("beta")) cfg["beta"] = {{"start", 0.0}, {"stop", 3.0}, {"count", 31}};
  const json& b = cfg.at("beta");
  if (b.is_array()) return b.get<std::vector<double>>();
  const double lo = detail::get<double>(b, "start", "beta"), hi = detail::get<double>(b, "stop", "beta");
  const int n = detail::get<int>(b, "count", "beta");
  if (n < 2 || !(hi > lo)) throw ConfigError("beta: need count >= 2 and stop > start");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) g[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (n - 1);
  return g;
}

inline HermitianMatrix normalized_traceless(const HermitianMatrix& h) {
  const HermitianMatrix t = traceless_part(h);
  const double nrm = t.frobenius_norm();
  if (!(nrm > 0.0)) throw ConfigError("hamiltonian: traceless part vanishes");
  return (1.0 / nrm) * t;
}

inline Report curvature_gibbs(json cfg, const RunOptions& opt, std::uint64_t master) {
  Report r{"curvature",
           {},
           {"scan", "dim", "beta", "lambda_min", "scalar_curvature", "raw_curvature", "error_gauge", "fd_step",
            "flagged", "skipped", "rise", "allowance", "tolerance", "pass"},
           {},
           {}};
  if (!cfg.contains("function")) cfg["function"] = "km";
  if (!cfg.contains("normalize")) cfg["normalize"] = false;
  if (!cfg.contains("step")) cfg["step"] = kCurvatureStep;
  const auto f = MonotoneFunction::parse(detail::get<std::string>(cfg, "function", "curvature"));
  const bool normalize = cfg.at("normalize").get<bool>();
  const double step = detail::get<double>(cfg, "step", "curvature");
  const auto grid = beta_grid(cfg);

  std::vector<HermitianMatrix> hs;
  if (cfg.contains("hamiltonian")) hs.push_back(io::decode_observable(cfg.at("hamiltonian"), "hamiltonian"));
  if (cfg.contains("hamiltonians"))
    for (const auto& h : cfg.at("hamiltonians")) hs.push_back(io::decode_observable(h, "hamiltonians"));
  // {"dim": n, "count": k}: traceless Gaussian draws, always normalized
  std::vector<bool> force_norm(hs.size(), false);
  if (cfg.contains("random_hamiltonians"))
    for (const auto& g : cfg.at("random_hamiltonians")) {
      const auto n = detail::get<Index>(g, "dim", "random_hamiltonians");
      const auto count = detail::get<std::size_t>(g, "count", "random_hamiltonians");
      for (std::size_t k = 0; k < count; ++k) {
        hs.push_back(random_hermitian(derive_seed(master, hs.size()), n));
        force_norm.push_back(true);
      }
    }
  if (hs.empty()) throw ConfigError("curvature: gibbs mode needs hamiltonian, hamiltonians or random_hamiltonians");
  for (std::size_t k = 0; k < hs.size(); ++k)
    if (normalize || force_norm[k]) hs[k] = normalized_traceless(hs[k]);

  std::vector<GibbsScan> scans(hs.size());
  detail::parallel_for(hs.size(), opt.threads, [&](std::size_t k) { scans[k] = gibbs_scan(hs[k], f, grid, step); });

  std::size_t violations = 0, skipped = 0, flagged = 0;
  double worst = -std::numeric_limits<double>::infinity();
  json failing = json::array();
  for (std::size_t k = 0; k < scans.size(); ++k) {
    const auto& scan = scans[k];
    worst = std::max(worst, scan.worst_excess);
    for (std::size_t i = 0; i < scan.rows.size(); ++i) {
      const auto& row = scan.rows[i];
      const bool violated = std::find(scan.violations.begin(), scan.violations.end(), i) != scan.violations.end();
      json j = {{"scan", k},
                {"dim", hs[k].dim()},
                {"beta", row.beta},
                {"lambda_min", gibbs_density(hs[k], row.beta).min_eigenvalue()},
                {"skipped", row.skipped},
                {"rise", detail::num(row.rise)},
                {"allowance", detail::num(row.allowance)},
                {"tolerance", detail::num(row.allowance)},
                {"pass", !violated}};
      if (row.skipped) {
        ++skipped;
        for (const char* c : {"scalar_curvature", "raw_curvature", "error_gauge", "fd_step"}) j[c] = nullptr;
        j["flagged"] = false;
      } else {
        j.update({{"scalar_curvature", row.report.richardson_estimate},
                  {"raw_curvature", row.report.scalar_curvature},
                  {"error_gauge", row.report.error_gauge},
                  {"fd_step", row.report.fd_step},
                  {"flagged", row.report.flagged}});
        if (row.report.flagged) ++flagged;
      }
      if (violated) {
        ++violations;
        failing.push_back({{"scan", k}, {"beta", row.beta}, {"rise", row.rise}, {"allowance", row.allowance},
                           {"hamiltonian", io::encode_matrix(hs[k].matrix())}});
      }
      r.rows.push_back(std::move(j));
    }
  }
  r.passed = violations == 0;
  r.summary = {{"mode", "gibbs"},      {"f", f.name()},          {"scans", scans.size()},
               {"rows", r.rows.size()}, {"violations", violations}, {"worst_excess", detail::num(worst)},
               {"skipped", skipped},    {"flagged", flagged},       {"monotone_decreasing", violations == 0},
               {"violation_context", failing}};
  r.config = std::move(cfg);
  return r;
}

inline Report curvature_points(json cfg, std::uint64_t master) {
  Report r{"curvature",
           {},
           {"point", "dim", "lambda_min", "scalar_curvature", "raw_curvature", "error_gauge", "fd_step", "flagged",
            "expected", "tolerance", "pass"},
           {},
           {}};
  if (!cfg.contains("function")) cfg["function"] = "min";
  if (!cfg.contains("step")) cfg["step"] = kCurvatureStep;
  const auto f = MonotoneFunction::parse(detail::get<std::string>(cfg, "function", "curvature"));
  const auto n = detail::get<Index>(cfg, "dim", "curvature");
  const double step = detail::get<double>(cfg, "step", "curvature");
  const Chart chart(n, 0.0);

  std::vector<DensityMatrix> states;
  const json& pts = io::detail::need(cfg, "points", "curvature");
  if (pts.is_object() && pts.contains("random")) {
    const json& g = pts.at("random");
    const auto count = detail::get<std::size_t>(g, "count", "points.random");
    const double floor = detail::get_or<double>(g, "floor", 0.1, "points.random");
    for (std::size_t k = 0; k < count; ++k) states.push_back(random_density(derive_seed(master, k), n, floor));
  } else if (pts.is_array()) {
    for (const auto& p : pts) states.push_back(io::decode_state(p, kDefaultPdFloor, "points"));
  } else {
    throw ConfigError("curvature: points must be a list of states or {\"random\": {...}}");
  }

  std::optional<double> expect, tol;
  if (cfg.contains("expect")) {
    expect = detail::get<double>(cfg.at("expect"), "value", "expect");
    tol = detail::get<double>(cfg.at("expect"), "tolerance", "expect");
  }
  std::size_t failures = 0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const DensityMatrix& d = states[k];
    if (d.dim() != n) throw DimensionMismatch("curvature: point of wrong dimension");
    const RealVector x = chart.coordinates(d);
    const CurvatureReport rep = scalar_curvature(chart, f, x, adapted_step(d.min_eigenvalue(), step));
    bool pass = !rep.flagged;
    if (expect) pass = pass && std::abs(rep.richardson_estimate - *expect) <= *tol;
    if (!pass) ++failures;
    lo = std::min(lo, rep.richardson_estimate);
    hi = std::max(hi, rep.richardson_estimate);
    r.rows.push_back({{"point", k},
                      {"dim", n},
                      {"lambda_min", d.min_eigenvalue()},
                      {"scalar_curvature", rep.richardson_estimate},
                      {"raw_curvature", rep.scalar_curvature},
                      {"error_gauge", rep.error_gauge},
                      {"fd_step", rep.fd_step},
                      {"flagged", rep.flagged},
                      {"expected", expect ? json(*expect) : json(nullptr)},
                      {"tolerance", tol ? json(*tol) : json(nullptr)},
                      {"pass", pass}});
  }
  r.passed = failures == 0;
  r.summary = {{"mode", "points"}, {"f", f.name()}, {"rows", r.rows.size()},
               {"min", detail::num(lo)}, {"max", detail::num(hi)}, {"failures", failures}};
  r.config = std::move(cfg);
  return r;
}

inline Report cmd_curvature(json cfg, const RunOptions& opt) {
  const std::uint64_t master = detail::seed_of(cfg, opt);
  if (!cfg.contains("mode")) cfg["mode"] = "gibbs";
  const auto mode = detail::get<std::string>(cfg, "mode", "curvature");
  if (mode == "gibbs") return curvature_gibbs(std::move(cfg), opt, master);
  if (mode == "points") return curvature_points(std::move(cfg), master);
  throw ConfigError("curvature: mode must be \"gibbs\" or \"points\"");
}

// ---------------------------------------------------------------------------
// divergence: S_alpha closed form vs the quasi-entropy sum, and the kernel
// bridge against f_beta on a log grid.

inline constexpr double kDivergenceTol = 1e-10;

inline Report cmd_divergence(json cfg, const RunOptions& opt) {
  Report r{"divergence",
           {},
           {"kind", "pair", "alpha", "t", "value", "reference", "abs_diff", "tolerance", "pass"},
           {},
           {}};
  detail::seed_of(cfg, opt);
  if (!cfg.contains("alphas")) cfg["alphas"] = {-0.6, -0.2, 0.0, 0.4, 0.8};
  if (!cfg.contains("bridge")) cfg["bridge"] = {{"lo", 1e-4}, {"hi", 1e4}, {"points", 100}};
  if (!cfg.contains("pairs")) cfg["pairs"] = json::array();
  const auto alphas = detail::get<std::vector<double>>(cfg, "alphas", "divergence");
  int failures = 0;
  auto push = [&](const char* kind, json pair, double a, json t, double value, double ref, double tol) {
    const double diff = std::abs(value - ref);
    const bool pass = diff <= tol;
    if (!pass) ++failures;
    r.rows.push_back({{"kind", kind}, {"pair", std::move(pair)}, {"alpha", a}, {"t", std::move(t)},
                      {"value", detail::num(value)}, {"reference", detail::num(ref)}, {"abs_diff", detail::num(diff)},
                      {"tolerance", tol}, {"pass", pass}});
  };
  const json& pairs = cfg.at("pairs");
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const std::string where = "pairs[" + std::to_string(p) + "]";
    const DensityMatrix d1 = io::decode_state(io::detail::need(pairs[p], "d1", where), kDefaultPdFloor, where + ".d1");
    const DensityMatrix d2 = io::decode_state(io::detail::need(pairs[p], "d2", where), kDefaultPdFloor, where + ".d2");
    for (double a : alphas)
      push("entropy", p, a, nullptr, alpha_entropy(d1, d2, a), quasi_entropy(d1, d2, ContrastKernel::alpha(a)),
           kDivergenceTol);
  }
  const json& b = cfg.at("bridge");
  if (!b.is_null()) {
    const auto grid = log_grid(detail::get<double>(b, "lo", "bridge"), detail::get<double>(b, "hi", "bridge"),
                               detail::get<int>(b, "points", "bridge"));
    for (double a : alphas) {
      const auto k = ContrastKernel::alpha(a);
      for (double t : grid)
        push("bridge", nullptr, a, t, ruskai_bridge(k, t), f_beta(k.beta(), t), kDivergenceTol * std::max(1.0, t));
    }
  }
  r.passed = failures == 0;
  r.summary = {{"pairs", pairs.size()}, {"rows", r.rows.size()}, {"failures", failures}};
  r.config = std::move(cfg);
  return r;
}

// ---------------------------------------------------------------------------

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"fisher", "crbound", "monotonicity", "curvature", "divergence"};
  return names;
}

inline Report run(const std::string& command, json cfg, const RunOptions& opt = {}) {
  if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
  if (cfg.contains("command") && cfg.at("command") != command)
    throw ConfigError("config is for command '" + cfg.at("command").dump() + "', not '" + command + "'");
  cfg["command"] = command;
  if (command == "fisher") return cmd_fisher(std::move(cfg), opt);
  if (command == "crbound") return cmd_crbound(std::move(cfg), opt);
  if (command == "monotonicity") return cmd_monotonicity(std::move(cfg), opt);
  if (command == "curvature") return cmd_curvature(std::move(cfg), opt);
  if (command == "divergence") return cmd_divergence(std::move(cfg), opt);
  throw ConfigError("unknown command '" + command + "'");
}

inline int exit_code(const Report& r) { return r.passed ? 0 : 2; }

inline std::string to_json(const Report& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json ordered = json::object();
    for (const auto& c : r.columns) ordered[c] = row.at(c);
    rows.push_back(std::move(ordered));
  }
  json out = {{"version", kVersion},
              {"config_echo", r.config},
              {"rows", std::move(rows)},
              {"summary", r.summary},
              {"passed", r.passed}};
  return out.dump(2) + "\n";
}

namespace detail {

inline std::string csv_cell(const json& v) {
  switch (v.type()) {
    case json::value_t::null: return "";
    case json::value_t::boolean: return v.get<bool>() ? "true" : "false";
    case json::value_t::number_float: return io::format_number(v.get<double>());
    case json::value_t::number_integer:
    case json::value_t::number_unsigned: return v.dump();
    case json::value_t::array: {
      std::string s;
      for (const auto& e : v) s += (s.empty() ? "" : " ") + csv_cell(e);
      return s;
    }
    default: {
      std::string s = v.is_string() ? v.get<std::string>() : v.dump();
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string q = "\"";
      for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      return q + "\"";
    }
  }
}

}  // namespace detail

/// Header row, then one line per row; reals as %.17g.
inline std::string to_csv(const Report& r) {
  std::ostringstream os;
  for (std::size_t i = 0; i < r.columns.size(); ++i) os << (i ? "," : "") << r.columns[i];
  os << '\n';
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < r.columns.size(); ++i) os << (i ? "," : "") << detail::csv_cell(row.at(r.columns[i]));
    os << '\n';
  }
  return os.str();
}

}  // namespace qig::cli
