#pragma once

// JSON codec for matrices, states, observables, channels and models.
// Matrices are {"dim": n, "data": [[re, im], ...]} in row-major order.

#include <cstdio>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qig/channel.hpp"
#include "qig/error.hpp"
#include "qig/estimation.hpp"
#include "qig/matrix_core.hpp"

namespace qig::io {

using json = nlohmann::json;

namespace detail {

inline const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  return j.at(key);
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  try {
    return need(j, key, where).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + ": bad '" + key + "': " + e.what());
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return get<T>(j, key, where);
}

inline RealVector to_vector(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
  RealVector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(where + ": expected numbers");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

}  // namespace detail

inline ComplexMatrix decode_matrix(const json& j, const std::string& where = "matrix") {
  const auto n = detail::get<Index>(j, "dim", where);
  const json& data = detail::need(j, "data", where);
  if (n < 1) throw ConfigError(where + ": dim must be positive");
  if (!data.is_array() || static_cast<Index>(data.size()) != n * n)
    throw ConfigError(where + ": data must hold dim^2 = " + std::to_string(n * n) + " entries");
  ComplexMatrix m(n, n);
  for (Index k = 0; k < n * n; ++k) {
    const json& e = data[static_cast<std::size_t>(k)];
    if (e.is_number()) {
      m(k / n, k % n) = cplx(e.get<double>(), 0.0);
    } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
      m(k / n, k % n) = cplx(e[0].get<double>(), e[1].get<double>());
    } else {
      throw ConfigError(where + ": entry " + std::to_string(k) + " must be [re, im] or a number");
    }
  }
  return m;
}

inline json encode_matrix(const ComplexMatrix& m) {
  json data = json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) data.push_back({m(i, j).real(), m(i, j).imag()});
  return {{"dim", m.rows()}, {"data", std::move(data)}};
}

inline HermitianMatrix decode_hermitian(const json& j, const std::string& where) {
  try {
    return HermitianMatrix(decode_matrix(j, where));
  } catch (const InvariantViolation& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

/// Density matrix specs:
///   {"dim", "data"}                    explicit matrix
///   {"bloch": [x1, x2, x3]}            qubit (I + x.sigma)/2
///   {"maximally_mixed": n}
///   {"random": {"dim", "seed", "floor"}}
/// NotPositive from a singular input propagates.
inline DensityMatrix decode_state(const json& j, double pd_floor = kDefaultPdFloor,
                                  const std::string& where = "state") {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  if (j.contains("bloch")) {
    RealVector x = detail::to_vector(j.at("bloch"), where + ".bloch");
    if (x.size() != 3) throw ConfigError(where + ".bloch: need three components");
    return DensityMatrix(0.5 * (pauli(0) + x(0) * pauli(1) + x(1) * pauli(2) + x(2) * pauli(3)), pd_floor);
  }
  if (j.contains("maximally_mixed")) return DensityMatrix::maximally_mixed(detail::get<Index>(j, "maximally_mixed", where));
  if (j.contains("random")) {
    const json& r = j.at("random");
    return random_density(detail::get<std::uint64_t>(r, "seed", where + ".random"),
                          detail::get<Index>(r, "dim", where + ".random"),
                          detail::get_or<double>(r, "floor", 1e-3, where + ".random"));
  }
  HermitianMatrix h = decode_hermitian(j, where);
  try {
    return DensityMatrix(std::move(h), pd_floor);
  } catch (const NotPositive&) {
    throw;
  } catch (const InvariantViolation& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

/// Observable / tangent specs:
///   {"dim", "data"}
///   {"pauli": k, "scale": s}           s sigma_k (scale defaults to 1/2)
///   {"random": {"dim", "seed"}}        seeded traceless tangent
inline HermitianMatrix decode_observable(const json& j, const std::string& where = "observable") {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  if (j.contains("pauli"))
    return detail::get_or<double>(j, "scale", 0.5, where) * pauli(detail::get<int>(j, "pauli", where));
  if (j.contains("random")) {
    const json& r = j.at("random");
    return random_tangent(detail::get<std::uint64_t>(r, "seed", where + ".random"),
                          detail::get<Index>(r, "dim", where + ".random"))
        .hermitian();
  }
  return decode_hermitian(j, where);
}

/// Channel specs, by "type": identity {dim}, depolarizing {strength},
/// partial_trace {d1, d2, keep_first}, unitary {matrix}, kraus {operators},
/// random {in, out, env, seed}.
inline Channel decode_channel(const json& j, const std::string& where = "channel") {
  const auto type = detail::get<std::string>(j, "type", where);
  if (type == "identity") return Channel::identity(detail::get<Index>(j, "dim", where));
  if (type == "depolarizing") return Channel::depolarizing(detail::get<double>(j, "strength", where));
  if (type == "partial_trace")
    return Channel::partial_trace(detail::get<Index>(j, "d1", where), detail::get<Index>(j, "d2", where),
                                  detail::get_or<bool>(j, "keep_first", true, where));
  if (type == "unitary") return Channel::unitary(decode_matrix(detail::need(j, "matrix", where), where + ".matrix"));
  if (type == "kraus") {
    std::vector<ComplexMatrix> ks;
    for (const auto& k : detail::need(j, "operators", where)) ks.push_back(decode_matrix(k, where + ".operators"));
    return Channel(std::move(ks));
  }
  if (type == "random")
    return random_channel(detail::get<std::uint64_t>(j, "seed", where), detail::get<Index>(j, "in", where),
                          detail::get<Index>(j, "out", where), detail::get<Index>(j, "env", where));
  throw ConfigError(where + ": unknown channel type '" + type + "'");
}

/// Model specs, by "type":
///   bloch_radial {r}
///   bloch_full {x: [3], axes: [..]}
///   random_affine {dim, params, seed, floor}
///   gibbs {hamiltonian, beta0, directions: [..], step, richardson}
///   coefficients {dim, params, offset, linear, terms, floor, step, richardson}
inline StatisticalModel decode_model(const json& j, const std::string& where = "model") {
  const auto type = detail::get<std::string>(j, "type", where);
  DerivativeOptions opt;
  opt.step = detail::get_or<double>(j, "step", kModelStep, where);
  opt.richardson = detail::get_or<bool>(j, "richardson", false, where);
  if (type == "bloch_radial") return bloch_radial_model(detail::get<double>(j, "r", where));
  if (type == "bloch_full") {
    RealVector x = detail::to_vector(detail::need(j, "x", where), where + ".x");
    if (x.size() != 3) throw ConfigError(where + ".x: need three components");
    auto axes = detail::get_or<std::vector<int>>(j, "axes", {1, 2, 3}, where);
    return bloch_full_model(Eigen::Vector3d(x(0), x(1), x(2)), axes);
  }
  if (type == "random_affine")
    return random_affine_model(detail::get<std::uint64_t>(j, "seed", where), detail::get<Index>(j, "dim", where),
                               detail::get<Index>(j, "params", where),
                               detail::get_or<double>(j, "floor", 0.02, where));
  if (type == "gibbs") {
    HermitianMatrix h = decode_observable(detail::need(j, "hamiltonian", where), where + ".hamiltonian");
    std::vector<HermitianMatrix> dirs;
    if (j.contains("directions"))
      for (const auto& d : j.at("directions")) dirs.push_back(decode_observable(d, where + ".directions"));
    return gibbs_model(h, detail::get<double>(j, "beta0", where), dirs, opt);
  }
  if (type == "coefficients") {
    const auto n = detail::get<Index>(j, "dim", where);
    const auto m = detail::get<Index>(j, "params", where);
    CoefficientMap c;
    c.offset = detail::to_vector(detail::need(j, "offset", where), where + ".offset");
    if (j.contains("linear")) {
      const json& rows = j.at("linear");
      if (!rows.is_array()) throw ConfigError(where + ".linear: expected rows");
      c.linear = RealMatrix::Zero(static_cast<Index>(rows.size()), m);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        RealVector row = detail::to_vector(rows[r], where + ".linear");
        if (row.size() != m) throw ConfigError(where + ".linear: each row needs params entries");
        c.linear.row(static_cast<Index>(r)) = row.transpose();
      }
    }
    if (j.contains("terms"))
      for (const auto& t : j.at("terms"))
        c.terms.push_back({detail::get<Index>(t, "coefficient", where + ".terms"),
                           detail::get<double>(t, "weight", where + ".terms"),
                           detail::get<std::vector<int>>(t, "powers", where + ".terms")});
    return coefficient_model(n, m, std::move(c), detail::get_or<double>(j, "floor", kDefaultPdFloor, where), opt);
  }
  throw ConfigError(where + ": unknown model type '" + type + "'");
}

/// %.17g: round-trips every double.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace qig::io
