#pragma once

// JSON experiment configuration. Complex numbers are [re, im] pairs; unknown
// keys are rejected with the JSON path of the offending entry.

#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nlqd/dynamics.hpp"
#include "nlqd/hilbert.hpp"
#include "nlqd/protocols.hpp"

namespace nlqd {

using nlohmann::json;

namespace config_detail {

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

[[noreturn]] inline void fail(const std::string& path, const std::string& msg) {
  throw ConfigError((path.empty() ? std::string("<root>") : path) + ": " + msg);
}

inline void expect_object(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) fail(join(path, key), "unknown key");
}

inline const json& require(const json& j, const std::string& path, const std::string& key) {
  if (!j.contains(key)) fail(join(path, key), "missing required key");
  return j.at(key);
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

inline double number_or(const json& j, const std::string& path, const std::string& key, double fallback) {
  return j.contains(key) ? number(j.at(key), join(path, key)) : fallback;
}

inline std::size_t count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) fail(path, "expected a non-negative integer");
  return j.get<std::size_t>();
}

inline Complex complex_value(const json& j, const std::string& path) {
  if (j.is_number()) return {number(j, path), 0.0};
  if (!j.is_array() || j.size() != 2) fail(path, "expected a complex number as [re, im]");
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
}

inline json complex_json(Complex c) { return json::array({c.real(), c.imag()}); }

inline CVector complex_vector(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of [re, im] pairs");
  CVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = complex_value(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

inline HermitianMatrix hermitian(const json& j, const std::string& path, std::size_t dim) {
  if (!j.is_array() || j.size() != dim) fail(path, "expected a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
  CMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < dim; ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != dim) fail(rp, "matrix row has the wrong length");
    for (std::size_t c = 0; c < dim; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          complex_value(j[r][c], rp + "[" + std::to_string(c) + "]");
  }
  try {
    return HermitianMatrix(std::move(m));
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

inline json matrix_json(const HermitianMatrix& h) {
  json rows = json::array();
  for (std::size_t r = 0; r < h.dim(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < h.dim(); ++c) row.push_back(complex_json(h(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Splits "a.b.0.c" into segments.
inline std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : path) {
    if (ch == '.') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace config_detail

/// Locates the scalar addressed by a dotted path ("system.qubit.c.0").
inline json& scalar_at(json& root, const std::string& path) {
  json* node = &root;
  std::string walked;
  for (const auto& seg : config_detail::split_path(path)) {
    walked = config_detail::join(walked, seg);
    if (seg.empty()) throw ConfigError(path + ": empty path segment");
    if (node->is_object()) {
      if (!node->contains(seg)) throw ConfigError(walked + ": no such key");
      node = &(*node)[seg];
    } else if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(seg);
      } catch (const std::exception&) {
        throw ConfigError(walked + ": expected an array index");
      }
      if (idx >= node->size()) throw ConfigError(walked + ": index out of range");
      node = &(*node)[idx];
    } else {
      throw ConfigError(walked + ": path descends into a scalar");
    }
  }
  if (!node->is_number()) throw ConfigError(path + ": axis must address a numeric scalar");
  return *node;
}

struct ProtocolSpec {
  enum class Kind { ObservableChoice, MeasureOrNot, Intervention };
  Kind kind;
  std::optional<Projector> x;
  std::optional<Projector> x_prime;
  std::optional<HamiltonianPair> h_prime;
  Projector observable;
  double threshold = 0.02;
};

struct ChaosSpec {
  enum class Perturbation { None, State, Parameter };
  Perturbation perturbation = Perturbation::None;
  std::optional<StateVector> partner;
  std::string parameter_path;
  double parameter_offset = 0.0;
  std::optional<double> t_max;
  double epsilon_shift = 0.0;
};

/// A parsed, validated experiment. `source` is the normalized JSON (defaults
/// filled in) and re-parses to an identical experiment.
struct ExperimentConfig {
  json source;
  BipartiteShape shape{2, 2};
  HamiltonianPair h{HermitianMatrix::zero(2), HermitianMatrix::zero(2)};
  Nonlinearity nl = Nonlinearity::none();
  StateVector psi0 = bell_state();
  TimeGrid grid;
  std::optional<ProtocolSpec> protocol;
  std::optional<ChaosSpec> chaos;

  static ExperimentConfig parse(const json& j);
  json dump() const { return source; }

  /// Copy of the experiment with the scalar at `path` replaced.
  ExperimentConfig with(const std::string& path, double value) const {
    json j = source;
    scalar_at(j, path) = value;
    return parse(j);
  }
};

namespace config_detail {

using namespace std::string_literals;

inline StateVector parse_state(const json& j, const std::string& path, const BipartiteShape& shape, json& norm) {
  if (!j.is_object()) fail(path, "expected an object");
  const std::string kind = require(j, path, "kind").is_string() ? j.at("kind").get<std::string>() : "";
  auto qubits_only = [&] {
    if (shape != BipartiteShape::qubits()) fail(join(path, "kind"), "named state '" + kind + "' needs dims [2, 2]");
  };
  try {
    if (kind == "bell") {
      expect_object(j, path, {"kind"});
      qubits_only();
      norm = {{"kind", kind}};
      return bell_state();
    }
    if (kind == "psi_x") {
      expect_object(j, path, {"kind", "x"});
      qubits_only();
      const double x = number(require(j, path, "x"), join(path, "x"));
      norm = {{"kind", kind}, {"x", x}};
      return family_psi_x(x);
    }
    if (kind == "psi_x_overlap") {  // member of the psi_x family with |<Bell|psi_x>| = 1 - eps
      expect_object(j, path, {"kind", "eps"});
      qubits_only();
      const double eps = number(require(j, path, "eps"), join(path, "eps"));
      norm = {{"kind", kind}, {"eps", eps}};
      return family_psi_x(psi_x_for_bell_overlap(eps));
    }
    if (kind == "psi_x_concurrence") {  // member with concurrence 1 - eps
      expect_object(j, path, {"kind", "eps"});
      qubits_only();
      const double eps = number(require(j, path, "eps"), join(path, "eps"));
      if (!(eps >= 0.0 && eps <= 1.0)) fail(join(path, "eps"), "must lie in [0, 1]");
      norm = {{"kind", kind}, {"eps", eps}};
      return family_psi_x(std::sqrt(eps / (2.0 - eps)));
    }
    if (kind == "sep_eps") {
      expect_object(j, path, {"kind", "eps"});
      qubits_only();
      const double eps = number(require(j, path, "eps"), join(path, "eps"));
      norm = {{"kind", kind}, {"eps", eps}};
      return separable_eps(eps);
    }
    if (kind == "basis") {
      expect_object(j, path, {"kind", "j", "k"});
      const std::size_t a = count(require(j, path, "j"), join(path, "j"));
      const std::size_t b = count(require(j, path, "k"), join(path, "k"));
      norm = {{"kind", kind}, {"j", a}, {"k", b}};
      return basis_state(shape, a, b);
    }
    if (kind == "custom") {
      expect_object(j, path, {"kind", "amplitudes", "normalize"});
      const CVector amps = complex_vector(require(j, path, "amplitudes"), join(path, "amplitudes"));
      const bool normalize = j.value("normalize", false);
      norm = {{"kind", kind}, {"amplitudes", j.at("amplitudes")}, {"normalize", normalize}};
      return normalize ? StateVector::normalized(shape, amps) : StateVector::from_amplitudes(shape, amps);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(path, e.what());
  }
  fail(join(path, "kind"), "unknown state kind '" + kind + "'");
}

inline Projector parse_projector(const json& j, const std::string& path, std::size_t dim, json& norm) {
  if (!j.is_object()) fail(path, "expected an object");
  try {
    if (j.contains("named")) {
      expect_object(j, path, {"named"});
      const std::string n = j.at("named").is_string() ? j.at("named").get<std::string>() : "";
      norm = {{"named", n}};
      if (dim != 2 && (n == "plus" || n == "minus")) fail(join(path, "named"), "needs a qubit");
      const double r = 1.0 / std::sqrt(2.0);
      if (n == "zero") return Projector::basis(dim, 0);
      if (n == "one") return Projector::basis(dim, 1);
      if (n == "plus") return Projector::onto((CVector(2) << r, r).finished());
      if (n == "minus") return Projector::onto((CVector(2) << r, -r).finished());
      if (n == "identity") return Projector::identity(dim);
      fail(join(path, "named"), "unknown projector '" + n + "'");
    }
    if (j.contains("phi_eps")) {  // sqrt(1 - eps^2)|0> + eps|1>
      expect_object(j, path, {"phi_eps"});
      if (dim != 2) fail(path, "phi_eps needs a qubit");
      const double e = number(j.at("phi_eps"), join(path, "phi_eps"));
      if (!(std::abs(e) <= 1.0)) fail(join(path, "phi_eps"), "must lie in [-1, 1]");
      norm = {{"phi_eps", e}};
      return Projector::onto((CVector(2) << std::sqrt(1.0 - e * e), e).finished());
    }
    if (j.contains("vector")) {
      expect_object(j, path, {"vector"});
      const CVector v = complex_vector(j.at("vector"), join(path, "vector"));
      if (static_cast<std::size_t>(v.size()) != dim) fail(join(path, "vector"), "wrong dimension");
      norm = {{"vector", j.at("vector")}};
      return Projector::onto(v);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(path, e.what());
  }
  fail(path, "expected one of 'named', 'phi_eps', 'vector'");
}

inline std::vector<std::string> qubit_keys() { return {"a1", "a2", "b1", "b2", "c", "d"}; }

inline json normalized_qubit(const json& q, const std::string& path) {
  std::set<std::string> allowed;
  for (const auto& k : qubit_keys()) allowed.insert(k);
  expect_object(q, path, allowed);
  json out;
  for (const auto& k : {"a1", "a2", "b1", "b2"}) out[k] = number_or(q, path, k, 0.0);
  for (const auto& k : {"c", "d"})
    out[k] = complex_json(q.contains(k) ? complex_value(q.at(k), join(path, k)) : Complex{});
  return out;
}

inline QubitParams qubit_from(const json& q) {
  QubitParams p;
  p.a1 = q.at("a1").get<double>();
  p.a2 = q.at("a2").get<double>();
  p.b1 = q.at("b1").get<double>();
  p.b2 = q.at("b2").get<double>();
  p.c = {q.at("c")[0].get<double>(), q.at("c")[1].get<double>()};
  p.d = {q.at("d")[0].get<double>(), q.at("d")[1].get<double>()};
  return p;
}

}  // namespace config_detail

inline ExperimentConfig ExperimentConfig::parse(const json& j) {
  using namespace config_detail;
  expect_object(j, "", {"system", "initial_state", "run", "protocol", "chaos", "description"});
  ExperimentConfig cfg;
  json norm;
  if (j.contains("description")) {
    if (!j.at("description").is_string()) fail("description", "expected a string");
    norm["description"] = j.at("description");
  }

  // system
  const json& sys = require(j, "", "system");
  expect_object(sys, "system", {"dims", "qubit", "h_a", "h_b", "nonlinearity"});
  std::size_t da = 2, db = 2;
  if (sys.contains("dims")) {
    const json& d = sys.at("dims");
    if (!d.is_array() || d.size() != 2) fail("system.dims", "expected [dim_a, dim_b]");
    da = count(d[0], "system.dims[0]");
    db = count(d[1], "system.dims[1]");
    if (da == 0 || db == 0) fail("system.dims", "dimensions must be >= 1");
  }
  cfg.shape = BipartiteShape(da, db);
  norm["system"]["dims"] = {da, db};
  const bool has_qubit = sys.contains("qubit");
  const bool has_explicit = sys.contains("h_a") || sys.contains("h_b");
  if (has_qubit == has_explicit) fail("system", "give exactly one of 'qubit' or 'h_a'/'h_b'");
  if (has_qubit) {
    if (da != 2 || db != 2) fail("system.qubit", "qubit parameters need dims [2, 2]");
    const json q = normalized_qubit(sys.at("qubit"), "system.qubit");
    cfg.h = qubit_from(q).hamiltonians();
    norm["system"]["qubit"] = q;
  } else {
    cfg.h = {hermitian(require(sys, "system", "h_a"), "system.h_a", da),
             hermitian(require(sys, "system", "h_b"), "system.h_b", db)};
    norm["system"]["h_a"] = matrix_json(cfg.h.h_a);
    norm["system"]["h_b"] = matrix_json(cfg.h.h_b);
  }
  const json& nlj = require(sys, "system", "nonlinearity");
  expect_object(nlj, "system.nonlinearity", {"kind", "g"});
  const std::string kind = nlj.value("kind", std::string("gross_pitaevskii"));
  const double g = number(require(nlj, "system.nonlinearity", "g"), "system.nonlinearity.g");
  if (kind == "gross_pitaevskii") {
    cfg.nl = Nonlinearity::gross_pitaevskii(g);
  } else if (kind == "logarithmic") {
    cfg.nl = Nonlinearity::logarithmic(g);
  } else {
    fail("system.nonlinearity.kind", "unknown nonlinearity '" + kind + "'");
  }
  norm["system"]["nonlinearity"] = {{"kind", kind}, {"g", g}};

  // initial state
  json st;
  cfg.psi0 = parse_state(require(j, "", "initial_state"), "initial_state", cfg.shape, st);
  norm["initial_state"] = st;

  // run
  const json& run = require(j, "", "run");
  expect_object(run, "run", {"t_end", "dt", "sample_every"});
  cfg.grid.t_end = number(require(run, "run", "t_end"), "run.t_end");
  cfg.grid.dt = number_or(run, "run", "dt", 1e-3);
  cfg.grid.sample_every = run.contains("sample_every") ? count(run.at("sample_every"), "run.sample_every") : 100;
  try {
    cfg.grid.validate();
  } catch (const Error& e) {
    fail("run", e.what());
  }
  norm["run"] = {{"t_end", cfg.grid.t_end}, {"dt", cfg.grid.dt}, {"sample_every", cfg.grid.sample_every}};

  // protocol
  if (j.contains("protocol")) {
    const json& p = j.at("protocol");
    expect_object(p, "protocol", {"kind", "x", "x_prime", "alice_prime", "h_a_prime", "observable", "threshold"});
    const std::string pk = require(p, "protocol", "kind").is_string() ? p.at("kind").get<std::string>() : "";
    json pn;
    pn["kind"] = pk;
    json obs_norm = {{"named", "zero"}};
    Projector observable = p.contains("observable")
                               ? parse_projector(p.at("observable"), "protocol.observable", db, obs_norm)
                               : Projector::basis(db, 0);
    ProtocolSpec spec{ProtocolSpec::Kind::ObservableChoice, {}, {}, {}, observable, 0.02};
    spec.threshold = number_or(p, "protocol", "threshold", 0.02);
    pn["observable"] = obs_norm;
    pn["threshold"] = spec.threshold;
    auto reject = [&](const std::string& key) {
      if (p.contains(key)) fail(join("protocol", key), "not used by protocol '" + pk + "'");
    };
    if (pk == "observable_choice" || pk == "measure_or_not") {
      json xn;
      spec.x = parse_projector(require(p, "protocol", "x"), "protocol.x", da, xn);
      pn["x"] = xn;
      reject("alice_prime");
      reject("h_a_prime");
      if (pk == "observable_choice") {
        json xpn;
        spec.x_prime = parse_projector(require(p, "protocol", "x_prime"), "protocol.x_prime", da, xpn);
        pn["x_prime"] = xpn;
      } else {
        spec.kind = ProtocolSpec::Kind::MeasureOrNot;
        reject("x_prime");
      }
    } else if (pk == "intervention") {
      spec.kind = ProtocolSpec::Kind::Intervention;
      reject("x");
      reject("x_prime");
      if (p.contains("alice_prime") == p.contains("h_a_prime"))
        fail("protocol", "give exactly one of 'alice_prime' or 'h_a_prime'");
      if (p.contains("alice_prime")) {
        if (!has_qubit) fail("protocol.alice_prime", "needs qubit parameters in 'system'");
        const json& ap = p.at("alice_prime");
        expect_object(ap, "protocol.alice_prime", {"a1", "a2", "c"});
        json q = norm["system"]["qubit"];
        json apn;
        for (const auto& k : {"a1", "a2"})
          if (ap.contains(k)) q[k] = apn[k] = number(ap.at(k), join("protocol.alice_prime", k));
        if (ap.contains("c")) q["c"] = apn["c"] = complex_json(complex_value(ap.at("c"), "protocol.alice_prime.c"));
        spec.h_prime = qubit_from(q).hamiltonians();
        pn["alice_prime"] = apn.is_null() ? json::object() : apn;
      } else {
        spec.h_prime = HamiltonianPair{hermitian(p.at("h_a_prime"), "protocol.h_a_prime", da), cfg.h.h_b};
        pn["h_a_prime"] = matrix_json(spec.h_prime->h_a);
      }
    } else {
      fail("protocol.kind", "unknown protocol '" + pk + "'");
    }
    cfg.protocol = std::move(spec);
    norm["protocol"] = pn;
  }

  // chaos
  if (j.contains("chaos")) {
    const json& c = j.at("chaos");
    expect_object(c, "chaos", {"perturbation", "t_max", "epsilon_shift"});
    ChaosSpec spec;
    json cn;
    if (c.contains("t_max")) {
      spec.t_max = number(c.at("t_max"), "chaos.t_max");
      if (!(*spec.t_max > 0.0)) fail("chaos.t_max", "must be positive");
      cn["t_max"] = *spec.t_max;
    }
    spec.epsilon_shift = number_or(c, "chaos", "epsilon_shift", 0.0);
    if (spec.epsilon_shift < 0.0) fail("chaos.epsilon_shift", "must be >= 0");
    cn["epsilon_shift"] = spec.epsilon_shift;
    if (c.contains("perturbation")) {
      const json& pj = c.at("perturbation");
      const std::string path = "chaos.perturbation";
      if (!pj.is_object()) fail(path, "expected an object");
      const std::string pk = require(pj, path, "kind").is_string() ? pj.at("kind").get<std::string>() : "";
      if (pk == "state") {
        expect_object(pj, path, {"kind", "initial_state"});
        json sn;
        spec.partner = parse_state(require(pj, path, "initial_state"), join(path, "initial_state"), cfg.shape, sn);
        spec.perturbation = ChaosSpec::Perturbation::State;
        cn["perturbation"] = {{"kind", pk}, {"initial_state", sn}};
      } else if (pk == "parameter") {
        expect_object(pj, path, {"kind", "path", "offset"});
        if (!require(pj, path, "path").is_string()) fail(join(path, "path"), "expected a string");
        spec.parameter_path = pj.at("path").get<std::string>();
        spec.parameter_offset = number(require(pj, path, "offset"), join(path, "offset"));
        if (spec.parameter_path.rfind("system.", 0) != 0)
          fail(join(path, "path"), "parameter perturbation must address the system block");
        json probe = norm;
        try {
          scalar_at(probe, spec.parameter_path);
        } catch (const ConfigError& e) {
          fail(join(path, "path"), e.what());
        }
        spec.perturbation = ChaosSpec::Perturbation::Parameter;
        cn["perturbation"] = {{"kind", pk}, {"path", spec.parameter_path}, {"offset", spec.parameter_offset}};
      } else {
        fail(join(path, "kind"), "unknown perturbation '" + pk + "'");
      }
    }
    cfg.chaos = std::move(spec);
    norm["chaos"] = cn;
  }

  cfg.source = std::move(norm);
  return cfg;
}

}  // namespace nlqd
