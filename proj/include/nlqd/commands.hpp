#pragma once

// Implementations behind the nlqd command-line subcommands. Each writes its
// artifacts under an output directory and returns a process exit code.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "nlqd/chaos.hpp"
#include "nlqd/config.hpp"
#include "nlqd/verify.hpp"

namespace nlqd::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kUsage = 1, kDivergence = 2, kVerificationFailed = 3 };

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw ConfigError("cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << fmt(values[i]);
    out_ << '\n';
  }

  void raw(const std::string& line) { out_ << line << '\n'; }
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

inline void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

inline void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

inline json estimate_json(const LyapunovEstimate& e) {
  return {{"lambda", e.lambda},     {"cv", e.cv},           {"t_max", e.t_max},
          {"delta_lambda", e.delta_lambda}, {"delta_cv", e.delta_cv}, {"points", e.points},
          {"r_squared", e.r_squared}};
}

// ---------------------------------------------------------------- evolve

inline std::vector<std::string> trajectory_header(const BipartiteShape& shape) {
  std::vector<std::string> h{"t"};
  for (std::size_t j = 0; j < shape.dim_a(); ++j)
    for (std::size_t k = 0; k < shape.dim_b(); ++k) {
      const std::string tag = std::to_string(j) + std::to_string(k);
      h.push_back("re_" + tag);
      h.push_back("im_" + tag);
    }
  h.push_back("norm");
  if (shape == BipartiteShape::qubits()) {
    for (const char* c : {"n_x", "n_y", "n_z", "concurrence"}) h.emplace_back(c);
  }
  h.emplace_back("purity");
  return h;
}

inline std::vector<double> trajectory_row(double t, const StateVector& s) {
  std::vector<double> row{t};
  for (Eigen::Index i = 0; i < s.amps().size(); ++i) {
    row.push_back(s.amps()[i].real());
    row.push_back(s.amps()[i].imag());
  }
  row.push_back(s.norm());
  // Reduced quantities are reported for the normalized state so that a
  // drifting norm shows up only in the norm column.
  const StateVector unit = s.renormalized();
  const DensityMatrix rho = partial_trace_b(unit);
  if (s.shape() == BipartiteShape::qubits()) {
    const BlochVector n = bloch_vector(rho);
    row.insert(row.end(), {n.x, n.y, n.z, concurrence(s)});
  }
  row.push_back(rho.purity());
  return row;
}

inline int run_evolve(const ExperimentConfig& cfg, const fs::path& out_dir, std::ostream& err) {
  prepare_dir(out_dir);
  CsvWriter csv(out_dir / "trajectory.csv", trajectory_header(cfg.shape));
  Trajectory traj;
  int code = kOk;
  std::string trailer;
  try {
    traj = integrate(cfg.psi0, cfg.h, cfg.nl, cfg.grid);
  } catch (const IntegrationDivergence& e) {
    traj = e.partial();
    code = kDivergence;
    trailer = "# error: non-finite amplitude at step " + std::to_string(e.step()) + " (t = " +
              fmt(static_cast<double>(e.step()) * cfg.grid.dt) + ")";
    err << "divergence: " << trailer.substr(9) << '\n';
  }
  for (std::size_t i = 0; i < traj.size(); ++i) csv.row(trajectory_row(traj.times[i], traj.states[i]));
  if (code != kOk) csv.raw(trailer);
  return code;
}

// ---------------------------------------------------------------- protocol

struct ProtocolResult {
  ProtocolOutcome outcome;
  std::vector<double> signal;
  std::vector<double> trace;
  std::optional<DistanceSeries> bloch;
  std::optional<double> first_crossing;
  std::optional<LyapunovEstimate> lyapunov;
};

inline ProtocolResult compute_protocol(const ExperimentConfig& cfg, std::size_t jobs) {
  if (!cfg.protocol) throw ConfigError("protocol: block is required for this command");
  const ProtocolSpec& p = *cfg.protocol;
  ProtocolResult r;
  switch (p.kind) {
    case ProtocolSpec::Kind::ObservableChoice:
      r.outcome = protocol_observable_choice(cfg.psi0, *p.x, *p.x_prime, cfg.h, cfg.nl, cfg.grid, jobs);
      break;
    case ProtocolSpec::Kind::MeasureOrNot:
      r.outcome = protocol_measure_or_not(cfg.psi0, *p.x, cfg.h, cfg.nl, cfg.grid, jobs);
      break;
    case ProtocolSpec::Kind::Intervention:
      r.outcome = protocol_intervention(cfg.psi0, cfg.h, *p.h_prime, cfg.nl, cfg.grid, jobs);
      break;
  }
  r.signal = distinguishability(r.outcome.first, r.outcome.second, p.observable.hermitian());
  r.trace = trace_distance_series(r.outcome.first, r.outcome.second);
  for (std::size_t i = 0; i < r.signal.size(); ++i)
    if (r.signal[i] > p.threshold) {
      r.first_crossing = r.outcome.first.times[i];
      break;
    }
  if (cfg.shape == BipartiteShape::qubits()) {
    const double shift = cfg.chaos ? cfg.chaos->epsilon_shift : 0.0;
    r.bloch = trajectory_distance_series(r.outcome.first, r.outcome.second, std::nullopt, shift);
    if (cfg.chaos && cfg.chaos->t_max) r.lyapunov = estimate_lyapunov(*r.bloch, *cfg.chaos->t_max);
  }
  return r;
}

inline void write_arm(const fs::path& path, const ReducedSeries& s, const HermitianMatrix& observable) {
  const std::size_t db = s.rhos.empty() ? 0 : s.rhos.front().dim();
  std::vector<std::string> header{"t"};
  for (std::size_t k = 0; k < db; ++k) header.push_back("p_" + std::to_string(k));
  if (!s.blochs.empty())
    for (const char* c : {"n_x", "n_y", "n_z"}) header.emplace_back(c);
  header.emplace_back("signal");
  CsvWriter csv(path, header);
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::vector<double> row{s.times[i]};
    for (std::size_t k = 0; k < db; ++k) row.push_back(s.rhos[i](k, k).real());
    if (!s.blochs.empty()) row.insert(row.end(), {s.blochs[i].x, s.blochs[i].y, s.blochs[i].z});
    row.push_back(s.rhos[i].expectation(observable));
    csv.row(row);
  }
}

inline int run_protocol(const ExperimentConfig& cfg, const fs::path& out_dir, std::size_t jobs,
                        std::ostream& err) {
  const ProtocolResult r = compute_protocol(cfg, jobs);
  prepare_dir(out_dir);
  const HermitianMatrix obs = cfg.protocol->observable.hermitian();
  write_arm(out_dir / "arm_a.csv", r.outcome.first, obs);
  write_arm(out_dir / "arm_b.csv", r.outcome.second, obs);

  std::vector<std::string> header{"t", "distinguishability", "trace_distance"};
  if (r.bloch) header.insert(header.end(), {"bloch_distance", "bloch_distance_eps", "log_ratio"});
  CsvWriter csv(out_dir / "distance.csv", header);
  const std::vector<double> logs = r.bloch ? r.bloch->log_ratio() : std::vector<double>{};
  for (std::size_t i = 0; i < r.signal.size(); ++i) {
    std::vector<double> row{r.outcome.first.times[i], r.signal[i], r.trace[i]};
    if (r.bloch) {
      const double d_eps = r.bloch->values[i];
      row.insert(row.end(), {d_eps - r.bloch->epsilon_shift, d_eps, logs[i]});
    }
    csv.row(row);
  }

  json summary = {{"protocol", cfg.source["protocol"]["kind"]},
                  {"observable", cfg.source["protocol"]["observable"]},
                  {"threshold", cfg.protocol->threshold},
                  {"max_distinguishability", max_of(r.signal)},
                  {"max_trace_distance", max_of(r.trace)},
                  {"first_crossing_time", r.first_crossing ? json(*r.first_crossing) : json(nullptr)},
                  {"warnings", r.outcome.warnings}};
  if (r.bloch) {
    std::vector<double> raw(r.bloch->values);
    for (double& v : raw) v -= r.bloch->epsilon_shift;
    summary["max_bloch_distance"] = max_of(raw);
    double dx = 0.0, dy = 0.0, dz = 0.0;
    for (std::size_t i = 0; i < r.outcome.first.size(); ++i) {
      const BlochVector& a = r.outcome.first.blochs[i];
      const BlochVector& b = r.outcome.second.blochs[i];
      dx = std::max(dx, std::abs(a.x - b.x));
      dy = std::max(dy, std::abs(a.y - b.y));
      dz = std::max(dz, std::abs(a.z - b.z));
    }
    summary["max_delta_n"] = {{"x", dx}, {"y", dy}, {"z", dz}};
  }
  if (r.lyapunov) summary["lyapunov"] = estimate_json(*r.lyapunov);
  write_json(out_dir / "summary.json", summary);
  for (const auto& w : r.outcome.warnings) err << "warning: " << w << '\n';
  return kOk;
}

// ---------------------------------------------------------------- lyapunov

struct ChaosResult {
  Trajectory run1;
  Trajectory run2;
  ReducedSeries reduced1;
  ReducedSeries reduced2;
  DistanceSeries series;
  LyapunovEstimate estimate;
  bool suggested = false;
};

inline ChaosResult compute_chaos(const ExperimentConfig& cfg, std::size_t jobs) {
  if (!cfg.chaos || cfg.chaos->perturbation == ChaosSpec::Perturbation::None)
    throw ConfigError("chaos.perturbation: required for this command");
  if (cfg.shape != BipartiteShape::qubits()) throw UnsupportedDimension("Lyapunov analysis needs two qubits");
  const ChaosSpec& c = *cfg.chaos;
  if (c.t_max && *c.t_max > cfg.grid.t_end * (1.0 + 1e-12))
    throw ConfigError("chaos.t_max: exceeds run.t_end");

  const bool by_state = c.perturbation == ChaosSpec::Perturbation::State;
  HamiltonianPair h_prime = cfg.h;
  if (!by_state) {
    json probe = cfg.source;
    const double base = scalar_at(probe, c.parameter_path).get<double>();
    h_prime = cfg.with(c.parameter_path, base + c.parameter_offset).h;
  }
  auto runs = parallel_map(
      2,
      [&](std::size_t i) {
        if (by_state) return integrate(i == 0 ? cfg.psi0 : *c.partner, cfg.h, cfg.nl, cfg.grid);
        return integrate(cfg.psi0, i == 0 ? cfg.h : h_prime, cfg.nl, cfg.grid);
      },
      jobs);

  ChaosResult r{std::move(runs[0]), std::move(runs[1]), {}, {}, {}, {}, false};
  r.reduced1 = reduced_series(r.run1);
  r.reduced2 = reduced_series(r.run2);
  r.series = by_state ? trajectory_distance_series(r.reduced1, r.reduced2, std::nullopt, c.epsilon_shift)
                      : trajectory_distance_series(r.reduced1, r.reduced2, std::abs(c.parameter_offset),
                                                   c.epsilon_shift);
  double t_max = 0.0;
  if (c.t_max) {
    t_max = *c.t_max;
  } else {
    t_max = suggest_window(r.series);
    r.suggested = true;
  }
  r.estimate = estimate_lyapunov(r.series, t_max);
  return r;
}

inline int run_lyapunov(const ExperimentConfig& cfg, const fs::path& out_dir, std::size_t jobs) {
  const ChaosResult r = compute_chaos(cfg, jobs);
  prepare_dir(out_dir);
  const bool by_state = cfg.chaos->perturbation == ChaosSpec::Perturbation::State;
  std::vector<std::string> header{"t", "D", "D_eps", "log_ratio"};
  if (by_state) header.insert(header.end(), {"overlap", "concurrence_1", "concurrence_2"});
  header.insert(header.end(), {"n1_x", "n1_y", "n1_z", "n2_x", "n2_y", "n2_z"});
  CsvWriter csv(out_dir / "distance.csv", header);
  const auto logs = r.series.log_ratio();
  for (std::size_t i = 0; i < r.series.size(); ++i) {
    const double d_eps = r.series.values[i];
    std::vector<double> row{r.series.times[i], d_eps - r.series.epsilon_shift, d_eps, logs[i]};
    if (by_state)
      row.insert(row.end(), {overlap(r.run1.states[i], r.run2.states[i]), concurrence(r.run1.states[i]),
                             concurrence(r.run2.states[i])});
    const BlochVector& a = r.reduced1.blochs[i];
    const BlochVector& b = r.reduced2.blochs[i];
    row.insert(row.end(), {a.x, a.y, a.z, b.x, b.y, b.z});
    csv.row(row);
  }
  json j = estimate_json(r.estimate);
  j["t_max_source"] = r.suggested ? "suggested" : "config";
  j["d0"] = r.series.values.front();
  j["epsilon_shift"] = r.series.epsilon_shift;
  j["perturbation"] = cfg.source["chaos"]["perturbation"];
  write_json(out_dir / "lyapunov.json", j);
  return kOk;
}

/// Fits D(t) = exp(rate t) sampled on the run grid; the estimate must return
/// `rate` exactly. Exercises the estimator and writers without integrating.
inline int run_lyapunov_synthetic(const ExperimentConfig& cfg, double rate, const fs::path& out_dir) {
  DistanceSeries s{cfg.grid.times(), {}, 0.0};
  for (double t : s.times) s.values.push_back(std::exp(rate * t));
  const double t_max = cfg.chaos && cfg.chaos->t_max ? *cfg.chaos->t_max : s.times.back();
  const LyapunovEstimate e = estimate_lyapunov(s, t_max);
  prepare_dir(out_dir);
  CsvWriter csv(out_dir / "distance.csv", {"t", "D", "D_eps", "log_ratio"});
  const auto logs = s.log_ratio();
  for (std::size_t i = 0; i < s.size(); ++i) csv.row({s.times[i], s.values[i], s.values[i], logs[i]});
  json j = estimate_json(e);
  j["t_max_source"] = "synthetic";
  j["synthetic_rate"] = rate;
  write_json(out_dir / "lyapunov.json", j);
  return kOk;
}

// ---------------------------------------------------------------- sweep

struct SweepAxis {
  std::string path;
  std::vector<double> values;
};

/// Parses "2,5,7" (whitespace allowed); a blank string gives no values.
inline std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  if (text.find_first_not_of(" \t") == std::string::npos) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const std::size_t a = item.find_first_not_of(" \t");
    const std::string tok = a == std::string::npos ? "" : item.substr(a, item.find_last_not_of(" \t") - a + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (tok.empty() || used != tok.size() || !std::isfinite(v))
      throw ConfigError("sweep values: '" + tok + "' is not a number");
    out.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

/// Axes are zipped: row i sets every axis path to its i-th value.
inline int run_sweep(const ExperimentConfig& base, const std::vector<SweepAxis>& axes, const fs::path& out_dir,
                     std::size_t jobs, std::ostream& err) {
  if (axes.empty()) throw ConfigError("sweep: at least one --axis is required");
  const std::size_t rows = axes.front().values.size();
  for (const auto& a : axes)
    if (a.values.size() != rows)
      throw ConfigError("sweep: axis '" + a.path + "' has " + std::to_string(a.values.size()) +
                        " values; expected " + std::to_string(rows));

  std::vector<ExperimentConfig> configs;
  configs.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    json j = base.source;
    for (const auto& a : axes) scalar_at(j, a.path) = a.values[i];
    configs.push_back(ExperimentConfig::parse(j));
  }

  const bool chaos = base.chaos && base.chaos->perturbation != ChaosSpec::Perturbation::None;
  const bool protocol = base.protocol.has_value();
  std::vector<std::string> metrics;
  if (protocol) metrics = {"max_distinguishability", "max_trace_distance", "first_crossing_time"};
  if (chaos) metrics.insert(metrics.end(), {"lambda", "cv", "t_max", "delta_lambda", "delta_cv", "r_squared"});
  if (!protocol && !chaos) {
    metrics = {"max_norm_drift"};
    if (base.shape == BipartiteShape::qubits())
      metrics.insert(metrics.end(), {"final_n_x", "final_n_y", "final_n_z", "final_concurrence"});
  }

  struct Row {
    std::vector<double> values;
    bool diverged = false;
  };
  auto results = parallel_map(
      rows,
      [&](std::size_t i) {
        const ExperimentConfig& c = configs[i];
        Row row;
        try {
          if (protocol) {
            const auto r = compute_protocol(c, 1);
            row.values.insert(row.values.end(), {max_of(r.signal), max_of(r.trace), r.first_crossing.value_or(kNaN)});
          }
          if (chaos) {
            const auto e = compute_chaos(c, 1).estimate;
            row.values.insert(row.values.end(), {e.lambda, e.cv, e.t_max, e.delta_lambda, e.delta_cv, e.r_squared});
          }
          if (!protocol && !chaos) {
            const Trajectory t = integrate(c.psi0, c.h, c.nl, c.grid);
            row.values.push_back(t.max_norm_drift());
            if (c.shape == BipartiteShape::qubits()) {
              const BlochVector n = bloch_vector(partial_trace_b(t.back().renormalized()));
              row.values.insert(row.values.end(), {n.x, n.y, n.z, concurrence(t.back())});
            }
          }
        } catch (const DivergenceError&) {
          row.values.assign(metrics.size(), kNaN);
          row.diverged = true;
        }
        return row;
      },
      jobs);

  prepare_dir(out_dir);
  std::vector<std::string> header;
  for (const auto& a : axes) header.push_back(a.path);
  header.insert(header.end(), metrics.begin(), metrics.end());
  header.emplace_back("status");
  CsvWriter csv(out_dir / "sweep.csv", header);
  bool any_diverged = false;
  for (std::size_t i = 0; i < rows; ++i) {
    std::string line;
    for (const auto& a : axes) line += fmt(a.values[i]) + ",";
    for (double v : results[i].values) line += fmt(v) + ",";
    line += results[i].diverged ? "diverged" : "ok";
    csv.raw(line);
    any_diverged = any_diverged || results[i].diverged;
  }
  if (any_diverged) {
    err << "divergence: one or more sweep rows diverged\n";
    return kDivergence;
  }
  return kOk;
}

// ---------------------------------------------------------------- verify

/// One JSON object per check, then a summary line.
inline int run_verify(const CheckConfig& cfg, std::ostream& out, std::size_t jobs, bool controls_only = false) {
  auto reports = run_suite(cfg, jobs);
  if (controls_only)
    reports.erase(std::remove_if(reports.begin(), reports.end(), [](const PropertyReport& r) { return !r.control; }),
                  reports.end());
  for (const auto& r : reports) out << r.to_json().dump() << '\n';
  const bool ok = suite_ok(reports);
  out << json{{"summary", true}, {"checks", reports.size()}, {"ok", ok}, {"run_config", cfg.describe()}}.dump()
      << '\n';
  return ok ? kOk : kVerificationFailed;
}

}  // namespace nlqd::cli
