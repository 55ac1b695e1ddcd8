#pragma once

// Experiment runners behind the command-line tool: strict JSON configuration,
// sweep expansion, CSV rendering and the run manifest. Requires nlohmann/json
// on the include path.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cavity_entropy/bayes.hpp"
#include "cavity_entropy/dynamics.hpp"
#include "cavity_entropy/errors.hpp"
#include "cavity_entropy/hilbert.hpp"
#include "cavity_entropy/infotheory.hpp"
#include "cavity_entropy/parallel.hpp"
#include "cavity_entropy/steady_state.hpp"
#include "cavity_entropy/version.hpp"

namespace cavity_entropy::cli {

using json = nlohmann::json;

class ConfigError : public Error {
 public:
  using Error::Error;
};

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitValidation = 4 };

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"qfunc",          "fidelity-contour", "fidelity-curve", "evolve-entropy",
                                              "mi-sweep",       "bayes",            "validate"};
  return names;
}

// ---------------------------------------------------------------------------
// Number formatting

// Shortest decimal string that parses back to exactly `v`.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Configuration

struct Sweep {
  double start = 0.0;
  double stop = 1.0;
  int count = 2;
  bool log = false;

  [[nodiscard]] std::vector<double> values() const {
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      const double u = static_cast<double>(i) / (count - 1);
      v[i] = log ? std::exp(std::log(start) + u * (std::log(stop) - std::log(start))) : start + u * (stop - start);
    }
    v.front() = start;
    v.back() = stop;
    return v;
  }
};

// A parameter that is either a single value or a sweep.
struct Param {
  std::variant<double, Sweep> value = 0.0;

  [[nodiscard]] bool is_sweep() const { return std::holds_alternative<Sweep>(value); }
  [[nodiscard]] std::vector<double> values() const {
    return is_sweep() ? std::get<Sweep>(value).values() : std::vector<double>{std::get<double>(value)};
  }
  [[nodiscard]] double scalar(const char* key) const {
    if (is_sweep()) throw ConfigError(std::string("'") + key + "' must be a single number for this experiment");
    return std::get<double>(value);
  }
};

struct ExperimentConfig {
  std::string experiment;
  Param x{1.0};
  Param n_bar0{1.0};
  Param m{1.0};
  std::optional<double> t_end;  // default: equilibrium horizon
  int snapshots = 101;
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  double tail_tol = 1e-12;
  double equilibrium_tol = 1e-6;
  int grid_points = 401;
  std::optional<double> grid_half_width;  // default |alpha| + 5
  long trials = 100000;
  std::uint64_t seed = 12345;
  std::string output;
  json echo;  // the configuration as read, after the seed override
};

namespace detail {

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "experiment", "x",           "n_bar0",          "m",           "t_end",           "snapshots",
      "rel_tol",    "abs_tol",     "tail_tol",        "equilibrium_tol", "grid_points", "grid_half_width",
      "trials",     "seed",        "output"};
  return keys;
}

inline double number_value(const json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  }
  throw ConfigError("'" + key + "' must be a number");
}

inline Param parse_param(const json& v, const std::string& key) {
  if (!v.is_object()) return Param{number_value(v, key)};
  static const std::set<std::string> sweep_keys{"start", "stop", "count", "log"};
  for (const auto& [k, _] : v.items()) {
    if (!sweep_keys.contains(k)) throw ConfigError("unknown key '" + k + "' in sweep '" + key + "'");
  }
  for (const char* req : {"start", "stop", "count"}) {
    if (!v.contains(req)) throw ConfigError("sweep '" + key + "' is missing '" + req + "'");
  }
  Sweep s;
  s.start = number_value(v["start"], key + ".start");
  s.stop = number_value(v["stop"], key + ".stop");
  if (!v["count"].is_number_integer()) throw ConfigError("sweep '" + key + "'.count must be an integer");
  s.count = v["count"].get<int>();
  if (v.contains("log")) {
    if (!v["log"].is_boolean()) throw ConfigError("sweep '" + key + "'.log must be true or false");
    s.log = v["log"].get<bool>();
  }
  if (s.count < 2) throw ConfigError("sweep '" + key + "' needs count >= 2");
  if (!std::isfinite(s.start) || !std::isfinite(s.stop) || !(s.start < s.stop)) {
    throw ConfigError("sweep '" + key + "' needs finite start < stop");
  }
  if (s.log && !(s.start > 0.0)) throw ConfigError("log sweep '" + key + "' needs start > 0");
  return Param{s};
}

inline double positive(const json& v, const std::string& key) {
  const double d = number_value(v, key);
  if (!(d > 0.0) || !std::isfinite(d)) throw ConfigError("'" + key + "' must be a finite number > 0");
  return d;
}

template <class Int>
Int integer(const json& v, const std::string& key, Int min) {
  if (!v.is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
  const auto i = v.get<long long>();
  if (i < static_cast<long long>(min)) throw ConfigError("'" + key + "' must be >= " + std::to_string(min));
  return static_cast<Int>(i);
}

inline void check_range(const Param& p, const char* key, double lo, double hi, bool open_lo) {
  for (double v : p.values()) {
    const bool ok = (open_lo ? v > lo : v >= lo) && v <= hi;
    if (!ok) throw ConfigError(std::string("'") + key + "' value " + format_number(v) + " out of range");
  }
}

}  // namespace detail

// Parses a flat JSON object. `seed_override` (the environment variable, when
// set) replaces the configured seed.
inline ExperimentConfig parse_config(const json& j, const std::string& experiment,
                                     std::optional<std::uint64_t> seed_override = std::nullopt) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  for (const auto& [k, _] : j.items()) {
    if (!detail::known_keys().contains(k)) throw ConfigError("unknown key '" + k + "'");
  }
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), experiment) == names.end()) {
    throw ConfigError("unknown experiment '" + experiment + "'");
  }
  if (j.contains("experiment")) {
    if (!j["experiment"].is_string() || j["experiment"].get<std::string>() != experiment) {
      throw ConfigError("config names experiment '" + j["experiment"].dump() + "' but '" + experiment + "' was run");
    }
  }

  ExperimentConfig c;
  c.experiment = experiment;
  if (j.contains("x")) c.x = detail::parse_param(j["x"], "x");
  if (j.contains("n_bar0")) c.n_bar0 = detail::parse_param(j["n_bar0"], "n_bar0");
  if (j.contains("m")) c.m = detail::parse_param(j["m"], "m");
  if (j.contains("t_end")) c.t_end = detail::positive(j["t_end"], "t_end");
  if (j.contains("snapshots")) c.snapshots = detail::integer<int>(j["snapshots"], "snapshots", 2);
  if (j.contains("rel_tol")) c.rel_tol = detail::positive(j["rel_tol"], "rel_tol");
  if (j.contains("abs_tol")) c.abs_tol = detail::positive(j["abs_tol"], "abs_tol");
  if (j.contains("tail_tol")) c.tail_tol = detail::positive(j["tail_tol"], "tail_tol");
  if (j.contains("equilibrium_tol")) c.equilibrium_tol = detail::positive(j["equilibrium_tol"], "equilibrium_tol");
  if (j.contains("grid_points")) c.grid_points = detail::integer<int>(j["grid_points"], "grid_points", 2);
  if (j.contains("grid_half_width")) c.grid_half_width = detail::positive(j["grid_half_width"], "grid_half_width");
  if (j.contains("trials")) c.trials = detail::integer<long>(j["trials"], "trials", 1);
  if (j.contains("seed")) c.seed = detail::integer<std::uint64_t>(j["seed"], "seed", 0);
  if (j.contains("output")) {
    if (!j["output"].is_string()) throw ConfigError("'output' must be a string");
    c.output = j["output"].get<std::string>();
  }
  if (c.tail_tol >= 1.0) throw ConfigError("'tail_tol' must be < 1");

  detail::check_range(c.x, "x", 0.0, 1.0, false);
  detail::check_range(c.n_bar0, "n_bar0", 0.0, std::numeric_limits<double>::infinity(), false);
  detail::check_range(c.m, "m", 0.0, std::numeric_limits<double>::infinity(), true);

  if (seed_override) c.seed = *seed_override;
  c.echo = j;
  c.echo["experiment"] = experiment;
  c.echo["seed"] = c.seed;
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path, const std::string& experiment,
                                    std::optional<std::uint64_t> seed_override = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j, experiment, seed_override);
}

// Reads CAVITY_ENTROPY_SEED; an unparsable value is a configuration error.
inline std::optional<std::uint64_t> seed_from_environment() {
  const char* raw = std::getenv("CAVITY_ENTROPY_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  const std::string_view s(raw);
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("CAVITY_ENTROPY_SEED must be a non-negative integer");
  }
  return v;
}

// ---------------------------------------------------------------------------
// Results

struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;
  std::string detail;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  [[nodiscard]] std::string csv() const {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
    out += '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        out += format_number(row[i]);
      }
      out += '\n';
    }
    return out;
  }
};

struct RunResult {
  Table table;
  std::vector<Check> checks;
  int n_max = 0;  // largest cavity cutoff used

  [[nodiscard]] bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
  void check(std::string name, bool pass, double value, std::string detail = {}) {
    checks.push_back({std::move(name), pass, value, std::move(detail)});
  }
};

struct RunOptions {
  int jobs = 1;
};

namespace detail {

inline ode::Tolerance tolerance(const ExperimentConfig& c) { return {c.rel_tol, c.abs_tol}; }

inline int cutoff(double n_bar0, const ExperimentConfig& c) {
  if (std::isinf(n_bar0)) throw ConfigError("n_bar0 must be finite for this experiment");
  return truncation_dim(n_bar0, c.tail_tol);
}

// Evaluates fn on every point and returns the rows in point order.
template <class Fn>
std::vector<std::vector<double>> map_points(std::size_t count, int jobs, Fn&& fn) {
  std::vector<std::vector<double>> rows(count);
  parallel_for(count, jobs, [&](std::size_t i) { rows[i] = fn(i); });
  return rows;
}

}  // namespace detail

// Q-function of the closed-form final cavity state on a square grid, rows
// ordered with re_beta outermost.
inline RunResult run_qfunc(const ExperimentConfig& c, const RunOptions& opt = {}) {
  const double x = c.x.scalar("x");
  const double n_bar0 = c.n_bar0.scalar("n_bar0");
  const double m = c.m.scalar("m");
  const SteadyStateInputs in{x, n_bar0, m, detail::cutoff(n_bar0, c)};
  const cplx alpha(std::sqrt(n_bar0), 0.0);
  const DensityMatrix rho = final_cavity_state(in, alpha);
  const double half = c.grid_half_width.value_or(std::abs(alpha) + 5.0);
  const QGrid q = husimi_q(rho, GridSpec::centered(half, c.grid_points), opt.jobs);

  RunResult r;
  r.n_max = in.n_max;
  r.table.header = {"re_beta", "im_beta", "q_value"};
  r.table.rows.reserve(q.re_axis.size() * q.im_axis.size());
  Eigen::Index best_i = 0, best_j = 0;
  q.values.maxCoeff(&best_i, &best_j);
  for (std::size_t i = 0; i < q.re_axis.size(); ++i) {
    for (std::size_t j = 0; j < q.im_axis.size(); ++j) {
      r.table.rows.push_back({q.re_axis[i], q.im_axis[j], q.values(static_cast<Eigen::Index>(i), j)});
    }
  }
  r.check("q_nonnegative", q.values.minCoeff() >= 0.0, q.values.minCoeff());
  const double mass = q.riemann_sum();
  r.check("q_normalized", std::abs(mass - 1.0) < 1e-2, mass, "Riemann sum over the grid");
  r.check("peak_re_beta", true, q.re_axis[static_cast<std::size_t>(best_i)]);
  r.check("peak_im_beta", true, q.im_axis[static_cast<std::size_t>(best_j)]);
  r.check("half_max_phase_extent", true, half_max_phase_extent(q), "radians");
  return r;
}

// F over an (n_bar0, m) grid; both axes are usually log sweeps.
inline RunResult run_fidelity_contour(const ExperimentConfig& c, const RunOptions& opt = {}) {
  const double x = c.x.scalar("x");
  const auto ns = c.n_bar0.values();
  const auto ms = c.m.values();
  RunResult r;
  for (double n : ns) r.n_max = std::max(r.n_max, std::isinf(n) ? 0 : detail::cutoff(n, c));
  r.table.header = {"n_bar0", "m", "F"};
  r.table.rows = detail::map_points(ns.size() * ms.size(), opt.jobs, [&](std::size_t k) {
    const double n = ns[k / ms.size()];
    const double m = ms[k % ms.size()];
    const SteadyStateInputs in{x, n, m, std::isinf(n) ? 1 : detail::cutoff(n, c)};
    return std::vector<double>{n, m, fidelity_F(in)};
  });
  double lo = 1.0, hi = 0.0;
  for (const auto& row : r.table.rows) {
    lo = std::min(lo, row[2]);
    hi = std::max(hi, row[2]);
  }
  r.check("F_in_unit_interval", lo >= 0.0 && hi <= 1.0, lo);
  return r;
}

// f from the finite sum and the thermodynamic limit along m at one n_bar0,
// with an m_min marker column (1 for m below m_min).
inline RunResult run_fidelity_curve(const ExperimentConfig& c, const RunOptions& opt = {}) {
  const double n = c.n_bar0.scalar("n_bar0");
  const int n_max = detail::cutoff(n, c);
  const auto ms = c.m.values();
  const double mmin = n > 0.0 ? m_min(n) : 0.0;
  RunResult r;
  r.n_max = n_max;
  r.table.header = {"m", "F_sum", "F_thermo", "below_m_min"};
  r.table.rows = detail::map_points(ms.size(), opt.jobs, [&](std::size_t k) {
    const double m = ms[k];
    return std::vector<double>{m, conditional_fidelity_sum(n, m, n_max), conditional_fidelity_thermo(m),
                               m < mmin ? 1.0 : 0.0};
  });
  double worst = 0.0;
  for (const auto& row : r.table.rows) {
    if (row[0] >= 2.0 * mmin) worst = std::max(worst, std::abs(row[1] - row[2]));
  }
  r.check("m_min", true, mmin);
  r.check("max_gap_above_2_m_min", worst < 0.02, worst, "|F_sum - F_thermo| for m >= 2 m_min");
  return r;
}

// Entropies of the purified evolution at every snapshot.
inline RunResult run_evolve_entropy(const ExperimentConfig& c, const RunOptions& = {}) {
  const double x = c.x.scalar("x");
  const double n = c.n_bar0.scalar("n_bar0");
  const double m = c.m.scalar("m");
  const ModelParams p = ModelParams::from_m(m, x, n, c.tail_tol);
  EvolveOptions eo;
  eo.tolerance = detail::tolerance(c);
  eo.snapshots = c.snapshots;
  eo.equilibrium_tol = c.equilibrium_tol;
  const double t_end = c.t_end.value_or(equilibrium_horizon(p));
  const EntropyTimeSeries ts = entropy_time_series(p, t_end, eo);

  RunResult r;
  r.n_max = p.n_max;
  static const std::vector<std::string> cols{"A", "R", "L", "RL", "ARL", "P", "I_RL"};
  r.table.header = {"t"};
  for (const auto& k : cols) r.table.header.push_back(k == "I_RL" ? k : "S_" + k);
  for (const auto& k : cols) r.table.header.push_back((k == "I_RL" ? k : "S_" + k) + "_over_S0");
  const double s0 = ts.S0;
  double i_min = 0.0, i_max = 0.0, arl_drop = 0.0;
  for (std::size_t i = 0; i < ts.times.size(); ++i) {
    std::vector<double> row{ts.times[i]};
    for (const auto& k : cols) row.push_back(ts.series.at(k)[i]);
    for (const auto& k : cols) row.push_back(s0 > 0.0 ? ts.series.at(k)[i] / s0 : 0.0);
    r.table.rows.push_back(std::move(row));
    const double iv = ts.series.at("I_RL")[i];
    i_min = i ? std::min(i_min, iv) : iv;
    i_max = i ? std::max(i_max, iv) : iv;
    if (i) arl_drop = std::max(arl_drop, ts.series.at("ARL")[i - 1] - ts.series.at("ARL")[i]);
  }
  r.check("S0", true, s0);
  r.check("I_RL_nonnegative", i_min >= -1e-8, i_min);
  r.check("I_RL_below_S0", i_max <= s0 + 1e-8, i_max);
  r.check("S_ARL_nondecreasing", arl_drop <= 1e-6, arl_drop, "largest drop between snapshots");
  r.check("accepted_steps", true, static_cast<double>(ts.stats.accepted));
  return r;
}

// Closed-form equilibrium I(R:L) against the classical click / no-click
// mutual information over an (m, n_bar0) grid.
inline RunResult run_mi_sweep(const ExperimentConfig& c, const RunOptions& opt = {}) {
  const double x = c.x.scalar("x");
  const auto ns = c.n_bar0.values();
  const auto ms = c.m.values();
  RunResult r;
  for (double n : ns) r.n_max = std::max(r.n_max, detail::cutoff(n, c));
  r.table.header = {"m", "n_bar0", "I_RL_equilibrium", "I_classical"};
  r.table.rows = detail::map_points(ms.size() * ns.size(), opt.jobs, [&](std::size_t k) {
    const double m = ms[k / ns.size()];
    const double n = ns[k % ns.size()];
    const SteadyStateInputs in{x, n, m, detail::cutoff(n, c)};
    const double f = conditional_fidelity_sum(n, m, in.n_max);
    return std::vector<double>{m, n, equilibrium_mutual_information(in), classical_mi_measurement(x, f)};
  });
  const double s0 = particle_entropy(x);
  double over = -1.0, deficit = -1.0;
  for (const auto& row : r.table.rows) {
    over = std::max(over, row[2] - s0);
    deficit = std::max(deficit, row[3] - row[2]);
  }
  r.check("I_RL_below_S0", over <= 1e-8, over);
  r.check("classical_below_quantum", deficit <= 1e-6, deficit, "max of I_classical - I_RL");
  return r;
}

// Bayesian click / no-click inference along m: exact success rates and a
// seeded Monte Carlo estimate per point. Point k uses seed + k.
inline RunResult run_bayes(const ExperimentConfig& c, const RunOptions& opt = {}) {
  const double x = c.x.scalar("x");
  const double n = c.n_bar0.scalar("n_bar0");
  const auto ms = c.m.values();
  const int n_max = std::isinf(n) ? 0 : detail::cutoff(n, c);
  RunResult r;
  r.n_max = n_max;
  r.table.header = {"m",           "f",           "p_bright_given_no_click", "p_correct_sample", "p_correct_map",
                    "mc_rate_sample", "mc_stderr_sample", "mc_rate_map", "mc_stderr_map"};
  r.table.rows = detail::map_points(ms.size(), opt.jobs, [&](std::size_t k) {
    const double m = ms[k];
    const double f = std::isinf(n) ? conditional_fidelity_thermo(m) : conditional_fidelity_sum(n, m, n_max);
    const auto mp = bayes::measurement_posterior(x, f);
    const std::uint64_t seed = c.seed + k;
    const auto s = bayes::simulate(x, f, c.trials, seed, bayes::DecisionRule::sample_posterior);
    const auto mm = bayes::simulate(x, f, c.trials, seed, bayes::DecisionRule::map);
    return std::vector<double>{m,        f,
                               mp.no_click.p_bright, mp.p_correct,
                               bayes::expected_success(x, f, bayes::DecisionRule::map), s.rate(),
                               s.standard_error(),   mm.rate(),
                               mm.standard_error()};
  });
  double worst = 0.0;
  for (const auto& row : r.table.rows) {
    const double se = std::max(row[6], 1e-12);
    worst = std::max(worst, std::abs(row[5] - row[3]) / se);
  }
  r.check("seed", true, static_cast<double>(c.seed));
  r.check("mc_within_4_stderr", worst < 4.0, worst, "largest |MC - exact| in standard errors");
  return r;
}

// The invariant suite. Each check is independent of the configuration apart
// from the integrator tolerances.
inline RunResult run_validate(const ExperimentConfig& c, const RunOptions& = {}) {
  RunResult r;
  r.table.header = {"check", "pass", "value"};

  {  // closed form against integrated dynamics
    const ModelParams p = ModelParams::from_m(0.5, 1.0, 1.0, c.tail_tol);
    EvolveOptions eo;
    eo.tolerance = detail::tolerance(c);
    eo.snapshots = 2;
    const Trajectory traj = evolve(p, equilibrium_horizon(p), eo);
    const DensityMatrix numeric = partial_trace(traj.back(), {1});
    const SteadyStateInputs in{p.x, p.n_bar0(), 0.5, p.n_max};
    const double td = trace_distance(numeric, final_cavity_state(in, p.alpha));
    r.check("steady_state_matches_dynamics", td < 1e-4, td);
    const double bright_vac = traj.back()(kBright * (p.n_max + 1), kBright * (p.n_max + 1)).real();
    const double remnant = std::abs(bright_vac - p.x * std::exp(-p.n_bar0()));
    r.check("bright_vacuum_remnant", remnant < 1e-6, remnant);
    r.n_max = p.n_max;
  }
  {  // fidelity two ways
    const SteadyStateInputs in = SteadyStateInputs::make(0.7, 4.0, 0.3, c.tail_tol);
    const cplx alpha(2.0, 0.0);
    const double uhl = uhlmann_fidelity(DensityMatrix::projector(coherent_state(alpha, in.n_max)),
                                        final_cavity_state(in, alpha));
    const double gap = std::abs(uhl - fidelity_F(in));
    r.check("fidelity_closed_form_matches_overlap", gap < 1e-8, gap);
  }
  {  // intensity identity and mixing bounds
    double worst = 0.0, bound = -1.0;
    for (double x : {0.3, 1.0}) {
      for (double n : {1.0, 5.0, 9.0}) {
        const SteadyStateInputs in = SteadyStateInputs::make(x, n, 0.5, c.tail_tol);
        const DensityMatrix rl = final_cavity_state(in, cplx(std::sqrt(n), 0.0));
        const double mean = expectation(number_operator(in.n_max), rl).real();
        worst = std::max(worst, std::abs(mean - final_intensity(x, n)));
        const double sc = von_neumann_entropy(rho_c(cplx(std::sqrt(n), 0.0), 0.5, in.n_max));
        const double sl = von_neumann_entropy(rl);
        bound = std::max({bound, x * sc - sl, sl - particle_entropy(x) - x * sc});
      }
    }
    r.check("intensity_identity", worst < 1e-6, worst);
    r.check("mixing_bounds", bound <= 1e-8, bound, "largest violation");
  }
  {  // critical number
    const double mh = m_half();
    r.check("m_half_window", mh >= 0.085 && mh <= 0.095, mh);
  }
  {  // quantum vs classical mutual information
    double prev_gap = std::numeric_limits<double>::infinity();
    bool ok = true;
    double last = 0.0;
    for (double n : {1.0, 4.0, 9.0}) {
      const SteadyStateInputs in = SteadyStateInputs::make(0.5, n, 0.5, c.tail_tol);
      const double gap =
          equilibrium_mutual_information(in) - classical_mi_measurement(0.5, conditional_fidelity_sum(n, 0.5, in.n_max));
      ok = ok && gap >= -1e-6 && gap < prev_gap;
      prev_gap = gap;
      last = gap;
    }
    r.check("quantum_classical_mi_converge", ok, last);
  }
  {  // Bayes sampling rule
    const auto mc = bayes::simulate(0.5, 0.5, 100000, c.seed, bayes::DecisionRule::sample_posterior);
    const double z = std::abs(mc.rate() - bayes::p_correct(0.5)) / mc.standard_error();
    r.check("bayes_monte_carlo", z < 4.0, z, "standard errors");
  }
  {  // displacement round trip
    const DensityMatrix rho = final_cavity_state(SteadyStateInputs::make(0.5, 2.0, 0.2, c.tail_tol), cplx(std::sqrt(2.0), 0.0));
    const DensityMatrix back = displace(displace(rho, cplx(0.4, -0.3)), cplx(-0.4, 0.3));
    const double err = (back.matrix() - rho.matrix()).cwiseAbs().maxCoeff();
    r.check("displacement_round_trip", err < 1e-8, err);
  }

  for (std::size_t i = 0; i < r.checks.size(); ++i) {
    r.table.rows.push_back({static_cast<double>(i), r.checks[i].pass ? 1.0 : 0.0, r.checks[i].value});
  }
  return r;
}

inline RunResult run_experiment(const ExperimentConfig& c, const RunOptions& opt = {}) {
  static const std::map<std::string, std::function<RunResult(const ExperimentConfig&, const RunOptions&)>> table{
      {"qfunc", run_qfunc},           {"fidelity-contour", run_fidelity_contour},
      {"fidelity-curve", run_fidelity_curve}, {"evolve-entropy", run_evolve_entropy},
      {"mi-sweep", run_mi_sweep},     {"bayes", run_bayes},
      {"validate", run_validate}};
  return table.at(c.experiment)(c, opt);
}

// ---------------------------------------------------------------------------
// Manifest and files

inline json manifest(const ExperimentConfig& c, const RunResult& r, double wall_seconds) {
  json checks = json::array();
  for (const auto& ch : r.checks) {
    json e{{"name", ch.name}, {"pass", ch.pass}, {"value", ch.value}};
    if (!ch.detail.empty()) e["detail"] = ch.detail;
    checks.push_back(std::move(e));
  }
  return json{{"config", c.echo},
              {"n_max", r.n_max},
              {"wall_time_s", wall_seconds},
              {"version", kVersion},
              {"all_checks_pass", r.all_pass()},
              {"checks", std::move(checks)}};
}

inline std::filesystem::path manifest_path(const std::filesystem::path& csv) {
  std::filesystem::path p = csv;
  p.replace_extension(".manifest.json");
  return p;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

}  // namespace cavity_entropy::cli
