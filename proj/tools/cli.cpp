#include "cli.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "xcorr/bounds.hpp"
#include "xcorr/errors.hpp"
#include "xcorr/estimator.hpp"
#include "xcorr/kernel.hpp"
#include "xcorr/montecarlo.hpp"
#include "xcorr/signal.hpp"
#include "xcorr/spectral.hpp"

namespace xcorr::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string fmt(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

template <class T>
T get_or(const ordered_json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("config key '") + key + "': " + e.what());
  }
}

template <class T>
T require(const ordered_json& j, const char* key) {
  if (!j.contains(key)) throw InvalidInput(std::string("config key '") + key + "' is required");
  return get_or<T>(j, key, T{});
}

Kernel parse_kernel(const ordered_json& j) {
  if (j.is_string()) return make_named_kernel(j.get<std::string>());
  if (!j.is_object()) throw InvalidInput("kernel must be a name or an object");
  const auto kind = require<std::string>(j, "kind");
  if (kind == "tabulated") return load_tabulated_csv(require<std::string>(j, "path"));
  return make_named_kernel(kind, get_or(j, "delta", 1.0), get_or(j, "c", 1.0));
}

KernelFamily parse_family(const ordered_json& cfg) {
  const double c = get_or(cfg, "c", 1.0);
  const auto& j = cfg.contains("family") ? cfg.at("family") : ordered_json("triangular");
  if (j.is_string()) return make_named_family(j.get<std::string>(), c);
  if (!j.is_object()) throw InvalidInput("family must be a name or an object");
  return make_named_family(require<std::string>(j, "kind"), get_or(j, "c", c));
}

NoiseSeed parse_seed(const ordered_json& cfg) {
  return {get_or<std::uint64_t>(cfg, "seed", 0), get_or<std::uint64_t>(cfg, "stream_id", 0)};
}

SimulationOptions parse_simulation(const ordered_json& cfg) {
  SimulationOptions s;
  s.truncation_radius = get_or(cfg, "truncation_radius", s.truncation_radius);
  if (!(s.truncation_radius > 0.0)) throw InvalidParameter("truncation_radius must be positive");
  return s;
}

RiemannRule parse_rule(const ordered_json& cfg) {
  const auto r = get_or<std::string>(cfg, "rule", "left");
  if (r == "left") return RiemannRule::left;
  if (r == "trapezoid") return RiemannRule::trapezoid;
  throw InvalidInput("unknown rule '" + r + "'");
}

void write_json(const ordered_json& j, const fs::path& file) {
  std::ofstream f(file);
  if (!f) throw InvalidInput("cannot write " + file.string());
  f << j.dump(2) << '\n';
}

ordered_json check_json(const ConditionCheck& c) {
  return {{"passed", c.passed}, {"evidence", c.evidence}, {"detail", c.detail}};
}

struct Session {
  fs::path dir;
  RunManifest manifest;

  Session(const RunOptions& opts, const std::string& command) {
    manifest.command = command;
    manifest.started_utc = utc_now();
    manifest.config = load_config(opts.config, command);
    manifest.config_digest = config_digest(manifest.config);
    dir = resolve_out_dir(opts, manifest.config);
    fs::create_directories(dir);
  }
  const ordered_json& cfg() const { return manifest.config; }
  fs::path add(const std::string& name) {
    manifest.outputs.push_back(name);
    return dir / name;
  }
  void warn(const std::string& w) {
    std::cerr << "warning: " << w << '\n';
    manifest.warnings.push_back(w);
  }
  void finish() {
    manifest.finished_utc = utc_now();
    write_manifest(manifest, dir);
  }
};

// Settings shared by the bounds and montecarlo commands.
struct BoundSettings {
  std::vector<std::string> methods;
  std::vector<double> x_values{4.0, 6.0, 8.0};
  std::vector<double> theorem4_multiples{1.5, 2.0, 3.0};
  std::vector<double> taus;
  double confidence = 0.9;
  double gamma = 0.5;
  Theorem4Options t4;
  std::size_t y_samples = 4000;
};

BoundSettings parse_bound_settings(const ordered_json& j, std::vector<double> default_taus) {
  BoundSettings s;
  s.methods = get_or<std::vector<std::string>>(
      j, "methods", {"theorem3_pointwise", "theorem4_sup", "corollary1", "corollary2"});
  s.x_values = get_or(j, "x_values", s.x_values);
  s.theorem4_multiples = get_or(j, "theorem4_multiples", s.theorem4_multiples);
  s.taus = get_or(j, "taus", default_taus);
  s.confidence = get_or(j, "confidence", s.confidence);
  s.gamma = get_or(j, "gamma", s.gamma);
  s.t4.r = get_or(j, "r", s.t4.r);
  const auto mode = get_or<std::string>(j, "rho_mode", "surrogate");
  if (mode == "surrogate") {
    s.t4.mode = RhoMode::surrogate;
  } else if (mode == "exact") {
    s.t4.mode = RhoMode::exact;
  } else {
    throw InvalidInput("unknown rho_mode '" + mode + "'");
  }
  if (j.contains("g_family_sup")) s.t4.g_family_sup = get_or(j, "g_family_sup", 1.0);
  s.t4.rho_upper_factor = get_or(j, "rho_upper_factor", s.t4.rho_upper_factor);
  s.y_samples = get_or<std::size_t>(j, "y_samples", s.y_samples);
  for (const auto& m : s.methods)
    if (m != "theorem3_pointwise" && m != "theorem4_sup" && m != "corollary1" && m != "corollary2")
      throw InvalidInput("unknown bound method '" + m + "'");
  if (!(s.confidence > 0.0 && s.confidence < 1.0)) throw InvalidParameter("confidence must lie in (0, 1)");
  return s;
}

struct BoundOutcome {
  std::vector<TailBoundReport> reports;
  std::vector<ordered_json> failures;  // methods that produced no bound
};

// Y-sup samples feed the corollaries; `y_abs`/`y_max` may be supplied by the caller.
BoundOutcome compute_bounds(const BoundSettings& s, const CovarianceModel& model, double T, double a,
                            double b, std::vector<double> y_abs, std::vector<double> y_max,
                            double lattice_dt, NoiseSeed seed) {
  BoundOutcome out;
  auto has = [&](const char* m) { return std::find(s.methods.begin(), s.methods.end(), m) != s.methods.end(); };
  if (has("theorem3_pointwise")) {
    const double u = two_k_inverse(1.0 - s.confidence);
    for (double tau : s.taus) {
      const double var = cov_finite(model, T, tau, tau);
      std::vector<double> xs{u * std::sqrt(std::max(var, 0.0))};
      auto rep = theorem3_report(var, xs);
      rep.constants["tau"] = tau;
      rep.constants["confidence"] = s.confidence;
      rep.constants["half_width"] = pointwise_ci(var, T, s.confidence);
      out.reports.push_back(std::move(rep));
    }
  }
  if (has("theorem4_sup")) {
    try {
      const auto k = theorem4_constants(model, T, a, b, s.t4);
      std::vector<double> xs;
      for (double m : s.theorem4_multiples) xs.push_back(m * k.A_TDelta);
      out.reports.push_back(theorem4_report(k, xs));
    } catch (const DegenerateBound& e) {
      out.failures.push_back({{"method", "theorem4_sup"}, {"error", "degenerate"}, {"message", e.what()}});
    } catch (const BoundUnavailable& e) {
      out.failures.push_back({{"method", "theorem4_sup"}, {"error", "unavailable"}, {"message", e.what()}});
    }
  }
  if (has("corollary1") || has("corollary2")) {
    if (y_abs.empty()) {
      std::vector<double> lattice;
      for (long k = std::lround(std::ceil(a / lattice_dt - 1e-9)); k * lattice_dt <= b + 1e-9 * lattice_dt; ++k)
        lattice.push_back(static_cast<double>(k) * lattice_dt);
      const auto Yd = sample_output_Y(model.h, lattice, s.y_samples, seed);
      for (Eigen::Index r = 0; r < Yd.rows(); ++r) {
        y_abs.push_back(Yd.row(r).cwiseAbs().maxCoeff());
        y_max.push_back(Yd.row(r).maxCoeff());
      }
    }
    // Strict tails P{sup > x}.
    auto strict = [](const std::vector<double>& v) {
      return [v](double x) {
        const auto hits = std::count_if(v.begin(), v.end(), [x](double s) { return s > x; });
        return static_cast<double>(hits) / static_cast<double>(v.size());
      };
    };
    if (has("corollary1")) {
      auto rep = corollary1_report(model.h, a, b, s.gamma, s.x_values, strict(y_max));
      rep.settings["y_samples"] = y_max.size();
      rep.settings["lattice_dt"] = lattice_dt;
      out.reports.push_back(std::move(rep));
    }
    if (has("corollary2")) {
      auto rep = corollary2_report(model.h, a, b, s.x_values, strict(y_abs));
      rep.settings["y_samples"] = y_abs.size();
      rep.settings["lattice_dt"] = lattice_dt;
      out.reports.push_back(std::move(rep));
    }
  }
  return out;
}

// One file per method; pointwise reports are collected into one array.
bool write_bound_outputs(Session& s, const BoundOutcome& b) {
  bool failed = !b.failures.empty();
  ordered_json pointwise = ordered_json::array();
  for (const auto& r : b.reports) {
    failed = failed || r.degenerate;
    if (r.method == BoundMethod::theorem3_pointwise) {
      pointwise.push_back(to_json(r));
    } else {
      write_json(to_json(r), s.add("bound_" + to_string(r.method) + ".json"));
    }
  }
  if (!pointwise.empty()) write_json(pointwise, s.add("bound_theorem3_pointwise.json"));
  for (const auto& f : b.failures) {
    write_json(f, s.add("bound_" + f.at("method").get<std::string>() + ".json"));
    std::cerr << f.at("method").get<std::string>() << ": " << f.at("message").get<std::string>() << '\n';
  }
  return !failed;
}

ExperimentConfig parse_experiment(const ordered_json& cfg) {
  ExperimentConfig e;
  e.h = parse_kernel(cfg.contains("h") ? cfg.at("h") : ordered_json("sinc"));
  e.g_family = parse_family(cfg);
  e.T = get_or(cfg, "T", e.T);
  e.delta = get_or(cfg, "delta", e.delta);
  e.dt = get_or(cfg, "dt", e.dt);
  e.tau_grid = get_or(cfg, "tau_grid", e.tau_grid);
  const auto M = get_or<long long>(cfg, "replications", static_cast<long long>(e.replications));
  if (M < 2) throw InvalidParameter("replications must be at least 2");
  e.replications = static_cast<std::size_t>(M);
  e.base_seed = parse_seed(cfg);
  const auto interval = get_or<std::vector<double>>(cfg, "interval", {e.a, e.b});
  if (interval.size() != 2) throw InvalidInput("interval must have two entries");
  e.a = interval[0];
  e.b = interval[1];
  e.simulation = parse_simulation(cfg);
  e.rule = parse_rule(cfg);
  e.limit_samples = get_or<std::size_t>(cfg, "limit_samples", 0);
  e.validate();
  return e;
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string config_digest(const ordered_json& config) { return fnv1a_hex(config.dump()); }

void write_manifest(const RunManifest& m, const fs::path& dir) {
  ordered_json j;
  j["command"] = m.command;
  j["config_digest"] = m.config_digest;
  j["artifact_version"] = m.artifact_version;
  j["started_utc"] = m.started_utc;
  j["finished_utc"] = m.finished_utc;
  j["outputs"] = m.outputs;
  j["warnings"] = m.warnings;
  j["config"] = m.config;
  write_json(j, dir / "manifest.json");
}

RunManifest read_manifest(const fs::path& file) {
  std::ifstream f(file);
  if (!f) throw InvalidInput("cannot read " + file.string());
  ordered_json j;
  try {
    j = ordered_json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("manifest parse error: ") + e.what());
  }
  RunManifest m;
  m.command = require<std::string>(j, "command");
  m.config_digest = require<std::string>(j, "config_digest");
  m.artifact_version = require<std::string>(j, "artifact_version");
  m.started_utc = get_or<std::string>(j, "started_utc", "");
  m.finished_utc = get_or<std::string>(j, "finished_utc", "");
  m.outputs = get_or<std::vector<std::string>>(j, "outputs", {});
  m.warnings = get_or<std::vector<std::string>>(j, "warnings", {});
  m.config = j.value("config", ordered_json::object());
  if (config_digest(m.config) != m.config_digest) throw InvalidInput("manifest digest mismatch");
  return m;
}

ordered_json load_config(const fs::path& file, const std::string& command) {
  ordered_json doc = ordered_json::object();
  if (!file.empty()) {
    std::ifstream f(file);
    if (!f) throw InvalidInput("cannot read config " + file.string());
    try {
      doc = ordered_json::parse(f);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput(std::string("config parse error: ") + e.what());
    }
    if (!doc.is_object()) throw InvalidInput("config must be a JSON object");
  }
  ordered_json merged = doc.value("command_defaults", ordered_json::object());
  if (!merged.is_object()) throw InvalidInput("command_defaults must be an object");
  if (doc.contains(command)) {
    const auto& sec = doc.at(command);
    if (!sec.is_object()) throw InvalidInput("section '" + command + "' must be an object");
    for (const auto& [k, v] : sec.items()) merged[k] = v;
  }
  return merged;
}

fs::path resolve_out_dir(const RunOptions& opts, const ordered_json& cfg) {
  if (opts.out) return *opts.out;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return get_or<std::string>(cfg, "out_dir", ".");
}

int cmd_check_kernel(const RunOptions& opts) {
  Session s(opts, "check_kernel");
  const auto& cfg = s.cfg();
  const auto family = parse_family(cfg);
  const auto deltas = get_or<std::vector<double>>(cfg, "deltas", {1.0, 10.0, 100.0, 1000.0});
  const double window = get_or(cfg, "lambda_window", 1.0);
  const double tol = get_or(cfg, "tol", 1e-3);
  const auto rep = check_family_conditions(family, deltas, window, tol);

  ordered_json j;
  j["family"] = family.family_name;
  j["c"] = family.c;
  j["deltas"] = rep.deltas;
  j["lambda_window"] = rep.lambda_window;
  j["tol"] = rep.tol;
  j["checks"] = {{"finite_l2", check_json(rep.finite_l2)},
                 {"evenness", check_json(rep.evenness)},
                 {"bounded_transform", check_json(rep.bounded_transform)},
                 {"delta_like", check_json(rep.delta_like)}};
  ordered_json per = ordered_json::array();
  for (std::size_t i = 0; i < rep.deltas.size(); ++i)
    per.push_back({{"delta", rep.deltas[i]},
                   {"l2_norm", rep.l2_norms[i]},
                   {"asymmetry", rep.asymmetry[i]},
                   {"transform_sup", rep.transform_sup[i]},
                   {"window_deviation", rep.window_deviation[i]}});
  j["per_delta"] = per;
  j["family_sup"] = rep.family_sup;
  bool all = rep.all_passed();

  if (cfg.contains("h")) {
    const Kernel h = parse_kernel(cfg.at("h"));
    const double p = get_or(cfg, "hunt_exponent", 2.0);
    const double lmax = get_or(cfg, "hunt_lambda_max", h.band_limit().value_or(h.spectral_extent()));
    const auto w = check_weighted_spectral(h, p, lmax);
    j["h"] = {{"name", h.name()},
              {"hunt_exponent", p},
              {"lambda_max", lmax},
              {"value", w.value},
              {"doubled_value", w.doubled_value},
              {"passed", w.converged}};
    all = all && w.converged;
  }
  j["all_passed"] = all;
  write_json(j, s.add("check_kernel.json"));
  s.finish();
  return all ? ok : domain_failure;
}

int cmd_simulate(const RunOptions& opts) {
  Session s(opts, "simulate");
  const auto& cfg = s.cfg();
  const auto family = parse_family(cfg);
  const auto deltas = get_or<std::vector<double>>(cfg, "deltas", {1.0, 10.0, 100.0, 1000.0});
  if (deltas.empty()) throw InvalidInput("delta ladder is empty");
  TimeGrid grid;
  grid.dt = get_or(cfg, "dt", grid.dt);
  grid.t_start = get_or(cfg, "t_start", 0.0);
  const auto n = get_or<long long>(cfg, "n", 10000);
  if (n <= 0) throw InvalidParameter("n must be positive");
  grid.n = static_cast<std::size_t>(n);
  grid.validate();
  const auto sim = parse_simulation(cfg);
  const auto seed = parse_seed(cfg);

  std::vector<std::pair<std::string, Kernel>> kernels;
  if (cfg.contains("h")) kernels.emplace_back("y", parse_kernel(cfg.at("h")));
  for (double d : deltas) {
    if (!(d > 0.0)) throw InvalidParameter("delta must be positive");
    kernels.emplace_back("x_delta_" + fmt(d), family(d));
  }
  std::size_t pad = 0;
  for (const auto& [name, k] : kernels) {
    pad = std::max(pad, required_pad(k, grid.dt, sim));
    if (auto w = resolution_warning(k, grid.dt, sim)) s.warn(name + ": " + *w);
  }
  const auto inc = wiener_increments(grid, pad, seed);
  for (const auto& [name, k] : kernels) {
    auto path = simulate_output(k, inc, grid, pad, sim);
    path.label = name;
    write_path_csv(path, s.add(name + ".csv"));
    write_path_binary(path, s.add(name + ".bin"));
  }
  s.finish();
  return ok;
}

int cmd_estimate(const RunOptions& opts) {
  Session s(opts, "estimate");
  const auto& cfg = s.cfg();
  const Kernel h = parse_kernel(cfg.contains("h") ? cfg.at("h") : ordered_json("sinc"));
  const auto family = parse_family(cfg);
  const double delta = get_or(cfg, "delta", 100.0);
  const double T = get_or(cfg, "T", 500.0);
  const auto taus = get_or<std::vector<double>>(cfg, "tau_grid", {0.0, 0.5, 1.0});
  const auto sim = parse_simulation(cfg);
  TimeGrid grid;
  grid.dt = get_or(cfg, "dt", grid.dt);
  if (taus.empty()) throw InvalidInput("tau grid is empty");
  const auto [lo, hi] = required_span(T, taus, grid.dt);
  grid.t_start = get_or(cfg, "t_start", std::round(lo / grid.dt) * grid.dt);
  grid.n = get_or<std::size_t>(cfg, "n", static_cast<std::size_t>(std::lround((hi - lo) / grid.dt)) + 2);
  grid.validate();
  const Kernel g = family(delta);
  for (const Kernel* k : {&h, &g})
    if (auto w = resolution_warning(*k, grid.dt, sim)) s.warn(k->name() + ": " + *w);
  const auto seed = parse_seed(cfg);
  const auto [Y, X] = simulate_pair(h, g, grid, seed, sim);
  auto est = estimate(Y, X, h, g, family.c, T, delta, taus, parse_rule(cfg));
  est.seed = seed.seed;
  write_estimate(est, s.add("estimate.csv"), s.add("estimate.json"));
  s.finish();
  return ok;
}

int cmd_bounds(const RunOptions& opts) {
  Session s(opts, "bounds");
  const auto& cfg = s.cfg();
  const auto family = parse_family(cfg);
  const double delta = get_or(cfg, "delta", 100.0);
  const CovarianceModel model{parse_kernel(cfg.contains("h") ? cfg.at("h") : ordered_json("sinc")),
                              family(delta), family.c, {}};
  const double T = get_or(cfg, "T", 500.0);
  const auto interval = get_or<std::vector<double>>(cfg, "interval", {0.0, 1.0});
  if (interval.size() != 2 || !(interval[0] <= interval[1])) throw InvalidInput("interval must be [a, b] with a <= b");
  const auto settings = parse_bound_settings(cfg, get_or<std::vector<double>>(cfg, "tau_grid", {0.0}));
  const auto outcome = compute_bounds(settings, model, T, interval[0], interval[1], {}, {},
                                      get_or(cfg, "dt", 0.01), parse_seed(cfg));
  const bool good = write_bound_outputs(s, outcome);
  s.finish();
  return good ? ok : domain_failure;
}

int cmd_montecarlo(const RunOptions& opts) {
  Session s(opts, "montecarlo");
  const auto& cfg = s.cfg();
  auto e = parse_experiment(cfg);
  e.keep_first_paths = opts.emit_paths;
  for (const Kernel& k : {e.h, e.g_family(e.delta)})
    if (auto w = resolution_warning(k, e.dt, e.simulation)) s.warn(k.name() + ": " + *w);

  const auto result = run_replications(e, opts.workers);
  for (const auto& name : write_results(result, e, s.dir)) s.manifest.outputs.push_back(name);

  bool good = true;
  if (cfg.contains("bounds")) {
    const CovarianceModel model{e.h, e.g_family(e.delta), e.c(), {}};
    const auto settings = parse_bound_settings(cfg.at("bounds"), result.tau_grid);
    const auto outcome = compute_bounds(settings, model, e.T, e.a, e.b, result.y_sup_abs, result.y_sup,
                                        e.dt, NoiseSeed{e.base_seed.seed ^ 0xa5a5a5a5a5a5a5a5ULL, e.base_seed.stream_id});
    good = write_bound_outputs(s, outcome);
    const auto rows = ci_coverage(result, outcome.reports);
    std::ofstream f(s.add("coverage.csv"));
    f << "method,x,empirical,se,bound,valid\n";
    for (const auto& r : rows)
      f << r.method << ',' << fmt(r.x) << ',' << fmt(r.empirical) << ',' << fmt(r.se) << ','
        << fmt(r.bound) << ',' << (r.valid ? 1 : 0) << '\n';
  }
  if (cfg.contains("h_ladder")) {
    const auto hs = get_or<std::vector<double>>(cfg, "h_ladder", {});
    const auto ds = get_or<std::vector<double>>(cfg, "delta_thresholds", {0.5});
    const auto rows = modulus_of_continuity(result, hs, ds);
    std::ofstream f(s.add("moduli.csv"));
    f << "h,delta,probability,se\n";
    for (const auto& r : rows)
      f << fmt(r.h) << ',' << fmt(r.delta) << ',' << fmt(r.probability) << ',' << fmt(r.se) << '\n';
  }
  if (opts.emit_paths) write_paths_long(result, s.add("paths_long.csv"));
  s.finish();
  return good ? ok : domain_failure;
}

int run(int argc, char** argv) {
  CLI::App app{"Cross-correlogram impulse-response estimation experiments"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  RunOptions opts;
  std::string out;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "JSON config file")->required();
    sub->add_option("--out", out, "output directory (overrides " + std::string(kOutDirEnv) + ")");
  };
  auto* check = app.add_subcommand("check-kernel", "check the δ-family conditions");
  auto* simulate = app.add_subcommand("simulate", "simulate output paths for a Δ ladder");
  auto* est = app.add_subcommand("estimate", "one replication of the cross-correlogram");
  auto* bounds = app.add_subcommand("bounds", "tail bounds over an x grid");
  auto* mc = app.add_subcommand("montecarlo", "replication harness");
  for (auto* sub : {check, simulate, est, bounds, mc}) add_common(sub);
  mc->add_option("--workers", opts.workers, "worker threads")->check(CLI::PositiveNumber);
  mc->add_flag("--emit-paths", opts.emit_paths, "write the first replication's paths");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ok : usage_error;
  }
  if (!out.empty()) opts.out = out;

  try {
    if (check->parsed()) return cmd_check_kernel(opts);
    if (simulate->parsed()) return cmd_simulate(opts);
    if (est->parsed()) return cmd_estimate(opts);
    if (bounds->parsed()) return cmd_bounds(opts);
    return cmd_montecarlo(opts);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage_error;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return usage_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return domain_failure;
  }
}

}  // namespace xcorr::cli
