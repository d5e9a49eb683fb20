// Copyright 2026 The qalab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "qalab/config.hpp"
#include "qalab/experiment.hpp"
#include "qalab/spectral.hpp"
// httplib after Eigen: resolv.h defines macros that collide with Eigen internals.
#include "qalab/annealer_client.hpp"
#include "qalab/mock_server.hpp"

#include <CLI11.hpp>

namespace qalab::cli {

#ifndef QALAB_VERSION
#define QALAB_VERSION "0.0.0-dev"
#endif

inline constexpr const char* kVersion = QALAB_VERSION;

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,         // unexpected internal error
  kConfigError = 2,     // bad arguments, unreadable or invalid config
  kFitFailed = 3,       // decay fit failed; partial outputs kept
  kSamplerFailed = 4,   // backend or transport failure
  kNumericalError = 5,  // degenerate spectrum, integration or convergence failure
};

namespace fs = std::filesystem;

/// Writes to a sibling temporary file and renames it into place, so readers
/// never observe a partially written file.
inline void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error(fmt::format("cannot write '{}'", tmp.string()));
    f << content;
    f.flush();
    if (!f) throw std::runtime_error(fmt::format("cannot write '{}'", tmp.string()));
  }
  fs::rename(tmp, path);
}

inline std::string utc_now() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(std::chrono::system_clock::now())));
}

/// Options shared by every subcommand after parsing.
struct Invocation {
  std::string command;
  AppConfig config;
  fs::path out;
  std::size_t threads = 1;
  std::string mode = "survival";  // sweep only
  std::string endpoint;           // submit only; overrides env and config
};

/// What a subcommand produced; the driver turns it into a manifest.
struct Outcome {
  int code = kOk;
  std::string error;
  std::vector<fs::path> outputs;
  Json summary = Json::object();
};

// --- helpers ----------------------------------------------------------------

inline std::string csv_row(std::initializer_list<double> xs) {
  std::string row;
  for (double x : xs) {
    if (!row.empty()) row += ',';
    row += format_scalar(x);
  }
  return row + '\n';
}

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Default h_d grid: 0.01, 0.02, ..., 1.00.
inline std::vector<double> default_hd_grid() {
  std::vector<double> g(100);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<double>(i + 1) / 100.0;
  return g;
}

inline std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

inline std::unique_ptr<Sampler> make_sampler(const Invocation& inv, bool force_remote) {
  const AppConfig& c = inv.config;
  if (!force_remote && c.experiment.sampler == SamplerKind::simulated) {
    return std::make_unique<SimulatedSampler>(make_simulated_sampler(c.experiment));
  }
  std::string endpoint = inv.endpoint;
  if (endpoint.empty()) endpoint = env_or_empty("QALAB_ENDPOINT");
  if (endpoint.empty()) endpoint = c.backend.endpoint;
  if (endpoint.empty()) {
    throw ConfigError("remote sampling needs an endpoint (--endpoint, QALAB_ENDPOINT or backend.endpoint)");
  }
  try {
    return std::make_unique<RemoteSampler>(endpoint, env_or_empty("QALAB_TOKEN"), c.backend.remote);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

inline Json decay_summary(const DecayFit& fit) {
  Json j = fit_json(fit);
  j["iterations"] = fit.iterations;
  return j;
}

// --- subcommands -------------------------------------------------------------

/// CSV h_d,gap,transition_element_z; the element is nan where E0 or E1 is
/// degenerate.
inline Outcome cmd_spectrum(const Invocation& inv) {
  const ModelParams& p = inv.config.experiment.params;
  const std::vector<double> grid = inv.config.hd_grid.empty() ? default_hd_grid() : inv.config.hd_grid;
  const AnnealingHamiltonian ham(p);
  const HermitianOperator op = pauli(Axis::z, 1, p.n_qubits);
  std::string csv = "h_d,gap,transition_element_z\n";
  for (double hd : grid) {
    const EigenSystem sys = eigensystem(ham.at(hd));
    double elem = kNaN;
    try {
      elem = transition_matrix_element(sys, 0, 1, op);
    } catch (const DegenerateSpectrumError&) {
    }
    csv += csv_row({hd, sys.gap(), elem});
  }
  write_atomic(inv.out, csv);
  Outcome o;
  o.outputs.push_back(inv.out);
  const GapCrossing x = find_gap_crossing(p, 0.75);
  o.summary["gap_crossing_0.75"] = {{"h_d", x.h_d}, {"gap", x.gap}, {"exact_root", x.exact_root}};
  return o;
}

/// T1 experiment: curve.csv, then fit.json when the fit succeeds.
inline Outcome run_relax(const Invocation& inv, bool force_remote) {
  const auto sampler = make_sampler(inv, force_remote);
  Outcome o;
  const SurvivalCurve curve = run_t1_experiment(inv.config.experiment, *sampler, inv.threads);
  const fs::path curve_path = inv.out / "curve.csv";
  write_atomic(curve_path, curve_csv(curve));
  o.outputs.push_back(curve_path);
  try {
    const DecayFit fit = fit_exponential(curve);
    const fs::path fit_path = inv.out / "fit.json";
    write_atomic(fit_path, fit_json(fit).dump(2) + "\n");
    o.outputs.push_back(fit_path);
    o.summary["fit"] = decay_summary(fit);
  } catch (const FitError& e) {
    o.code = kFitFailed;
    o.error = e.what();
  }
  return o;
}

inline Outcome cmd_relax(const Invocation& inv) { return run_relax(inv, false); }
inline Outcome cmd_submit(const Invocation& inv) { return run_relax(inv, true); }

/// --mode survival: sweep.csv h_d,survival at the fixed hold time schedule.t2.
/// --mode t1: t1_sweep.csv h_d,t1_us,t1_sd_us,a,residual (nan for failed
/// fits) plus every survival curve in curves.csv.
inline Outcome cmd_sweep(const Invocation& inv) {
  const AppConfig& c = inv.config;
  if (c.hd_grid.empty()) throw ConfigError("sweep needs 'schedule.h_d_grid'");
  const auto sampler = make_sampler(inv, false);
  Outcome o;
  if (inv.mode == "survival") {
    const auto pts = sweep_hd(c.experiment, c.hd_grid, c.sweep_t2, *sampler, inv.threads);
    std::string csv = "h_d,survival\n";
    for (const auto& [hd, p] : pts) csv += csv_row({hd, p});
    const fs::path path = inv.out / "sweep.csv";
    write_atomic(path, csv);
    o.outputs.push_back(path);
    return o;
  }
  const T1Sweep sweep = sweep_t1_vs_hd(c.experiment, c.hd_grid, *sampler, inv.threads);
  std::string table = "h_d,t1_us,t1_sd_us,a,residual\n";
  std::string curves = "h_d,t2_us,survival,shots\n";
  Json errors = Json::array();
  for (const auto& pt : sweep.points) {
    if (pt.fit) {
      table += csv_row({pt.h_d, pt.fit->t1, std::sqrt(pt.fit->covariance(1, 1)), pt.fit->a, pt.fit->residual});
    } else {
      table += csv_row({pt.h_d, kNaN, kNaN, kNaN, kNaN});
      errors.push_back({{"h_d", pt.h_d}, {"error", pt.error}});
    }
    for (const auto& s : pt.curve.points) {
      curves += fmt::format("{},{},{},{}\n", format_scalar(pt.h_d), format_scalar(s.t2), format_scalar(s.survival),
                            s.shots);
    }
  }
  const fs::path table_path = inv.out / "t1_sweep.csv";
  const fs::path curves_path = inv.out / "curves.csv";
  write_atomic(table_path, table);
  write_atomic(curves_path, curves);
  o.outputs = {table_path, curves_path};
  Json minima = Json::array();
  for (std::size_t i : sweep.local_minima()) minima.push_back(sweep.points[i].h_d);
  o.summary["strictly_increasing"] = sweep.strictly_increasing();
  o.summary["local_minima_h_d"] = minima;
  if (const auto m = sweep.argmin()) o.summary["argmin_h_d"] = sweep.points[*m].h_d;
  if (!errors.empty()) {
    o.summary["fit_errors"] = errors;
    o.code = kFitFailed;
    o.error = fmt::format("{} of {} fits failed", errors.size(), sweep.points.size());
  }
  return o;
}

/// CSV t_us,entropy over the protocol with hold time schedule.t2.
inline Outcome cmd_entropy(const Invocation& inv) {
  const AppConfig& c = inv.config;
  const RqaSchedule s = c.experiment.schedule(c.sweep_t2);
  std::vector<double> times(c.entropy_points);
  for (std::size_t i = 0; i < times.size(); ++i) {
    times[i] = s.total() * static_cast<double>(i) / static_cast<double>(times.size() - 1);
  }
  std::string csv = "t_us,entropy\n";
  for (const auto& [t, e] : entropy_along_schedule(c.experiment.params, s, times)) csv += csv_row({t, e});
  write_atomic(inv.out, csv);
  Outcome o;
  o.outputs.push_back(inv.out);
  return o;
}

/// CSV lambda,elem_4q,elem_1q,slope_4q,slope_1q for the fully connected and
/// single-qubit presets on noise.axis; slopes are local log-log slopes over
/// each point and its grid neighbours. Global slopes go to the summary.
inline Outcome cmd_perturb_check(const Invocation& inv) {
  const std::vector<double>& lam = inv.config.lambda_grid;
  if (lam.size() < 2) throw ConfigError("'experiment.lambda_grid' needs at least two points");
  const Axis axis = inv.config.experiment.noise.axis;
  const auto e4 = transition_elements_vs_lambda(ModelParams::fully_connected(), axis, lam);
  const auto e1 = transition_elements_vs_lambda(ModelParams::single_qubit(), axis, lam);
  const auto local = [&](const std::vector<double>& y, std::size_t i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = std::min(i + 1, lam.size() - 1);
    return loglog_slope({lam.begin() + static_cast<std::ptrdiff_t>(a), lam.begin() + static_cast<std::ptrdiff_t>(b) + 1},
                        {y.begin() + static_cast<std::ptrdiff_t>(a), y.begin() + static_cast<std::ptrdiff_t>(b) + 1});
  };
  std::string csv = "lambda,elem_4q,elem_1q,slope_4q,slope_1q\n";
  for (std::size_t i = 0; i < lam.size(); ++i) csv += csv_row({lam[i], e4[i], e1[i], local(e4, i), local(e1, i)});
  write_atomic(inv.out, csv);
  Outcome o;
  o.outputs.push_back(inv.out);
  o.summary["axis"] = axis_name(axis);
  o.summary["slope_4q"] = loglog_slope(lam, e4);
  o.summary["slope_1q"] = loglog_slope(lam, e1);
  return o;
}

// --- driver -------------------------------------------------------------------

inline fs::path manifest_path(const Invocation& inv) {
  if (inv.command == "spectrum" || inv.command == "entropy" || inv.command == "perturb-check") {
    fs::path p = inv.out;
    p += ".manifest.json";
    return p;
  }
  return inv.out / "manifest.json";
}

/// Manifest: code version, command, seed, UTC timestamps, the fully
/// expanded config and the output paths (relative to the manifest). Passing
/// it back as --config reproduces the outputs.
inline void write_manifest(const Invocation& inv, const Outcome& o, const std::string& started) {
  const fs::path path = manifest_path(inv);
  const fs::path base = fs::absolute(path).parent_path();
  Json m;
  m["qalab_version"] = kVersion;
  m["command"] = inv.command;
  if (inv.command == "sweep") m["mode"] = inv.mode;
  m["seed"] = inv.config.experiment.seed;
  m["started_utc"] = started;
  m["finished_utc"] = utc_now();
  m["exit_code"] = o.code;
  if (!o.error.empty()) m["error"] = o.error;
  Json outs = Json::array();
  for (const auto& p : o.outputs) outs.push_back(fs::absolute(p).lexically_relative(base).generic_string());
  m["outputs"] = outs;
  m["summary"] = o.summary;
  m["config"] = config_to_json(inv.config);
  write_atomic(path, m.dump(2) + "\n");
}

inline Outcome dispatch(const Invocation& inv) {
  if (inv.command == "spectrum") return cmd_spectrum(inv);
  if (inv.command == "relax") return cmd_relax(inv);
  if (inv.command == "sweep") return cmd_sweep(inv);
  if (inv.command == "entropy") return cmd_entropy(inv);
  if (inv.command == "perturb-check") return cmd_perturb_check(inv);
  if (inv.command == "submit") return cmd_submit(inv);
  throw ConfigError(fmt::format("unknown command '{}'", inv.command));
}

/// Runs one analysis command and writes its manifest. Errors after the
/// config is accepted still produce a manifest describing the failure.
inline int execute(const Invocation& inv, std::ostream& out, std::ostream& err) {
  const std::string started = utc_now();
  Outcome o;
  try {
    o = dispatch(inv);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const FitError& e) {
    o.code = kFitFailed;
    o.error = e.what();
  } catch (const SamplerError& e) {
    o.code = kSamplerFailed;
    o.error = e.what();
  } catch (const ClientError& e) {
    o.code = kSamplerFailed;
    o.error = e.what();
  } catch (const Error& e) {
    o.code = kNumericalError;
    o.error = e.what();
  }
  write_manifest(inv, o, started);
  for (const auto& p : o.outputs) out << "wrote " << p.generic_string() << '\n';
  if (!o.summary.empty()) out << o.summary.dump() << '\n';
  if (o.code != kOk) err << "error: " << o.error << '\n';
  return o.code;
}

/// Serves the job protocol locally until the process is killed.
inline int serve_mock(const AppConfig& cfg, int port, const std::string& token, unsigned pending_polls,
                      std::ostream& out) {
  MockAnnealServer server(cfg.experiment.noise, cfg.experiment.seed, token, pending_polls, cfg.experiment.evolution);
  server.start(port);
  out << server.endpoint() << std::endl;
  for (;;) std::this_thread::sleep_for(std::chrono::hours(1));
}

/// Entry point: parses argv, loads the config and runs the subcommand.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"qalab: reverse-annealing relaxation lab"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  app.add_option("--config", config_path, "JSON config (or a run manifest)");
  app.add_option("--out", out_path, "output file or directory");
  app.add_option("--seed", seed, "override experiment.seed");
  app.add_option("--threads", threads, "worker threads (0 = all cores)");

  app.add_subcommand("spectrum", "gap and transition element against h_d (CSV file)");
  app.add_subcommand("relax", "T1 experiment: survival curve and exponential fit (directory)");
  std::string mode = "survival";
  app.add_subcommand("sweep", "survival or T1 against h_d (directory)")
      ->add_option("--mode", mode, "survival | t1")
      ->check(CLI::IsMember({"survival", "t1"}));
  app.add_subcommand("entropy", "entanglement entropy along the protocol (CSV file)");
  app.add_subcommand("perturb-check", "transition elements against lambda (CSV file)");
  std::string endpoint;
  app.add_subcommand("submit", "T1 experiment on a remote sampler (directory)")
      ->add_option("--endpoint", endpoint, "service URL (default: QALAB_ENDPOINT, then backend.endpoint)");
  int port = 0;
  std::string token;
  unsigned pending_polls = 1;
  auto* mock = app.add_subcommand("mock-server", "serve the job protocol locally (runs until killed)");
  mock->add_option("--port", port, "port on 127.0.0.1 (0 = any free port)");
  mock->add_option("--token", token, "bearer token required from clients");
  mock->add_option("--pending-polls", pending_polls, "status requests answered 'pending' per job");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  Invocation inv;
  inv.command = app.get_subcommands().front()->get_name();
  inv.mode = mode;
  inv.endpoint = endpoint;
  inv.threads = threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : threads;
  try {
    if (!config_path.empty()) inv.config = load_config(config_path);
    if (seed) inv.config.experiment.seed = *seed;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  if (inv.command == "mock-server") return serve_mock(inv.config, port, token, pending_polls, out);
  if (out_path.empty()) {
    err << "error: --out is required\n";
    return kConfigError;
  }
  inv.out = out_path;
  try {
    return execute(inv, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace qalab::cli
