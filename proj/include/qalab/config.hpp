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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "qalab/errors.hpp"
#include "qalab/experiment.hpp"
#include "qalab/spectral.hpp"

namespace qalab {

/// Remote backend settings. The endpoint may also come from QALAB_ENDPOINT.
struct BackendConfig {
  std::string endpoint;
  RemoteOptions remote;
};

/// Everything a CLI run needs, read from one JSON document with sections
/// model, schedule, noise, experiment and backend.
struct AppConfig {
  ExperimentConfig experiment;
  std::vector<double> hd_grid;        // spectrum and sweeps
  double sweep_t2 = 0.0;              // fixed hold time for survival sweeps
  std::size_t entropy_points = 101;   // samples of the entropy profile
  std::vector<double> lambda_grid = log_grid(1e-3, 1e-1);
  BackendConfig backend;
};

namespace config_detail {

[[noreturn]] inline void fail(const std::string& what) { throw ConfigError(what); }

inline void only_keys(const Json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) fail(fmt::format("'{}' must be an object", where));
  for (const auto& [k, v] : obj.items()) {
    bool known = false;
    for (const char* allowed : keys) known = known || k == allowed;
    if (!known) fail(fmt::format("unknown key '{}' in '{}'", k, where));
  }
}

inline double number(const Json& v, const std::string& what) {
  if (!v.is_number()) fail(fmt::format("'{}' must be a number", what));
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(fmt::format("'{}' must be finite", what));
  return x;
}

inline std::uint64_t count(const Json& v, const std::string& what) {
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    fail(fmt::format("'{}' must be a non-negative integer", what));
  }
  return v.get<std::uint64_t>();
}

inline std::string text(const Json& v, const std::string& what) {
  if (!v.is_string()) fail(fmt::format("'{}' must be a string", what));
  return v.get<std::string>();
}

inline bool flag(const Json& v, const std::string& what) {
  if (!v.is_boolean()) fail(fmt::format("'{}' must be true or false", what));
  return v.get<bool>();
}

template <class F>
void with(const Json& obj, const char* key, F&& f) {
  if (const auto it = obj.find(key); it != obj.end()) f(*it);
}

/// A grid is a list of numbers or {"start", "stop", "num"[, "log"]}
/// (both ends included).
inline std::vector<double> grid(const Json& v, const std::string& what) {
  std::vector<double> out;
  if (v.is_array()) {
    for (const auto& x : v) out.push_back(number(x, what));
    return out;
  }
  only_keys(v, what, {"start", "stop", "num", "log"});
  if (!v.contains("start") || !v.contains("stop") || !v.contains("num")) {
    fail(fmt::format("'{}' needs start, stop and num", what));
  }
  const double a = number(v["start"], what + ".start");
  const double b = number(v["stop"], what + ".stop");
  const std::uint64_t n = count(v["num"], what + ".num");
  const bool log = v.contains("log") && flag(v["log"], what + ".log");
  if (n < 1) fail(fmt::format("'{}.num' must be >= 1", what));
  if (log && !(a > 0.0 && b > 0.0)) fail(fmt::format("'{}' log grid needs positive ends", what));
  for (std::uint64_t i = 0; i < n; ++i) {
    const double u = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    out.push_back(log ? a * std::pow(b / a, u) : a + (b - a) * u);
  }
  if (n > 1) out.back() = b;
  return out;
}

inline void read_model(const Json& m, ModelParams& p) {
  only_keys(m, "model", {"preset", "n_qubits", "coupling", "longitudinal", "transverse", "energy_scale"});
  with(m, "preset", [&](const Json& v) {
    const std::string name = text(v, "model.preset");
    if (name == "fully_connected") {
      p = ModelParams::fully_connected();
    } else if (name == "single_qubit") {
      p = ModelParams::single_qubit();
    } else {
      fail(fmt::format("unknown model preset '{}' (fully_connected | single_qubit)", name));
    }
  });
  with(m, "n_qubits", [&](const Json& v) { p.n_qubits = count(v, "model.n_qubits"); });
  with(m, "coupling", [&](const Json& v) { p.coupling = number(v, "model.coupling"); });
  with(m, "longitudinal", [&](const Json& v) { p.longitudinal = number(v, "model.longitudinal"); });
  with(m, "transverse", [&](const Json& v) { p.transverse = number(v, "model.transverse"); });
  with(m, "energy_scale", [&](const Json& v) { p.energy_scale = number(v, "model.energy_scale"); });
}

inline void read_schedule(const Json& s, AppConfig& c) {
  only_keys(s, "schedule", {"t1", "t3", "h_d", "t2_grid", "h_d_grid", "t2", "initial_state"});
  ExperimentConfig& e = c.experiment;
  with(s, "t1", [&](const Json& v) { e.t1 = number(v, "schedule.t1"); });
  with(s, "t3", [&](const Json& v) { e.t3 = number(v, "schedule.t3"); });
  with(s, "h_d", [&](const Json& v) { e.h_d = number(v, "schedule.h_d"); });
  with(s, "t2_grid", [&](const Json& v) { e.t2_grid = grid(v, "schedule.t2_grid"); });
  with(s, "h_d_grid", [&](const Json& v) { c.hd_grid = grid(v, "schedule.h_d_grid"); });
  with(s, "t2", [&](const Json& v) { c.sweep_t2 = number(v, "schedule.t2"); });
  with(s, "initial_state", [&](const Json& v) {
    if (!v.is_array()) fail("'schedule.initial_state' must be a list of +1/-1 spins");
    std::vector<int> spins;
    for (const auto& x : v) {
      if (!x.is_number_integer() || (x.get<int>() != 1 && x.get<int>() != -1)) {
        fail("'schedule.initial_state' entries must be +1 or -1");
      }
      spins.push_back(x.get<int>());
    }
    e.initial = SpinConfiguration::from_spins(spins);
  });
}

inline void read_noise(const Json& n, NoiseSpec& out) {
  only_keys(n, "noise", {"preset", "mode", "axis", "gamma", "spectral"});
  with(n, "preset", [&](const Json& v) {
    const std::string name = text(v, "noise.preset");
    if (name == "davies_default") {
      out = NoiseSpec::davies_default();
    } else if (name == "none") {
      out = NoiseSpec{};
    } else {
      fail(fmt::format("unknown noise preset '{}' (davies_default | none)", name));
    }
  });
  with(n, "mode", [&](const Json& v) { out.mode = parse_noise_mode(text(v, "noise.mode")); });
  with(n, "axis", [&](const Json& v) { out.axis = parse_axis(text(v, "noise.axis")); });
  with(n, "gamma", [&](const Json& v) { out.gamma = number(v, "noise.gamma"); });
  with(n, "spectral", [&](const Json& s) {
    only_keys(s, "noise.spectral",
              {"ohmic", "flat", "tls_amplitude", "tls_center", "tls_width", "temperature", "dephasing"});
    SpectralDensity& d = out.spectral;
    with(s, "ohmic", [&](const Json& v) { d.ohmic = number(v, "noise.spectral.ohmic"); });
    with(s, "flat", [&](const Json& v) { d.flat = number(v, "noise.spectral.flat"); });
    with(s, "tls_amplitude", [&](const Json& v) { d.tls_amplitude = number(v, "noise.spectral.tls_amplitude"); });
    with(s, "tls_center", [&](const Json& v) { d.tls_center = number(v, "noise.spectral.tls_center"); });
    with(s, "tls_width", [&](const Json& v) { d.tls_width = number(v, "noise.spectral.tls_width"); });
    with(s, "temperature", [&](const Json& v) { d.temperature = number(v, "noise.spectral.temperature"); });
    with(s, "dephasing", [&](const Json& v) { d.dephasing = number(v, "noise.spectral.dephasing"); });
  });
}

inline void read_experiment(const Json& x, AppConfig& c) {
  only_keys(x, "experiment",
            {"shots", "seed", "dt", "max_norm_step", "record_stride", "fast_hold", "lambda_grid", "entropy_points"});
  ExperimentConfig& e = c.experiment;
  with(x, "shots", [&](const Json& v) { e.shots = count(v, "experiment.shots"); });
  with(x, "seed", [&](const Json& v) { e.seed = count(v, "experiment.seed"); });
  with(x, "dt", [&](const Json& v) { e.evolution.dt = number(v, "experiment.dt"); });
  with(x, "max_norm_step", [&](const Json& v) { e.evolution.max_norm_step = number(v, "experiment.max_norm_step"); });
  with(x, "record_stride", [&](const Json& v) { e.evolution.record_stride = count(v, "experiment.record_stride"); });
  with(x, "fast_hold", [&](const Json& v) { e.evolution.fast_hold = flag(v, "experiment.fast_hold"); });
  with(x, "lambda_grid", [&](const Json& v) { c.lambda_grid = grid(v, "experiment.lambda_grid"); });
  with(x, "entropy_points", [&](const Json& v) { c.entropy_points = count(v, "experiment.entropy_points"); });
}

inline void read_backend(const Json& b, AppConfig& c) {
  only_keys(b, "backend",
            {"sampler", "endpoint", "poll_timeout_s", "backoff_base_s", "backoff_factor", "backoff_cap_s",
             "request_timeout_s", "max_in_flight"});
  RemoteOptions& r = c.backend.remote;
  with(b, "sampler", [&](const Json& v) { c.experiment.sampler = parse_sampler_kind(text(v, "backend.sampler")); });
  with(b, "endpoint", [&](const Json& v) { c.backend.endpoint = text(v, "backend.endpoint"); });
  with(b, "poll_timeout_s", [&](const Json& v) { r.poll_timeout_s = number(v, "backend.poll_timeout_s"); });
  with(b, "backoff_base_s", [&](const Json& v) { r.backoff_base_s = number(v, "backend.backoff_base_s"); });
  with(b, "backoff_factor", [&](const Json& v) { r.backoff_factor = number(v, "backend.backoff_factor"); });
  with(b, "backoff_cap_s", [&](const Json& v) { r.backoff_cap_s = number(v, "backend.backoff_cap_s"); });
  with(b, "request_timeout_s", [&](const Json& v) { r.request_timeout_s = number(v, "backend.request_timeout_s"); });
  with(b, "max_in_flight", [&](const Json& v) {
    r.max_in_flight = static_cast<std::ptrdiff_t>(count(v, "backend.max_in_flight"));
  });
}

}  // namespace config_detail

/// Strict parse: unknown keys, wrong types and invalid values raise
/// ConfigError. A run manifest is accepted too; its config snapshot is used.
inline AppConfig config_from_json(const Json& doc_in) {
  namespace d = config_detail;
  const Json* doc = &doc_in;
  if (doc_in.is_object() && doc_in.contains("qalab_version") && doc_in.contains("config")) doc = &doc_in["config"];
  d::only_keys(*doc, "config", {"model", "schedule", "noise", "experiment", "backend"});
  AppConfig c;
  try {
    d::with(*doc, "model", [&](const Json& v) { d::read_model(v, c.experiment.params); });
    d::with(*doc, "schedule", [&](const Json& v) { d::read_schedule(v, c); });
    d::with(*doc, "noise", [&](const Json& v) { d::read_noise(v, c.experiment.noise); });
    d::with(*doc, "experiment", [&](const Json& v) { d::read_experiment(v, c); });
    d::with(*doc, "backend", [&](const Json& v) { d::read_backend(v, c); });
    c.experiment.validate();
    if (!(c.sweep_t2 >= 0.0)) d::fail("'schedule.t2' must be >= 0");
    for (double h : c.hd_grid) {
      if (!(h > 0.0 && h <= 1.0)) d::fail("'schedule.h_d_grid' values must lie in (0, 1]");
    }
    for (double l : c.lambda_grid) {
      if (!(l > 0.0 && l < 1.0)) d::fail("'experiment.lambda_grid' values must lie in (0, 1)");
    }
    if (c.entropy_points < 2) d::fail("'experiment.entropy_points' must be >= 2");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

inline AppConfig parse_config(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  return config_from_json(doc);
}

inline AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Fully expanded snapshot: every field explicit, grids as lists, so that
/// config_from_json(config_to_json(c)) reproduces c.
inline Json config_to_json(const AppConfig& c) {
  const ExperimentConfig& e = c.experiment;
  const ModelParams& p = e.params;
  const SpectralDensity& s = e.noise.spectral;
  const RemoteOptions& r = c.backend.remote;
  Json out;
  out["model"] = {{"n_qubits", p.n_qubits},
                  {"coupling", p.coupling},
                  {"longitudinal", p.longitudinal},
                  {"transverse", p.transverse},
                  {"energy_scale", p.energy_scale}};
  Json sched = {{"t1", e.t1}, {"t3", e.t3}, {"h_d", e.h_d}, {"t2_grid", e.t2_grid}, {"h_d_grid", c.hd_grid},
                {"t2", c.sweep_t2}};
  if (e.initial) sched["initial_state"] = e.initial->spins();
  out["schedule"] = std::move(sched);
  out["noise"] = {{"mode", noise_mode_name(e.noise.mode)},
                  {"axis", axis_name(e.noise.axis)},
                  {"gamma", e.noise.gamma},
                  {"spectral",
                   {{"ohmic", s.ohmic},
                    {"flat", s.flat},
                    {"tls_amplitude", s.tls_amplitude},
                    {"tls_center", s.tls_center},
                    {"tls_width", s.tls_width},
                    {"temperature", s.temperature},
                    {"dephasing", s.dephasing}}}};
  out["experiment"] = {{"shots", e.shots},
                       {"seed", e.seed},
                       {"dt", e.evolution.dt},
                       {"max_norm_step", e.evolution.max_norm_step},
                       {"record_stride", e.evolution.record_stride},
                       {"fast_hold", e.evolution.fast_hold},
                       {"lambda_grid", c.lambda_grid},
                       {"entropy_points", c.entropy_points}};
  out["backend"] = {{"sampler", sampler_name(e.sampler)},
                    {"endpoint", c.backend.endpoint},
                    {"poll_timeout_s", r.poll_timeout_s},
                    {"backoff_base_s", r.backoff_base_s},
                    {"backoff_factor", r.backoff_factor},
                    {"backoff_cap_s", r.backoff_cap_s},
                    {"request_timeout_s", r.request_timeout_s},
                    {"max_in_flight", r.max_in_flight}};
  return out;
}

}  // namespace qalab
