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

/// @file annealer_client.hpp
/// @brief Anneal jobs, their JSON wire format, and the samplers that execute
/// them: in-process simulation or a remote REST endpoint.
///
/// Request:  {"h":[...],"j":{"0,1":-1.0,...},"anneal_schedule":[[t,k],...],
///            "initial_state":[1,...],"num_reads":N,"reinitialize_state":true}
/// Response: {"id":"...","status":"completed","samples":[[1,...],...],"counts":[...]}
/// Qubit indices on the wire are 0-based; spins are +1 (up) / -1 (down).

#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

// Eigen before httplib: <resolv.h> (pulled in by httplib) defines a `_res`
// macro that collides with Eigen parameter names.
#include "qalab/dynamics.hpp"
#include "qalab/errors.hpp"
#include "qalab/model.hpp"
#include "qalab/noise.hpp"
#include "qalab/operators.hpp"
#include "qalab/readout.hpp"

#include <httplib.h>

namespace qalab {

using Json = nlohmann::ordered_json;

struct AnnealJob {
  std::vector<double> h;                                          // linear biases h_i
  std::map<std::pair<std::size_t, std::size_t>, double> j;        // couplings J_ij, i < j, 0-based
  std::vector<SchedulePoint> schedule;
  SpinConfiguration initial;
  std::uint64_t reads = 1;

  [[nodiscard]] std::size_t n_qubits() const noexcept { return h.size(); }

  void validate() const {
    if (h.empty()) throw std::invalid_argument("anneal job needs at least one qubit");
    for (const auto& [ij, v] : j) {
      if (!(ij.first < ij.second && ij.second < h.size())) {
        throw std::invalid_argument(fmt::format("coupling ({},{}) outside the register or not i < j", ij.first, ij.second));
      }
      if (!std::isfinite(v)) throw std::invalid_argument("coupling values must be finite");
    }
    for (double x : h) {
      if (!std::isfinite(x)) throw std::invalid_argument("bias values must be finite");
    }
    (void)AnnealPath(schedule);
    if (initial.n_qubits() != h.size()) throw std::invalid_argument("initial state size differs from the register");
    if (reads < 1) throw std::invalid_argument("num_reads must be >= 1");
  }

  [[nodiscard]] AnnealPath path() const { return AnnealPath(schedule); }

  friend bool operator==(const AnnealJob&, const AnnealJob&) = default;
};

enum class JobStatus { pending, completed, failed };

inline const char* status_name(JobStatus s) {
  switch (s) {
    case JobStatus::pending: return "pending";
    case JobStatus::completed: return "completed";
    case JobStatus::failed: return "failed";
  }
  return "?";
}

struct JobResult {
  std::string id;
  JobStatus status = JobStatus::pending;
  std::vector<SpinConfiguration> samples;
  std::vector<std::uint64_t> counts;
  std::string message;  // server message for failed jobs

  [[nodiscard]] Counts as_counts() const {
    Counts c;
    for (std::size_t i = 0; i < samples.size(); ++i) c[samples[i]] += counts[i];
    return c;
  }

  friend bool operator==(const JobResult&, const JobResult&) = default;
};

inline JobResult result_from_counts(std::string id, const Counts& counts) {
  JobResult r{std::move(id), JobStatus::completed, {}, {}, {}};
  for (const auto& [cfg, n] : counts) {
    r.samples.push_back(cfg);
    r.counts.push_back(n);
  }
  return r;
}

/// Biases h_i = h/2 and couplings J_ij = -J for every pair, so that
/// sum h_i sz_i + sum J_ij sz_i sz_j equals H_L + H_P (energy_scale 1).
/// Zero couplings are omitted.
inline AnnealJob make_anneal_job(const ModelParams& p, const AnnealPath& path, const SpinConfiguration& initial,
                                 std::uint64_t reads) {
  p.validate();
  AnnealJob job;
  job.h.assign(p.n_qubits, 0.5 * p.longitudinal);
  if (p.coupling != 0.0) {
    for (std::size_t a = 0; a < p.n_qubits; ++a) {
      for (std::size_t b = a + 1; b < p.n_qubits; ++b) job.j[{a, b}] = -p.coupling;
    }
  }
  job.schedule = path.vertices();
  job.initial = initial;
  job.reads = reads;
  job.validate();
  return job;
}

/// Inverse of make_anneal_job for uniform biases and all-to-all uniform
/// couplings. Gamma and the energy scale are not part of the job.
inline ModelParams model_from_job(const AnnealJob& job, double transverse = 1.0, double energy_scale = 1.0) {
  job.validate();
  const std::size_t n = job.n_qubits();
  for (double x : job.h) {
    if (x != job.h.front()) throw std::invalid_argument("only uniform biases map onto the model family");
  }
  double coupling = 0.0;
  if (!job.j.empty()) {
    if (job.j.size() != n * (n - 1) / 2) throw std::invalid_argument("couplings must cover every pair");
    const double jv = job.j.begin()->second;
    for (const auto& [ij, v] : job.j) {
      if (v != jv) throw std::invalid_argument("only uniform couplings map onto the model family");
    }
    coupling = -jv;
  }
  ModelParams p{n, coupling, 2.0 * job.h.front(), transverse, energy_scale};
  p.validate();
  return p;
}

// --- wire format -----------------------------------------------------------

namespace detail {

[[noreturn]] inline void malformed(const std::string& what) {
  throw ClientError(ClientError::Kind::malformed_response, what);
}

inline const Json& require_key(const Json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) malformed(fmt::format("missing key '{}'", key));
  return *it;
}

inline void require_only(const Json& obj, std::initializer_list<const char*> keys) {
  for (const auto& [k, v] : obj.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* allowed) { return k == allowed; })) {
      malformed(fmt::format("unexpected key '{}'", k));
    }
  }
}

inline double as_number(const Json& v, const char* what) {
  if (!v.is_number()) malformed(fmt::format("{} must be a number", what));
  return v.get<double>();
}

inline SpinConfiguration as_spins(const Json& v) {
  if (!v.is_array() || v.empty()) malformed("spin configuration must be a non-empty array");
  std::vector<int> s;
  for (const auto& x : v) {
    if (!x.is_number_integer()) malformed("spin values must be integers");
    s.push_back(x.get<int>());
  }
  try {
    return SpinConfiguration::from_spins(s);
  } catch (const std::invalid_argument& e) {
    malformed(e.what());
  }
}

inline Json spins_json(const SpinConfiguration& c) {
  Json a = Json::array();
  for (int s : c.spins()) a.push_back(s);
  return a;
}

inline std::pair<std::size_t, std::size_t> parse_pair_key(const std::string& key) {
  const auto comma = key.find(',');
  if (comma == std::string::npos) malformed(fmt::format("coupling key '{}' is not 'i,j'", key));
  try {
    std::size_t used_a = 0, used_b = 0;
    const std::string a = key.substr(0, comma), b = key.substr(comma + 1);
    const auto i = std::stoull(a, &used_a);
    const auto j = std::stoull(b, &used_b);
    if (used_a != a.size() || used_b != b.size() || a.empty() || b.empty() || !std::isdigit(a[0]) ||
        !std::isdigit(b[0])) {
      malformed(fmt::format("coupling key '{}' is not 'i,j'", key));
    }
    return {i, j};
  } catch (const std::logic_error&) {
    malformed(fmt::format("coupling key '{}' is not 'i,j'", key));
  }
}

}  // namespace detail

inline Json job_to_json(const AnnealJob& job) {
  Json out;
  out["h"] = job.h;
  Json j = Json::object();
  for (const auto& [ij, v] : job.j) j[fmt::format("{},{}", ij.first, ij.second)] = v;
  out["j"] = std::move(j);
  Json sched = Json::array();
  for (const auto& v : job.schedule) sched.push_back(Json::array({v.t, v.k}));
  out["anneal_schedule"] = std::move(sched);
  out["initial_state"] = detail::spins_json(job.initial);
  out["num_reads"] = job.reads;
  out["reinitialize_state"] = true;
  return out;
}

inline std::string serialize_job(const AnnealJob& job) { return job_to_json(job).dump(); }

/// Strict parse of a job document; throws ClientError(malformed_response)
/// on unknown keys, wrong types or an invalid job.
inline AnnealJob job_from_json(const Json& doc) {
  if (!doc.is_object()) detail::malformed("job must be a JSON object");
  detail::require_only(doc, {"h", "j", "anneal_schedule", "initial_state", "num_reads", "reinitialize_state"});
  AnnealJob job;
  const Json& h = detail::require_key(doc, "h");
  if (!h.is_array()) detail::malformed("'h' must be an array");
  for (const auto& x : h) job.h.push_back(detail::as_number(x, "bias"));
  const Json& j = detail::require_key(doc, "j");
  if (!j.is_object()) detail::malformed("'j' must be an object");
  for (const auto& [k, v] : j.items()) job.j[detail::parse_pair_key(k)] = detail::as_number(v, "coupling");
  const Json& sched = detail::require_key(doc, "anneal_schedule");
  if (!sched.is_array()) detail::malformed("'anneal_schedule' must be an array");
  for (const auto& v : sched) {
    if (!v.is_array() || v.size() != 2) detail::malformed("schedule vertices must be [t, k] pairs");
    job.schedule.push_back({detail::as_number(v[0], "schedule time"), detail::as_number(v[1], "schedule k")});
  }
  job.initial = detail::as_spins(detail::require_key(doc, "initial_state"));
  const Json& reads = detail::require_key(doc, "num_reads");
  if (!reads.is_number_unsigned()) detail::malformed("'num_reads' must be a positive integer");
  job.reads = reads.get<std::uint64_t>();
  const auto re = doc.find("reinitialize_state");
  if (re != doc.end() && !(re->is_boolean() && re->get<bool>())) {
    detail::malformed("only reinitialize_state = true is supported");
  }
  try {
    job.validate();
  } catch (const std::invalid_argument& e) {
    detail::malformed(e.what());
  }
  return job;
}

inline AnnealJob parse_job(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    detail::malformed(e.what());
  }
  return job_from_json(doc);
}

inline Json result_to_json(const JobResult& r) {
  Json out;
  out["id"] = r.id;
  out["status"] = status_name(r.status);
  Json samples = Json::array();
  for (const auto& s : r.samples) samples.push_back(detail::spins_json(s));
  out["samples"] = std::move(samples);
  out["counts"] = r.counts;
  if (!r.message.empty()) out["message"] = r.message;
  return out;
}

inline std::string serialize_result(const JobResult& r) { return result_to_json(r).dump(); }

inline JobResult result_from_json(const Json& doc) {
  if (!doc.is_object()) detail::malformed("job result must be a JSON object");
  JobResult r;
  const Json& id = detail::require_key(doc, "id");
  if (!id.is_string()) detail::malformed("'id' must be a string");
  r.id = id.get<std::string>();
  const Json& st = detail::require_key(doc, "status");
  if (!st.is_string()) detail::malformed("'status' must be a string");
  const auto s = st.get<std::string>();
  if (s == "pending") {
    r.status = JobStatus::pending;
  } else if (s == "completed") {
    r.status = JobStatus::completed;
  } else if (s == "failed") {
    r.status = JobStatus::failed;
  } else {
    detail::malformed(fmt::format("unknown job status '{}'", s));
  }
  if (const auto m = doc.find("message"); m != doc.end() && m->is_string()) r.message = m->get<std::string>();
  if (r.status != JobStatus::completed) return r;
  const Json& samples = detail::require_key(doc, "samples");
  const Json& counts = detail::require_key(doc, "counts");
  if (!samples.is_array() || !counts.is_array() || samples.size() != counts.size()) {
    detail::malformed("'samples' and 'counts' must be arrays of equal length");
  }
  for (const auto& x : samples) r.samples.push_back(detail::as_spins(x));
  for (const auto& c : counts) {
    if (!c.is_number_unsigned()) detail::malformed("counts must be non-negative integers");
    r.counts.push_back(c.get<std::uint64_t>());
  }
  return r;
}

inline JobResult parse_result(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    detail::malformed(e.what());
  }
  return result_from_json(doc);
}

// --- samplers --------------------------------------------------------------

/// Executes anneal jobs. Implementations are immutable after construction
/// and safe to call from several threads.
class Sampler {
 public:
  virtual ~Sampler() = default;
  /// Runs `job` to completion. `seed` drives readout sampling where the
  /// backend honours it.
  [[nodiscard]] virtual JobResult run(const AnnealJob& job, std::uint64_t seed) const = 0;
};

/// In-process backend: Lindblad evolution along the job's schedule from the
/// job's initial configuration, followed by seeded readout.
///
/// The state after the first schedule segment is cached, so a t2 sweep
/// integrates the shared ramp-down only once.
class SimulatedSampler final : public Sampler {
 public:
  explicit SimulatedSampler(NoiseSpec noise, EvolutionConfig evolution = {}, double transverse = 1.0,
                            double energy_scale = 1.0)
      : noise_(noise), evolution_(evolution), transverse_(transverse), energy_scale_(energy_scale),
        cache_(std::make_shared<Cache>()) {
    noise_.validate();
    evolution_.validate();
  }

  [[nodiscard]] JobResult run(const AnnealJob& job, std::uint64_t seed) const override {
    const ModelParams p = model_from_job(job, transverse_, energy_scale_);
    const AnnealPath path = job.path();
    const LindbladPropagator prop(p, noise_, evolution_);
    Matrix rho = first_segment(prop, job, path);
    for (std::size_t s = 1; s < path.segments(); ++s) rho = prop.run_segment(rho, path, s);
    const DensityMatrix final_rho(DensityMatrix::unchecked, std::move(rho));
    return result_from_counts(fmt::format("sim-{}", seed), sample_readout(final_rho, job.reads, seed));
  }

  [[nodiscard]] const NoiseSpec& noise() const noexcept { return noise_; }

 private:
  struct Cache {
    std::mutex mu;
    std::map<std::string, Matrix> entries;
  };
  static constexpr std::size_t kMaxCacheEntries = 64;

  [[nodiscard]] Matrix first_segment(const LindbladPropagator& prop, const AnnealJob& job,
                                     const AnnealPath& path) const {
    Json key = job_to_json(job);
    key.erase("num_reads");
    key["anneal_schedule"] = Json::array({key["anneal_schedule"][0], key["anneal_schedule"][1]});
    const std::string k = key.dump();
    {
      std::lock_guard lock(cache_->mu);
      if (const auto it = cache_->entries.find(k); it != cache_->entries.end()) return it->second;
    }
    const Matrix rho0 = DensityMatrix::pure(StateVector::basis(job.n_qubits(), job.initial.index())).matrix();
    Matrix rho = prop.run_segment(rho0, path, 0);
    std::lock_guard lock(cache_->mu);
    if (cache_->entries.size() >= kMaxCacheEntries) cache_->entries.clear();
    cache_->entries.emplace(k, rho);
    return rho;
  }

  NoiseSpec noise_;
  EvolutionConfig evolution_;
  double transverse_;
  double energy_scale_;
  std::shared_ptr<Cache> cache_;
};

/// One-shot convenience wrapper around SimulatedSampler.
inline JobResult simulated_sampler(const AnnealJob& job, const NoiseSpec& noise, std::uint64_t seed,
                                   const EvolutionConfig& evolution = {}) {
  return SimulatedSampler(noise, evolution).run(job, seed);
}

struct RemoteOptions {
  double poll_timeout_s = 3600.0;
  double backoff_base_s = 0.2;
  double backoff_factor = 2.0;
  double backoff_cap_s = 5.0;
  double request_timeout_s = 30.0;
  std::ptrdiff_t max_in_flight = 4;
};

namespace detail {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix without trailing slash
};

inline Endpoint split_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw std::invalid_argument("endpoint must be an http(s) URL: " + url);
  const auto slash = url.find('/', scheme + 3);
  Endpoint e{url.substr(0, slash), slash == std::string::npos ? "" : url.substr(slash)};
  while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
  return e;
}

inline httplib::Client make_client(const Endpoint& ep, const std::string& token, const RemoteOptions& opt) {
  httplib::Client cli(ep.origin);
  const auto timeout = std::chrono::duration<double>(opt.request_timeout_s);
  cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  cli.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  if (!token.empty()) cli.set_bearer_token_auth(token);
  return cli;
}

inline void check_response(const httplib::Result& res, const char* what) {
  if (!res) {
    throw ClientError(ClientError::Kind::transport, fmt::format("{}: {}", what, httplib::to_string(res.error())));
  }
  if (res->status < 200 || res->status >= 300) {
    throw ClientError(ClientError::Kind::http_status,
                      fmt::format("{}: HTTP {} {}", what, res->status, res->body), res->status);
  }
}

}  // namespace detail

/// POST /jobs; returns the server-assigned id.
inline std::string submit(const AnnealJob& job, const std::string& endpoint, const std::string& token = "",
                          const RemoteOptions& opt = {}) {
  const auto ep = detail::split_endpoint(endpoint);
  auto cli = detail::make_client(ep, token, opt);
  const auto res = cli.Post(ep.prefix + "/jobs", serialize_job(job), "application/json");
  detail::check_response(res, "submit");
  Json doc;
  try {
    doc = Json::parse(res->body);
  } catch (const Json::parse_error& e) {
    detail::malformed(e.what());
  }
  if (!doc.is_object() || !doc.contains("id") || !doc["id"].is_string()) detail::malformed("submit reply lacks an id");
  return doc["id"].get<std::string>();
}

/// GET /jobs/{id} until the job leaves the pending state, with bounded
/// exponential backoff between polls.
inline JobResult poll(const std::string& id, const std::string& endpoint, const std::string& token = "",
                      const RemoteOptions& opt = {}) {
  const auto ep = detail::split_endpoint(endpoint);
  auto cli = detail::make_client(ep, token, opt);
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(opt.poll_timeout_s);
  double wait = opt.backoff_base_s;
  for (;;) {
    const auto res = cli.Get(ep.prefix + "/jobs/" + id);
    detail::check_response(res, "poll");
    JobResult r = parse_result(res->body);
    if (r.status == JobStatus::failed) {
      throw ClientError(ClientError::Kind::job_failed, fmt::format("job {} failed: {}", id, r.message));
    }
    if (r.status == JobStatus::completed) return r;
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) throw ClientError(ClientError::Kind::timeout, fmt::format("job {} still pending", id));
    const auto pause = std::min(std::chrono::duration<double>(wait),
                                std::chrono::duration<double>(deadline - now));
    std::this_thread::sleep_for(pause);
    wait = std::min(wait * opt.backoff_factor, opt.backoff_cap_s);
  }
}

/// REST backend. The seed argument is not transmitted: the wire format has
/// no seed field, so readout randomness is the server's.
class RemoteSampler final : public Sampler {
 public:
  RemoteSampler(std::string endpoint, std::string token = "", RemoteOptions opt = {})
      : endpoint_(std::move(endpoint)), token_(std::move(token)), opt_(opt) {
    (void)detail::split_endpoint(endpoint_);
    if (opt_.max_in_flight < 1 || opt_.max_in_flight > kMaxInFlight) {
      throw std::invalid_argument(fmt::format("max_in_flight must lie in [1, {}]", kMaxInFlight));
    }
    slots_ = std::make_shared<std::counting_semaphore<kMaxInFlight>>(opt_.max_in_flight);
  }

  [[nodiscard]] JobResult run(const AnnealJob& job, std::uint64_t /*seed*/) const override {
    slots_->acquire();
    struct Release {
      std::counting_semaphore<kMaxInFlight>* s;
      ~Release() { s->release(); }
    } release{slots_.get()};
    const std::string id = submit(job, endpoint_, token_, opt_);
    JobResult r = poll(id, endpoint_, token_, opt_);
    std::uint64_t total = 0;
    for (auto c : r.counts) total += c;
    if (total != job.reads) {
      detail::malformed(fmt::format("job {} returned {} reads, expected {}", id, total, job.reads));
    }
    return r;
  }

  [[nodiscard]] const std::string& endpoint() const noexcept { return endpoint_; }

 private:
  static constexpr std::ptrdiff_t kMaxInFlight = 256;

  std::string endpoint_;
  std::string token_;
  RemoteOptions opt_;
  std::shared_ptr<std::counting_semaphore<kMaxInFlight>> slots_;
};

}  // namespace qalab
