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

#include <atomic>
#include <cstdint>
#include <future>
#include <map>
#include <mutex>
#include <string>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "qalab/annealer_client.hpp"

namespace qalab {

/// Local HTTP server speaking the job protocol, backed by SimulatedSampler.
/// The n-th accepted job (0-based) is sampled with seed base_seed + n, and
/// every job answers "pending" to its first `pending_polls` status requests.
class MockAnnealServer {
 public:
  MockAnnealServer(NoiseSpec noise, std::uint64_t base_seed, std::string token = "", unsigned pending_polls = 1,
                   EvolutionConfig evolution = {})
      : sampler_(noise, evolution), base_seed_(base_seed), token_(std::move(token)), pending_polls_(pending_polls) {
    server_.Post("/jobs", [this](const httplib::Request& req, httplib::Response& res) { on_submit(req, res); });
    server_.Get(R"(/jobs/([A-Za-z0-9_-]+))",
                [this](const httplib::Request& req, httplib::Response& res) { on_poll(req, res); });
  }

  MockAnnealServer(const MockAnnealServer&) = delete;
  MockAnnealServer& operator=(const MockAnnealServer&) = delete;
  ~MockAnnealServer() { stop(); }

  /// Binds to an ephemeral port (or `port` when nonzero) on 127.0.0.1 and
  /// serves on a background thread. Returns the bound port.
  int start(int port = 0) {
    port_ = port == 0 ? server_.bind_to_any_port("127.0.0.1") : (server_.bind_to_port("127.0.0.1", port) ? port : -1);
    if (port_ < 0) throw std::runtime_error("mock server could not bind");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port_;
  }

  /// Blocks serving requests on the calling thread.
  void serve(const std::string& host, int port) {
    if (!server_.listen(host, port)) throw std::runtime_error(fmt::format("cannot listen on {}:{}", host, port));
  }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
    std::lock_guard lock(mu_);
    for (auto& [id, job] : jobs_) {
      if (job.result.valid()) job.result.wait();
    }
  }

  [[nodiscard]] std::string endpoint() const { return fmt::format("http://127.0.0.1:{}", port_); }
  [[nodiscard]] std::uint64_t jobs_accepted() const noexcept { return counter_.load(); }

 private:
  struct Entry {
    std::shared_future<JobResult> result;
    unsigned polls = 0;
  };

  bool authorized(const httplib::Request& req, httplib::Response& res) const {
    if (token_.empty() || req.get_header_value("Authorization") == "Bearer " + token_) return true;
    res.status = 401;
    res.set_content(R"({"error":"unauthorized"})", "application/json");
    return false;
  }

  void on_submit(const httplib::Request& req, httplib::Response& res) {
    if (!authorized(req, res)) return;
    AnnealJob job;
    try {
      job = parse_job(req.body);
      (void)model_from_job(job);
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(Json{{"error", e.what()}}.dump(), "application/json");
      return;
    }
    const std::uint64_t n = counter_.fetch_add(1);
    const std::string id = fmt::format("job-{}", n);
    auto fut = std::async(std::launch::async, [this, job = std::move(job), id, seed = base_seed_ + n] {
                 JobResult r = sampler_.run(job, seed);
                 r.id = id;
                 return r;
               }).share();
    {
      std::lock_guard lock(mu_);
      jobs_[id] = Entry{std::move(fut), 0};
    }
    res.status = 201;
    res.set_content(Json{{"id", id}, {"status", "pending"}}.dump(), "application/json");
  }

  void on_poll(const httplib::Request& req, httplib::Response& res) {
    if (!authorized(req, res)) return;
    const std::string id = req.matches[1];
    std::shared_future<JobResult> fut;
    bool force_pending = false;
    {
      std::lock_guard lock(mu_);
      const auto it = jobs_.find(id);
      if (it == jobs_.end()) {
        res.status = 404;
        res.set_content(Json{{"error", "unknown job"}}.dump(), "application/json");
        return;
      }
      force_pending = it->second.polls++ < pending_polls_;
      fut = it->second.result;
    }
    JobResult out{id, JobStatus::pending, {}, {}, {}};
    if (!force_pending && fut.wait_for(std::chrono::seconds(0)) == std::future_status::ready) {
      try {
        out = fut.get();
      } catch (const std::exception& e) {
        out.status = JobStatus::failed;
        out.message = e.what();
      }
    }
    res.set_content(serialize_result(out), "application/json");
  }

  SimulatedSampler sampler_;
  std::uint64_t base_seed_;
  std::string token_;
  unsigned pending_polls_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = -1;
  std::atomic<std::uint64_t> counter_{0};
  std::mutex mu_;
  std::map<std::string, Entry> jobs_;
};

}  // namespace qalab
