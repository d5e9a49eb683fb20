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

/// @file experiment.hpp
/// @brief The relaxation measurement: survival of the excited configuration
/// against hold time t2, exponential fits, and sweeps over the hold point.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "qalab/annealer_client.hpp"
#include "qalab/dynamics.hpp"
#include "qalab/errors.hpp"
#include "qalab/model.hpp"
#include "qalab/noise.hpp"
#include "qalab/readout.hpp"

namespace qalab {

enum class SamplerKind { simulated, remote };

inline const char* sampler_name(SamplerKind k) { return k == SamplerKind::simulated ? "simulated" : "remote"; }

inline SamplerKind parse_sampler_kind(const std::string& s) {
  if (s == "simulated") return SamplerKind::simulated;
  if (s == "remote") return SamplerKind::remote;
  throw std::invalid_argument("unknown sampler '" + s + "' (expected simulated|remote)");
}

struct ExperimentConfig {
  ModelParams params;
  double t1 = 1.0;  // ramp-down duration, us
  double t3 = 1.0;  // ramp-up duration, us
  double h_d = 0.5;
  std::vector<double> t2_grid;  // empty: chosen by a pilot run
  std::uint64_t shots = 100000;
  NoiseSpec noise;
  std::uint64_t seed = 0;
  SamplerKind sampler = SamplerKind::simulated;
  EvolutionConfig evolution;
  std::optional<SpinConfiguration> initial;  // default: the first excited configuration

  void validate() const {
    params.validate();
    schedule(0.0).validate();
    noise.validate();
    evolution.validate();
    if (shots < 1) throw std::invalid_argument("shots must be >= 1");
    for (std::size_t i = 0; i < t2_grid.size(); ++i) {
      if (!(t2_grid[i] >= 0.0) || !std::isfinite(t2_grid[i])) throw std::invalid_argument("t2 values must be >= 0");
      if (i > 0 && !(t2_grid[i] > t2_grid[i - 1])) throw std::invalid_argument("t2 grid must be strictly increasing");
    }
    if (initial && initial->n_qubits() != params.n_qubits) {
      throw std::invalid_argument("initial configuration size differs from n_qubits");
    }
  }

  [[nodiscard]] RqaSchedule schedule(double t2) const { return {t1, t2, t3, h_d}; }

  [[nodiscard]] SpinConfiguration initial_state() const {
    return initial ? *initial : initial_excited_configuration(params);
  }
};

/// Job for one protocol run at hold time t2.
inline AnnealJob to_anneal_job(const ExperimentConfig& cfg, double t2) {
  return make_anneal_job(cfg.params, to_path(cfg.schedule(t2)), cfg.initial_state(), cfg.shots);
}

/// The in-process backend for `cfg`: same code path as a submitted job, with
/// the model's Gamma and energy scale (which the wire format cannot carry).
inline SimulatedSampler make_simulated_sampler(const ExperimentConfig& cfg) {
  return SimulatedSampler(cfg.noise, cfg.evolution, cfg.params.transverse, cfg.params.energy_scale);
}

struct SurvivalPoint {
  double t2 = 0.0;
  double survival = 0.0;
  std::uint64_t shots = 0;

  friend bool operator==(const SurvivalPoint&, const SurvivalPoint&) = default;
};

struct SurvivalCurve {
  std::vector<SurvivalPoint> points;
  SpinConfiguration initial;

  [[nodiscard]] std::vector<double> t2() const {
    std::vector<double> v;
    for (const auto& p : points) v.push_back(p.t2);
    return v;
  }
  [[nodiscard]] std::vector<double> survival() const {
    std::vector<double> v;
    for (const auto& p : points) v.push_back(p.survival);
    return v;
  }

  friend bool operator==(const SurvivalCurve&, const SurvivalCurve&) = default;
};

/// A failure of the sampler at a particular hold time.
class SamplerError : public Error {
 public:
  SamplerError(double t2, const std::string& what)
      : Error(fmt::format("sampler failed at t2 = {} us: {}", t2, what)), t2_(t2) {}
  [[nodiscard]] double t2() const noexcept { return t2_; }

 private:
  double t2_;
};

namespace detail {

/// Runs fn(0..n-1) on up to `threads` workers. Exceptions are rethrown after
/// all workers finish, lowest index first, so failures are deterministic.
template <class F>
void parallel_for(std::size_t n, std::size_t threads, F&& fn) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  std::vector<std::exception_ptr> errors(n);
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        break;
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline double run_survival(const ExperimentConfig& cfg, const Sampler& sampler, double t2, std::uint64_t seed,
                           const SpinConfiguration& initial) {
  JobResult r;
  try {
    r = sampler.run(to_anneal_job(cfg, t2), seed);
  } catch (const ClientError& e) {
    throw SamplerError(t2, e.what());
  } catch (const IntegrationError& e) {
    throw SamplerError(t2, e.what());
  }
  return survival_probability(r.as_counts(), initial);
}

// Pilot runs use a seed stream disjoint from the grid's (seed + index).
inline constexpr std::uint64_t kPilotSeedOffset = 0x9E3779B97F4A7C15ULL;

}  // namespace detail

/// Default hold-time grid: a pilot probes t2 = 0 and t2 = 10^m us until the
/// survival falls below 60% of its t2 = 0 value; a log-linear fit through
/// three pilot points gives T1_guess, and the grid is 12 log-spaced points
/// over [0.1, 3] x T1_guess.
inline std::vector<double> auto_t2_grid(const ExperimentConfig& cfg, const Sampler& sampler,
                                        double max_t2 = 1e9) {
  const SpinConfiguration initial = cfg.initial_state();
  std::uint64_t seed = cfg.seed + detail::kPilotSeedOffset;
  const double floor_p = 0.5 / static_cast<double>(cfg.shots);
  const double p0 = std::max(detail::run_survival(cfg, sampler, 0.0, seed++, initial), floor_p);

  std::vector<std::pair<double, double>> pilot{{0.0, p0}};
  for (double t = 1.0;; t *= 10.0) {
    if (t > max_t2) {
      throw FitError(FitError::Kind::unidentifiable,
                     fmt::format("no decay of the survival up to t2 = {:g} us; T1 is not identifiable", max_t2));
    }
    const double p = std::max(detail::run_survival(cfg, sampler, t, seed++, initial), floor_p);
    pilot.emplace_back(t, p);
    if (p <= 0.6 * p0) break;
  }
  if (pilot.size() == 2) {
    const double t = pilot.back().first / 10.0;
    pilot.insert(pilot.begin() + 1, {t, std::max(detail::run_survival(cfg, sampler, t, seed++, initial), floor_p)});
  }
  const auto n = pilot.size();
  const std::pair<double, double> pts[3] = {pilot[0], pilot[n - 2], pilot[n - 1]};
  double mx = 0.0, my = 0.0;
  for (const auto& [t, p] : pts) {
    mx += t / 3.0;
    my += std::log(p) / 3.0;
  }
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [t, p] : pts) {
    sxy += (t - mx) * (std::log(p) - my);
    sxx += (t - mx) * (t - mx);
  }
  const double slope = sxy / sxx;
  const double guess = slope < 0.0 ? -1.0 / slope : pilot.back().first;

  std::vector<double> grid(12);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = 0.1 * guess * std::pow(30.0, static_cast<double>(i) / 11.0);
  }
  return grid;
}

/// Survival of the initial configuration at every hold time. Point i uses
/// readout seed cfg.seed + i; results are in t2 order for any thread count.
inline SurvivalCurve run_t1_experiment(const ExperimentConfig& cfg, const Sampler& sampler, std::size_t threads = 1) {
  cfg.validate();
  const SpinConfiguration initial = cfg.initial_state();
  const std::vector<double> grid = cfg.t2_grid.empty() ? auto_t2_grid(cfg, sampler) : cfg.t2_grid;
  SurvivalCurve curve;
  curve.initial = initial;
  curve.points.resize(grid.size());
  detail::parallel_for(grid.size(), threads, [&](std::size_t i) {
    const double p = detail::run_survival(cfg, sampler, grid[i], cfg.seed + i, initial);
    curve.points[i] = {grid[i], p, cfg.shots};
  });
  return curve;
}

inline SurvivalCurve run_t1_experiment(const ExperimentConfig& cfg, std::size_t threads = 1) {
  return run_t1_experiment(cfg, make_simulated_sampler(cfg), threads);
}

struct DecayFit {
  double a = 0.0;
  double t1 = 0.0;        // us
  double residual = 0.0;  // root-mean-square of p_i - a exp(-t_i / T1)
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();  // over (a, T1)
  std::size_t iterations = 0;
};

/// Least-squares fit of p = a exp(-t / T1), parametrised internally as
/// (a, ln T1) and solved by Levenberg-Marquardt from a log-linear start.
inline DecayFit fit_exponential(const std::vector<double>& t, const std::vector<double>& p,
                                std::size_t max_iterations = 500) {
  const std::size_t n = t.size();
  if (p.size() != n) throw std::invalid_argument("t and p differ in length");
  if (n < 3) throw FitError(FitError::Kind::too_few_points, fmt::format("need >= 3 points, got {}", n));
  const auto [pmin, pmax] = std::minmax_element(p.begin(), p.end());
  if (*pmax - *pmin <= 1e-12) {
    throw FitError(FitError::Kind::unidentifiable, "survival is constant; T1 is not identifiable");
  }

  // log-linear start on the positive points
  double a0 = *pmax, tau0 = 0.0;
  {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (p[i] <= 0.0) continue;
      const double y = std::log(p[i]);
      sx += t[i];
      sy += y;
      sxx += t[i] * t[i];
      sxy += t[i] * y;
      m += 1.0;
    }
    const double den = m * sxx - sx * sx;
    if (m >= 2.0 && den > 0.0) {
      const double slope = (m * sxy - sx * sy) / den;
      if (slope < 0.0) {
        tau0 = -1.0 / slope;
        a0 = std::exp((sy - slope * sx) / m);
      }
    }
    if (!(tau0 > 0.0)) tau0 = std::max(*std::max_element(t.begin(), t.end()), 1e-12);
  }

  auto residuals = [&](double a, double u, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    const double tau = std::exp(u);
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = std::exp(-t[i] / tau);
      const auto k = static_cast<Eigen::Index>(i);
      r(k) = p[i] - a * e;
      ssr += r(k) * r(k);
      if (jac != nullptr) {
        (*jac)(k, 0) = e;
        (*jac)(k, 1) = a * e * (t[i] / tau);
      }
    }
    return ssr;
  };

  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::Vector2d theta(a0, std::log(tau0));
  Eigen::VectorXd r(ni), r_try(ni);
  Eigen::MatrixXd jac(ni, 2);
  double ssr = residuals(theta(0), theta(1), r, &jac);
  double mu = 1e-3;
  bool converged = false;
  std::size_t it = 0;
  for (; it < max_iterations && !converged; ++it) {
    const Eigen::Matrix2d jtj = jac.transpose() * jac;
    const Eigen::Vector2d g = jac.transpose() * r;
    for (;;) {
      Eigen::Matrix2d lhs = jtj;
      lhs.diagonal() += mu * jtj.diagonal().cwiseMax(1e-300);
      const Eigen::Vector2d step = lhs.ldlt().solve(g);
      const Eigen::Vector2d cand = theta + step;
      const double ssr_try = std::isfinite(cand(1)) && cand(1) < 700.0 ? residuals(cand(0), cand(1), r_try, nullptr)
                                                                      : std::numeric_limits<double>::infinity();
      if (ssr_try < ssr) {
        theta = cand;
        const bool small_step = step.norm() <= 1e-12 * (theta.norm() + 1e-12);
        const bool flat = ssr - ssr_try <= 1e-15 * ssr;
        ssr = residuals(theta(0), theta(1), r, &jac);
        mu = std::max(mu / 3.0, 1e-12);
        converged = small_step || flat;
        break;
      }
      mu *= 4.0;
      if (mu > 1e16) {  // no descent direction left: at a minimum to machine precision
        converged = true;
        break;
      }
    }
  }
  if (!converged) {
    throw FitError(FitError::Kind::no_convergence, fmt::format("no convergence after {} iterations", it));
  }
  const double tau = std::exp(theta(1));
  if (!std::isfinite(tau) || tau > 1e12 * std::max(*std::max_element(t.begin(), t.end()), 1e-12)) {
    throw FitError(FitError::Kind::unidentifiable, "fitted T1 diverges; no decay resolved on this grid");
  }

  DecayFit fit;
  fit.a = theta(0);
  fit.t1 = tau;
  fit.residual = std::sqrt(ssr / static_cast<double>(n));
  fit.iterations = it;
  // covariance in (a, T1): d m / d T1 = a e^{-t/T1} t / T1^2
  Eigen::MatrixXd jt(ni, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::exp(-t[i] / tau);
    jt(static_cast<Eigen::Index>(i), 0) = e;
    jt(static_cast<Eigen::Index>(i), 1) = fit.a * e * t[i] / (tau * tau);
  }
  const double s2 = n > 2 ? ssr / static_cast<double>(n - 2) : 0.0;
  const Eigen::Matrix2d jtj = jt.transpose() * jt;
  Eigen::FullPivLU<Eigen::Matrix2d> lu(jtj);
  fit.covariance = lu.isInvertible() ? Eigen::Matrix2d(s2 * lu.inverse())
                                     : Eigen::Matrix2d::Constant(std::numeric_limits<double>::infinity());
  return fit;
}

inline DecayFit fit_exponential(const SurvivalCurve& curve) { return fit_exponential(curve.t2(), curve.survival()); }

/// Survival at one hold time for each h_d; point i uses seed cfg.seed + i.
inline std::vector<std::pair<double, double>> sweep_hd(const ExperimentConfig& cfg, const std::vector<double>& hd_grid,
                                                       double t2, const Sampler& sampler, std::size_t threads = 1) {
  for (double hd : hd_grid) {
    if (!(hd > 0.0 && hd <= 1.0)) throw std::invalid_argument("h_d grid values must lie in (0, 1]");
  }
  std::vector<std::pair<double, double>> out(hd_grid.size());
  detail::parallel_for(hd_grid.size(), threads, [&](std::size_t i) {
    ExperimentConfig c = cfg;
    c.h_d = hd_grid[i];
    c.validate();
    out[i] = {hd_grid[i], detail::run_survival(c, sampler, t2, cfg.seed + i, c.initial_state())};
  });
  return out;
}

struct T1SweepPoint {
  double h_d = 0.0;
  SurvivalCurve curve;
  std::optional<DecayFit> fit;
  std::string error;  // fit failure message when !fit
};

struct T1Sweep {
  std::vector<T1SweepPoint> points;

  /// True when every point has a fit and T1 strictly increases with h_d.
  [[nodiscard]] bool strictly_increasing() const {
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!points[i].fit) return false;
      if (i > 0 && !(points[i].fit->t1 > points[i - 1].fit->t1)) return false;
    }
    return true;
  }

  /// Indices of interior points whose T1 is below both neighbours.
  [[nodiscard]] std::vector<std::size_t> local_minima() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i + 1 < points.size(); ++i) {
      const auto& l = points[i - 1].fit;
      const auto& c = points[i].fit;
      const auto& r = points[i + 1].fit;
      if (l && c && r && c->t1 < l->t1 && c->t1 < r->t1) out.push_back(i);
    }
    return out;
  }

  /// Index of the smallest fitted T1, if any point has a fit.
  [[nodiscard]] std::optional<std::size_t> argmin() const {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (points[i].fit && (!best || points[i].fit->t1 < points[*best].fit->t1)) best = i;
    }
    return best;
  }
};

/// Full T1 experiment at every h_d. Point i uses base seed cfg.seed + i * 2^32
/// so its per-t2 seeds never collide with another point's. Fit failures are
/// recorded per point; sampler failures propagate.
inline T1Sweep sweep_t1_vs_hd(const ExperimentConfig& cfg, const std::vector<double>& hd_grid,
                              const Sampler& sampler, std::size_t threads = 1) {
  for (double hd : hd_grid) {
    if (!(hd > 0.0 && hd <= 1.0)) throw std::invalid_argument("h_d grid values must lie in (0, 1]");
  }
  T1Sweep sweep;
  sweep.points.resize(hd_grid.size());
  detail::parallel_for(hd_grid.size(), threads, [&](std::size_t i) {
    ExperimentConfig c = cfg;
    c.h_d = hd_grid[i];
    c.seed = cfg.seed + (static_cast<std::uint64_t>(i) << 32);
    T1SweepPoint& pt = sweep.points[i];
    pt.h_d = hd_grid[i];
    try {
      pt.curve = run_t1_experiment(c, sampler);
      pt.fit = fit_exponential(pt.curve);
    } catch (const FitError& e) {
      pt.error = e.what();
    }
  });
  return sweep;
}

// --- persistence -------------------------------------------------------------

inline std::string format_scalar(double x) { return fmt::format("{:.17g}", x); }

inline std::string curve_csv(const SurvivalCurve& curve) {
  std::string out = "t2_us,survival,shots\n";
  for (const auto& p : curve.points) {
    out += fmt::format("{},{},{}\n", format_scalar(p.t2), format_scalar(p.survival), p.shots);
  }
  return out;
}

inline Json fit_json(const DecayFit& fit) {
  Json out;
  out["a"] = fit.a;
  out["t1_us"] = fit.t1;
  out["residual"] = fit.residual;
  out["covariance"] = Json::array({Json::array({fit.covariance(0, 0), fit.covariance(0, 1)}),
                                   Json::array({fit.covariance(1, 0), fit.covariance(1, 1)})});
  return out;
}

}  // namespace qalab
