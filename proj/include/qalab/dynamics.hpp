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

/// @file dynamics.hpp
/// @brief Fixed-step RK4 propagation of pure states and density matrices
/// along a piecewise-linear anneal path.
///
/// Every path segment is integrated with its own whole number of equal
/// steps, so vertices (where dk/dt jumps) always fall on step boundaries.

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "qalab/errors.hpp"
#include "qalab/model.hpp"
#include "qalab/noise.hpp"
#include "qalab/operators.hpp"

namespace qalab {

/// max_k ||H(k)|| <= Gamma N + |J| N(N-1)/2 + |h| N/2 (times |energy_scale|).
inline double operator_norm_bound(const ModelParams& p) {
  const auto n = static_cast<double>(p.n_qubits);
  return std::abs(p.energy_scale) *
         (std::abs(p.transverse) * n + std::abs(p.coupling) * n * (n - 1.0) / 2.0 + std::abs(p.longitudinal) * n / 2.0);
}

struct EvolutionConfig {
  double dt = 0.0;                 // us; 0 selects max_norm_step / operator_norm_bound
  double max_norm_step = 0.05;     // target ||H|| dt for the automatic step
  std::size_t record_stride = 1;   // record every n-th step (plus segment ends)
  bool fast_hold = true;           // exact propagation of constant-k segments

  static constexpr std::size_t kEndpointsOnly = std::numeric_limits<std::size_t>::max();

  [[nodiscard]] double step_for(double norm_bound) const {
    if (dt > 0.0) return dt;
    if (!(max_norm_step > 0.0)) throw std::invalid_argument("max_norm_step must be > 0");
    return norm_bound > 0.0 ? max_norm_step / norm_bound : max_norm_step;
  }

  void validate() const {
    if (dt < 0.0 || !std::isfinite(dt)) throw std::invalid_argument("dt must be >= 0");
    if (record_stride < 1) throw std::invalid_argument("record_stride must be >= 1");
  }
};

template <class State>
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;

  [[nodiscard]] const State& final_state() const { return states.back(); }
};

inline constexpr double kNormDriftTol = 1e-6;
inline constexpr double kTraceDriftTol = 1e-6;
inline constexpr double kHermiticityDriftTol = 1e-8;
inline constexpr double kPositivityDriftTol = 1e-6;
// ||H|| dt beyond this is outside the useful RK4 regime
inline constexpr double kMaxStableNormStep = 2.0;

namespace detail {

inline std::size_t steps_for(double length, double dt) {
  const double n = std::ceil(length / dt - 1e-9);
  return static_cast<std::size_t>(std::max(1.0, n));
}

// One RK4 step for y' = f(t, y).
template <class Y, class F>
Y rk4_step(const Y& y, double t, double h, F&& f) {
  const Y k1 = f(t, y);
  const Y k2 = f(t + 0.5 * h, y + (0.5 * h) * k1);
  const Y k3 = f(t + 0.5 * h, y + (0.5 * h) * k2);
  const Y k4 = f(t + h, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline void check_density(const Matrix& rho, double t) {
  const double tr = rho.trace().real();
  const double herm = hermitian_defect(rho);
  std::ostringstream msg;
  if (!(std::abs(tr - 1.0) <= kTraceDriftTol)) {
    msg << "trace drifted to " << tr << " at t = " << t << " us";
    throw IntegrationError(msg.str());
  }
  if (!(herm <= kHermiticityDriftTol)) {
    msg << "hermiticity defect " << herm << " at t = " << t << " us";
    throw IntegrationError(msg.str());
  }
  const Matrix sym = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin < -kPositivityDriftTol) {
    msg << "negative eigenvalue " << lmin << " at t = " << t << " us";
    throw IntegrationError(msg.str());
  }
}

}  // namespace detail

/// Schroedinger propagation with a time-dependent H(t) supplied per segment.
inline Trajectory<StateVector> evolve_closed(const StateVector& psi0, const AnnealPath& path, const ModelParams& params,
                                             const EvolutionConfig& cfg = {}) {
  cfg.validate();
  if (psi0.n_qubits() != params.n_qubits) throw std::invalid_argument("state and model sizes differ");
  const AnnealingHamiltonian ham(params);
  const double bound = operator_norm_bound(params);
  const double dt = cfg.step_for(bound);
  if (bound * dt > kMaxStableNormStep) throw IntegrationError("step size too large for the Hamiltonian norm");

  Trajectory<StateVector> traj;
  traj.times.push_back(0.0);
  traj.states.push_back(psi0);
  Vector psi = psi0.amplitudes();
  const Complex mi(0.0, -1.0);
  for (std::size_t s = 0; s < path.segments(); ++s) {
    const double t0 = path.vertices()[s].t;
    const double len = path.vertices()[s + 1].t - t0;
    const std::size_t n = detail::steps_for(len, dt);
    const double h = len / static_cast<double>(n);
    auto f = [&](double tau, const Vector& y) -> Vector {
      return mi * (ham.at(path.k_on_segment(s, tau)).matrix() * y);
    };
    for (std::size_t i = 0; i < n; ++i) {
      psi = detail::rk4_step(psi, static_cast<double>(i) * h, h, f);
      const bool last = i + 1 == n;
      if (last || (i + 1) % cfg.record_stride == 0) {
        traj.times.push_back(last ? path.vertices()[s + 1].t : t0 + static_cast<double>(i + 1) * h);
        traj.states.push_back(StateVector::normalized(psi));
      }
    }
    const double drift = std::abs(psi.norm() - 1.0);
    if (drift > kNormDriftTol) {
      std::ostringstream msg;
      msg << "norm drifted by " << drift << " by t = " << path.vertices()[s + 1].t << " us";
      throw IntegrationError(msg.str());
    }
  }
  return traj;
}

inline Trajectory<StateVector> evolve_closed(const StateVector& psi0, const RqaSchedule& schedule,
                                             const ModelParams& params, const EvolutionConfig& cfg = {}) {
  return evolve_closed(psi0, to_path(schedule), params, cfg);
}

/// Closed evolution under a time-independent H for duration t.
inline StateVector evolve_closed_static(const StateVector& psi0, const HermitianOperator& h, double duration,
                                        double dt) {
  if (!(duration >= 0.0) || !(dt > 0.0)) throw std::invalid_argument("need duration >= 0 and dt > 0");
  if (psi0.dim() != h.dim()) throw std::invalid_argument("state and operator dimensions differ");
  const std::size_t n = duration == 0.0 ? 0 : detail::steps_for(duration, dt);
  const double step = n == 0 ? 0.0 : duration / static_cast<double>(n);
  const Complex mi(0.0, -1.0);
  auto f = [&](double, const Vector& y) -> Vector { return mi * (h.matrix() * y); };
  Vector psi = psi0.amplitudes();
  for (std::size_t i = 0; i < n; ++i) psi = detail::rk4_step(psi, 0.0, step, f);
  return StateVector::normalized(psi);
}

/// Lindblad propagation along an anneal path.
///
/// lab_frame: fixed collapse operators sqrt(gamma) sigma_j^(axis).
/// eigenbasis_davies: jump operators rebuilt from the instantaneous
/// eigensystem of H(k(t)); constant-k segments reuse one generator.
/// With fast_hold, constant-k segments are propagated exactly in every mode
/// (unitary without noise, matrix exponential of the generator otherwise).
class LindbladPropagator {
 public:
  LindbladPropagator(const ModelParams& params, const NoiseSpec& noise, const EvolutionConfig& cfg = {})
      : params_(params), noise_(noise), cfg_(cfg), ham_(params) {
    noise_.validate();
    cfg_.validate();
    const double bound = operator_norm_bound(params_);
    dt_ = cfg_.step_for(bound);
    if (bound * dt_ > kMaxStableNormStep) throw IntegrationError("step size too large for the Hamiltonian norm");
    if (noise_.active() && noise_.mode == NoiseMode::lab_frame) {
      collapse_ = lab_frame_dissipators(params_, noise_);
      const auto d = static_cast<Eigen::Index>(detail::dim_for_qubits(params_.n_qubits));
      cdc_ = Matrix::Zero(d, d);
      for (const auto& c : collapse_) cdc_ += c.adjoint() * c;
    }
    if (noise_.active() && noise_.mode == NoiseMode::eigenbasis_davies) {
      lab_ops_ = detail::coupling_operators_lab(params_.n_qubits, noise_.axis);
    }
  }

  [[nodiscard]] double dt() const noexcept { return dt_; }
  [[nodiscard]] const ModelParams& params() const noexcept { return params_; }

  /// Advances rho across segment s of `path`; appends recorded states to
  /// `traj` when given.
  [[nodiscard]] Matrix run_segment(const Matrix& rho_in, const AnnealPath& path, std::size_t s,
                                   Trajectory<DensityMatrix>* traj = nullptr) const {
    const double t0 = path.vertices()[s].t;
    const double t1 = path.vertices()[s + 1].t;
    const double len = t1 - t0;
    const bool constant_k = path.vertices()[s].k == path.vertices()[s + 1].k;
    const bool davies = noise_.active() && noise_.mode == NoiseMode::eigenbasis_davies;

    Matrix rho = rho_in;
    if (constant_k && cfg_.fast_hold) {
      const HermitianOperator hk = ham_.at(path.vertices()[s].k);
      if (davies) {
        rho = DaviesGenerator(eigensystem(hk), noise_, lab_ops_).propagate(rho, len);
      } else if (!noise_.active()) {
        const EigenSystem es = eigensystem(hk);
        Vector phases(static_cast<Eigen::Index>(es.size()));
        for (std::size_t i = 0; i < es.size(); ++i) phases(static_cast<Eigen::Index>(i)) = std::exp(Complex(0.0, -es.energies[i] * len));
        const Matrix u = es.vectors * phases.asDiagonal() * es.vectors.adjoint();
        rho = u * rho * u.adjoint();
      } else {
        rho = lab_frame_propagate(hk.matrix(), rho, len);
      }
      detail::check_density(rho, t1);
      if (traj != nullptr) {
        traj->times.push_back(t1);
        traj->states.emplace_back(DensityMatrix::unchecked, rho);
      }
      return rho;
    }

    const std::size_t n = detail::steps_for(len, dt_);
    const double h = len / static_cast<double>(n);
    const Complex mi(0.0, -1.0);

    std::optional<DaviesGenerator> hold_gen;
    if (davies && constant_k) hold_gen.emplace(eigensystem(ham_.at(path.vertices()[s].k)), noise_, lab_ops_);
    // cache of the last generator built for a ramp, keyed by local time
    std::optional<DaviesGenerator> cached;
    double cached_tau = -1.0;

    auto f = [&](double tau, const Matrix& r) -> Matrix {
      const HermitianOperator hk = ham_.at(path.k_on_segment(s, tau));
      Matrix out = mi * commutator(hk.matrix(), r);
      if (!noise_.active()) return out;
      if (noise_.mode == NoiseMode::lab_frame) {
        for (const auto& c : collapse_) out += c * r * c.adjoint();
        out -= 0.5 * (cdc_ * r + r * cdc_);
        return out;
      }
      if (hold_gen) return out + hold_gen->dissipator(r);
      // i*h + h and (i+1)*h may differ in the last bit; treat them as equal
      if (!cached || std::abs(cached_tau - tau) > 1e-9 * h) {
        cached.emplace(eigensystem(hk), noise_, lab_ops_);
        cached_tau = tau;
      }
      return out + cached->dissipator(r);
    };

    for (std::size_t i = 0; i < n; ++i) {
      rho = detail::rk4_step(rho, static_cast<double>(i) * h, h, f);
      const bool last = i + 1 == n;
      if (traj != nullptr && (last || (i + 1) % cfg_.record_stride == 0)) {
        const double t = last ? t1 : t0 + static_cast<double>(i + 1) * h;
        detail::check_density(rho, t);
        traj->times.push_back(t);
        traj->states.emplace_back(DensityMatrix::unchecked, rho);
      }
    }
    detail::check_density(rho, t1);
    return rho;
  }

  /// exp(L t) rho for the time-independent lab-frame generator, via the
  /// column-major superoperator vec(A X B) = (B^T kron A) vec(X).
  [[nodiscard]] Matrix lab_frame_propagate(const Matrix& h, const Matrix& rho, double t) const {
    const Eigen::Index d = h.rows();
    const Matrix id = Matrix::Identity(d, d);
    const Complex mi(0.0, -1.0);
    Matrix l = mi * (Eigen::kroneckerProduct(id, h).eval() - Eigen::kroneckerProduct(h.transpose(), id).eval()) -
               0.5 * (Eigen::kroneckerProduct(id, cdc_).eval() + Eigen::kroneckerProduct(cdc_.transpose(), id).eval());
    for (const auto& c : collapse_) l += Eigen::kroneckerProduct(c.conjugate(), c).eval();
    l *= t;
    const Vector out = l.exp() * Eigen::Map<const Vector>(rho.data(), d * d);
    return Eigen::Map<const Matrix>(out.data(), d, d);
  }

  [[nodiscard]] Trajectory<DensityMatrix> evolve(const DensityMatrix& rho0, const AnnealPath& path) const {
    if (rho0.n_qubits() != params_.n_qubits) throw std::invalid_argument("state and model sizes differ");
    Trajectory<DensityMatrix> traj;
    traj.times.push_back(0.0);
    traj.states.push_back(rho0);
    Matrix rho = rho0.matrix();
    for (std::size_t s = 0; s < path.segments(); ++s) rho = run_segment(rho, path, s, &traj);
    return traj;
  }

  /// Final state only.
  [[nodiscard]] DensityMatrix final_state(const DensityMatrix& rho0, const AnnealPath& path) const {
    Matrix rho = rho0.matrix();
    for (std::size_t s = 0; s < path.segments(); ++s) rho = run_segment(rho, path, s);
    return {DensityMatrix::unchecked, rho};
  }

 private:
  ModelParams params_;
  NoiseSpec noise_;
  EvolutionConfig cfg_;
  AnnealingHamiltonian ham_;
  double dt_ = 0.0;
  std::vector<Matrix> collapse_;
  std::vector<Matrix> lab_ops_;
  Matrix cdc_;
};

inline Trajectory<DensityMatrix> evolve_lindblad(const DensityMatrix& rho0, const AnnealPath& path,
                                                 const ModelParams& params, const NoiseSpec& noise,
                                                 const EvolutionConfig& cfg = {}) {
  return LindbladPropagator(params, noise, cfg).evolve(rho0, path);
}

inline Trajectory<DensityMatrix> evolve_lindblad(const DensityMatrix& rho0, const RqaSchedule& schedule,
                                                 const ModelParams& params, const NoiseSpec& noise,
                                                 const EvolutionConfig& cfg = {}) {
  return evolve_lindblad(rho0, to_path(schedule), params, noise, cfg);
}

}  // namespace qalab
