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

/// @file model.hpp
/// @brief Annealing Hamiltonian family and the reverse-anneal schedule.
///
///   H(k) = (1-k) H_D + k (k H_L + H_P)
///   H_P  = -J sum_{a<b} sz_a sz_b
///   H_L  = (h/2) sum_a sz_a
///   H_D  = -Gamma sum_a sx_a
///
/// Energies are dimensionless with hbar = 1 and time in microseconds, so an
/// energy E is an angular frequency of E rad/us.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "qalab/operators.hpp"

namespace qalab {

struct ModelParams {
  std::size_t n_qubits = 4;
  double coupling = 1.0;      // J
  double longitudinal = 1.0;  // h
  double transverse = 1.0;    // Gamma
  double energy_scale = 1.0;  // multiplies every Hamiltonian term

  /// Four-qubit ferromagnetic all-to-all model (J = 1).
  static ModelParams fully_connected() { return {4, 1.0, 1.0, 1.0, 1.0}; }
  /// Non-interacting single qubit (J = 0).
  static ModelParams single_qubit() { return {1, 0.0, 1.0, 1.0, 1.0}; }

  void validate() const {
    if (n_qubits < 1) throw std::invalid_argument("n_qubits must be >= 1");
    detail::dim_for_qubits(n_qubits);
    if (!std::isfinite(coupling) || !std::isfinite(longitudinal) || !std::isfinite(transverse) ||
        !std::isfinite(energy_scale)) {
      throw std::invalid_argument("model parameters must be finite");
    }
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Three-phase reverse anneal: ramp k 1 -> h_d over t1, hold for t2, ramp
/// back to 1 over t3. Durations in microseconds.
struct RqaSchedule {
  double t1 = 1.0;
  double t2 = 0.0;
  double t3 = 1.0;
  double h_d = 0.5;

  void validate() const {
    if (!(t1 > 0.0) || !(t3 > 0.0)) throw std::invalid_argument("ramp durations t1, t3 must be > 0");
    if (!(t2 >= 0.0) || !std::isfinite(t2)) throw std::invalid_argument("hold duration t2 must be >= 0");
    if (!(h_d > 0.0 && h_d <= 1.0)) throw std::invalid_argument("hold point h_d must lie in (0, 1]");
  }

  [[nodiscard]] double total() const { return t1 + t2 + t3; }
};

struct SchedulePoint {
  double t = 0.0;
  double k = 1.0;

  friend bool operator==(const SchedulePoint&, const SchedulePoint&) = default;
};

/// Piecewise-linear k(t) through strictly increasing time vertices.
class AnnealPath {
 public:
  explicit AnnealPath(std::vector<SchedulePoint> vertices) : v_(std::move(vertices)) {
    if (v_.size() < 2) throw std::invalid_argument("anneal path needs at least two vertices");
    if (v_.front().t != 0.0) throw std::invalid_argument("anneal path must start at t = 0");
    for (std::size_t i = 0; i < v_.size(); ++i) {
      if (!(v_[i].k >= 0.0 && v_[i].k <= 1.0)) throw std::invalid_argument("anneal path k outside [0,1]");
      if (i > 0 && !(v_[i].t > v_[i - 1].t)) {
        throw std::invalid_argument("anneal path times must be strictly increasing");
      }
    }
  }

  [[nodiscard]] const std::vector<SchedulePoint>& vertices() const noexcept { return v_; }
  [[nodiscard]] std::size_t segments() const noexcept { return v_.size() - 1; }
  [[nodiscard]] double duration() const noexcept { return v_.back().t; }

  /// k on segment s at local time tau in [0, length(s)].
  [[nodiscard]] double k_on_segment(std::size_t s, double tau) const {
    const auto& a = v_[s];
    const auto& b = v_[s + 1];
    if (a.k == b.k) return a.k;
    // clamp: accumulated step times may overshoot the segment by an ulp
    const double u = std::clamp(tau / (b.t - a.t), 0.0, 1.0);
    return a.k + (b.k - a.k) * u;
  }

  [[nodiscard]] double k_at(double t) const {
    if (t < 0.0 || t > duration()) throw std::invalid_argument("time outside the anneal path");
    auto it = std::upper_bound(v_.begin(), v_.end(), t,
                               [](double x, const SchedulePoint& p) { return x < p.t; });
    std::size_t s = it == v_.end() ? v_.size() - 2 : static_cast<std::size_t>(it - v_.begin()) - 1;
    return k_on_segment(s, t - v_[s].t);
  }

 private:
  std::vector<SchedulePoint> v_;
};

/// Vertices (0,1), (t1,h_d), (t1+t2,h_d), (t1+t2+t3,1); the hold vertex is
/// dropped when t2 == 0.
inline AnnealPath to_path(const RqaSchedule& s) {
  s.validate();
  std::vector<SchedulePoint> v{{0.0, 1.0}, {s.t1, s.h_d}};
  if (s.t2 > 0.0) v.push_back({s.t1 + s.t2, s.h_d});
  v.push_back({s.t1 + s.t2 + s.t3, 1.0});
  return AnnealPath(std::move(v));
}

/// Annealing parameter at time t of the reverse-anneal schedule.
inline double schedule_k(double t, const RqaSchedule& s) {
  s.validate();
  const double total = s.total();
  if (!(t >= 0.0 && t <= total)) throw std::invalid_argument("time outside the schedule [0, t1+t2+t3]");
  if (t <= s.t1) return 1.0 + (s.h_d - 1.0) * (t / s.t1);
  if (t <= s.t1 + s.t2) return s.h_d;
  const double tau = std::min(t - s.t1 - s.t2, s.t3);
  return s.h_d + (1.0 - s.h_d) * (tau / s.t3);
}

namespace detail {

inline HermitianOperator diagonal_operator(std::size_t n, const auto& energy_of_index) {
  const auto d = dim_for_qubits(n);
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = energy_of_index(i);
  return operator_from_trusted(std::move(m), n);
}

inline int spin_of(std::size_t index, std::size_t site, std::size_t n) {
  return ((index >> bit_of(site, n)) & 1U) ? -1 : 1;
}

}  // namespace detail

/// -J sum_{a<b} sz_a sz_b; each unordered pair counted once.
inline HermitianOperator problem_hamiltonian(const ModelParams& p) {
  p.validate();
  const std::size_t n = p.n_qubits;
  return detail::diagonal_operator(n, [&](std::size_t idx) {
    double e = 0.0;
    for (std::size_t a = 1; a <= n; ++a) {
      for (std::size_t b = a + 1; b <= n; ++b) {
        e += detail::spin_of(idx, a, n) * detail::spin_of(idx, b, n);
      }
    }
    return -p.coupling * e * p.energy_scale;
  });
}

/// (h/2) sum_a sz_a
inline HermitianOperator longitudinal_hamiltonian(const ModelParams& p) {
  p.validate();
  const std::size_t n = p.n_qubits;
  return detail::diagonal_operator(n, [&](std::size_t idx) {
    int sz = 0;
    for (std::size_t a = 1; a <= n; ++a) sz += detail::spin_of(idx, a, n);
    return 0.5 * p.longitudinal * sz * p.energy_scale;
  });
}

/// -Gamma sum_a sx_a
inline HermitianOperator driver_hamiltonian(const ModelParams& p) {
  p.validate();
  HermitianOperator h = HermitianOperator::zero(p.n_qubits);
  for (std::size_t a = 1; a <= p.n_qubits; ++a) h += pauli(Axis::x, a, p.n_qubits);
  return (-p.transverse * p.energy_scale) * h;
}

/// Precomputed H_P, H_L, H_D for repeated evaluation of H(k).
class AnnealingHamiltonian {
 public:
  explicit AnnealingHamiltonian(const ModelParams& p)
      : params_(p), problem_(problem_hamiltonian(p)), longitudinal_(longitudinal_hamiltonian(p)),
        driver_(driver_hamiltonian(p)) {}

  [[nodiscard]] HermitianOperator at(double k) const {
    if (!(k >= 0.0 && k <= 1.0)) throw std::invalid_argument("annealing parameter k must lie in [0, 1]");
    Matrix m = (1.0 - k) * driver_.matrix() + (k * k) * longitudinal_.matrix() + k * problem_.matrix();
    return operator_from_trusted(std::move(m), params_.n_qubits);
  }

  [[nodiscard]] const ModelParams& params() const noexcept { return params_; }
  [[nodiscard]] const HermitianOperator& problem() const noexcept { return problem_; }
  [[nodiscard]] const HermitianOperator& longitudinal() const noexcept { return longitudinal_; }
  [[nodiscard]] const HermitianOperator& driver() const noexcept { return driver_; }

 private:
  ModelParams params_;
  HermitianOperator problem_;
  HermitianOperator longitudinal_;
  HermitianOperator driver_;
};

/// (1-k) H_D + k (k H_L + H_P), k in [0, 1].
inline HermitianOperator total_hamiltonian(double k, const ModelParams& p) {
  return AnnealingHamiltonian(p).at(k);
}

/// The unique first excited computational-basis configuration of H_P + H_L.
/// Throws when the ground or first excited level is degenerate, in which
/// case the caller must name the initial configuration explicitly.
inline SpinConfiguration initial_excited_configuration(const ModelParams& p) {
  const HermitianOperator h0 = problem_hamiltonian(p) + longitudinal_hamiltonian(p);
  std::map<double, std::vector<std::size_t>> levels;
  for (std::size_t i = 0; i < h0.dim(); ++i) {
    const double e = h0(i, i).real();
    auto it = levels.lower_bound(e - kDegeneracyTol);
    if (it != levels.end() && std::abs(it->first - e) <= kDegeneracyTol) {
      it->second.push_back(i);
    } else {
      levels[e].push_back(i);
    }
  }
  if (levels.size() < 2) throw std::invalid_argument("H_P + H_L has a single level; no excited state");
  auto it = levels.begin();
  if (it->second.size() != 1) {
    throw std::invalid_argument("ground level of H_P + H_L is degenerate; first excited state is ambiguous");
  }
  ++it;
  if (it->second.size() != 1) {
    throw std::invalid_argument("first excited level of H_P + H_L is " + std::to_string(it->second.size()) +
                                "-fold degenerate; specify the initial configuration explicitly");
  }
  return SpinConfiguration::from_index(p.n_qubits, it->second.front());
}

}  // namespace qalab
