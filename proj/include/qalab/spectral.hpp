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

/// @file spectral.hpp
/// @brief Gaps, transition matrix elements, Dicke-sector energies and
/// first-order perturbative eigenstates along the anneal path.

#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qalab/model.hpp"
#include "qalab/operators.hpp"

namespace qalab {

/// Energies of the five symmetric-sector Dicke states of the N = 4
/// fully connected model at k = 1, keyed by total S^z.
///
/// These carry the conventional constant offset -2J relative to a direct
/// evaluation of H_P + H_L (e.g. S^z = 0 maps to 0 here and to +2J there);
/// only differences are physical.
inline std::map<int, double> dicke_sector_energies(double coupling, double longitudinal) {
  const double j = coupling;
  const double h = longitudinal;
  return {
      {-4, -8.0 * j - 2.0 * h},
      {+4, -8.0 * j + 2.0 * h},
      {-2, -2.0 * j - h},
      {+2, -2.0 * j + h},
      {0, 0.0},
  };
}

/// |<phi_to| op |phi_from>|; both levels must be nondegenerate.
inline double transition_matrix_element(const EigenSystem& sys, std::size_t from, std::size_t to,
                                        const HermitianOperator& op) {
  require_nondegenerate(sys, from);
  require_nondegenerate(sys, to);
  if (op.dim() != static_cast<std::size_t>(sys.vectors.rows())) {
    throw std::invalid_argument("operator and eigensystem dimensions differ");
  }
  return matrix_element_abs(sys.vectors.col(static_cast<Eigen::Index>(to)), op.matrix(),
                            sys.vectors.col(static_cast<Eigen::Index>(from)));
}

/// First-order state |base> + amplitude * sum_j sigma_j^(+/-) |base>,
/// where the collective flip moves base toward the admixture label.
/// The flip vector is left unnormalised, so for N = 4 it has norm 2.
struct PerturbativeState {
  DickeLabel base;
  DickeLabel admixture;
  double amplitude = 0.0;
  double lambda = 0.0;

  [[nodiscard]] Vector unnormalized() const {
    const Vector b = dicke_state(base).amplitudes();
    const bool raise = admixture.s_z() > base.s_z();
    return b + amplitude * collective_flip(b, base.n_qubits(), raise);
  }

  [[nodiscard]] StateVector normalized() const { return StateVector::normalized(unnormalized()); }
};

/// Ground and first excited states of H(1 - lambda) for N = 4 to first
/// order in lambda:
///   |phi0> = |-4> + lambda/(6J+h) |-2>,  |phi1> = |+4> + lambda/(6J-h) |+2>.
inline std::pair<PerturbativeState, PerturbativeState> perturbative_ground_and_excited(double lambda,
                                                                                       double coupling,
                                                                                       double longitudinal) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  const double d0 = 6.0 * coupling + longitudinal;
  const double d1 = 6.0 * coupling - longitudinal;
  if (std::abs(d0) <= kDegeneracyTol || std::abs(d1) <= kDegeneracyTol) {
    throw DegenerateSpectrumError("6J = +/-h: unperturbed levels are degenerate");
  }
  PerturbativeState ground{DickeLabel(4, -4), DickeLabel(4, -2), lambda / d0, lambda};
  PerturbativeState excited{DickeLabel(4, +4), DickeLabel(4, +2), lambda / d1, lambda};
  return {ground, excited};
}

/// Normalised |psi0> ~ |down> + lambda |up>, |psi1> ~ |up> + lambda |down>.
inline std::pair<StateVector, StateVector> single_qubit_perturbative_states(double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  Vector g(2), e(2);
  g << lambda, 1.0;  // index 0 = up, 1 = down
  e << 1.0, lambda;
  return {StateVector::normalized(g), StateVector::normalized(e)};
}

struct GapProfile {
  std::vector<std::pair<double, double>> points;  // (h_d, E1 - E0)
};

inline GapProfile gap_profile(const ModelParams& p, const std::vector<double>& hd_grid) {
  const AnnealingHamiltonian ham(p);
  GapProfile out;
  out.points.reserve(hd_grid.size());
  for (double hd : hd_grid) {
    if (!(hd > 0.0 && hd <= 1.0)) throw std::invalid_argument("h_d grid values must lie in (0, 1]");
    out.points.emplace_back(hd, eigensystem(ham.at(hd)).gap());
  }
  return out;
}

struct GapCrossing {
  double h_d = 0.0;
  double gap = 0.0;
  bool exact_root = false;  // false: closest approach without a sign change
};

/// h_d in [lo, hi] where the gap E1 - E0 meets `target`. With several roots
/// the one closest to `hi` (the classical end) wins. Without a sign change
/// the point of closest approach is returned and flagged as such.
inline GapCrossing find_gap_crossing(const ModelParams& p, double target, double lo = 0.3, double hi = 1.0,
                                     std::size_t scan_points = 401) {
  if (!(lo > 0.0 && hi <= 1.0 && lo < hi)) throw std::invalid_argument("crossing search needs 0 < lo < hi <= 1");
  const AnnealingHamiltonian ham(p);
  auto f = [&](double k) { return eigensystem(ham.at(k)).gap() - target; };

  std::vector<double> ks(scan_points), fs(scan_points);
  for (std::size_t i = 0; i < scan_points; ++i) {
    ks[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(scan_points - 1);
    fs[i] = f(ks[i]);
  }
  for (std::size_t i = scan_points - 1; i > 0; --i) {
    if (fs[i] == 0.0) return {ks[i], target, true};
    if ((fs[i - 1] < 0.0) != (fs[i] < 0.0)) {
      double a = ks[i - 1], b = ks[i], fa = fs[i - 1];
      for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if ((fm < 0.0) == (fa < 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      const double root = 0.5 * (a + b);
      return {root, f(root) + target, true};
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < scan_points; ++i) {
    if (std::abs(fs[i]) < std::abs(fs[best])) best = i;
  }
  double a = ks[best > 0 ? best - 1 : 0];
  double b = ks[best + 1 < scan_points ? best + 1 : best];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto g = [&](double k) { return std::abs(f(k)); };
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double gc = g(c), gd = g(d);
  for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
    if (gc < gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - inv_phi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + inv_phi * (b - a);
      gd = g(d);
    }
  }
  const double k = 0.5 * (a + b);
  return {k, f(k) + target, false};
}

/// Entropy of the instantaneous first excited state of H(k(t)) across
/// qubits {1..N/2} | {N/2+1..N}.
inline std::vector<std::pair<double, double>> entropy_along_schedule(const ModelParams& p,
                                                                     const RqaSchedule& schedule,
                                                                     const std::vector<double>& times) {
  if (p.n_qubits < 2) throw std::invalid_argument("entanglement entropy needs at least two qubits");
  schedule.validate();
  const AnnealingHamiltonian ham(p);
  std::vector<std::size_t> keep(p.n_qubits / 2);
  std::iota(keep.begin(), keep.end(), std::size_t{1});
  std::vector<std::pair<double, double>> out;
  out.reserve(times.size());
  for (double t : times) {
    const EigenSystem sys = eigensystem(ham.at(schedule_k(t, schedule)));
    require_nondegenerate(sys, 1);
    out.emplace_back(t, entanglement_entropy(sys.state(1), keep));
  }
  return out;
}

/// Ordinary least-squares slope of ln|y| against ln x.
inline double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw std::invalid_argument("slope needs >= 2 paired points");
  const std::size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(std::abs(ys[i]) > 0.0)) throw std::invalid_argument("log-log slope needs nonzero data");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(std::abs(ys[i]));
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

/// Logarithmically spaced grid from lo to hi (inclusive), `per_decade`
/// points per factor of ten.
inline std::vector<double> log_grid(double lo, double hi, std::size_t per_decade = 10) {
  if (!(lo > 0.0 && hi > lo)) throw std::invalid_argument("log grid needs 0 < lo < hi");
  const double decades = std::log10(hi / lo);
  const auto n = static_cast<std::size_t>(std::llround(decades * static_cast<double>(per_decade)));
  std::vector<double> g(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    g[i] = lo * std::pow(10.0, decades * static_cast<double>(i) / static_cast<double>(n));
  }
  g.back() = hi;
  return g;
}

/// |<E0| sigma_site^(axis) |E1>| of H(1 - lambda) for each lambda.
inline std::vector<double> transition_elements_vs_lambda(const ModelParams& p, Axis axis,
                                                         const std::vector<double>& lambdas,
                                                         std::size_t site = 1) {
  const AnnealingHamiltonian ham(p);
  const HermitianOperator op = pauli(axis, site, p.n_qubits);
  std::vector<double> out;
  out.reserve(lambdas.size());
  for (double l : lambdas) out.push_back(transition_matrix_element(eigensystem(ham.at(1.0 - l)), 0, 1, op));
  return out;
}

}  // namespace qalab
