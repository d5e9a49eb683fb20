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

/// @file noise.hpp
/// @brief Local-operator noise models: lab-frame Lindblad collapse
/// operators and a weak-coupling generator in the instantaneous eigenbasis.

#pragma once

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "qalab/model.hpp"
#include "qalab/operators.hpp"

namespace qalab {

/// Bath spectral density: Ohmic + flat + Lorentzian two-level-system peak
/// on the emission side (omega >= 0), absorption side from detailed balance.
struct SpectralDensity {
  double ohmic = 1.0;          // eta, S ~ eta * omega
  double flat = 0.0;           // white floor for omega >= 0
  double tls_amplitude = 0.0;  // A, peak height of the Lorentzian
  double tls_center = 0.75;    // omega0, rad/us
  double tls_width = 0.005;    // w, half width at half maximum
  double temperature = 0.0;    // theta in energy units; 0 = no absorption
  double dephasing = 0.0;      // S(0): low-frequency power driving pure dephasing

  void validate() const {
    if (!(ohmic >= 0.0) || !(flat >= 0.0) || !(tls_amplitude >= 0.0) || !(temperature >= 0.0) ||
        !(dephasing >= 0.0)) {
      throw std::invalid_argument("spectral density strengths and temperature must be >= 0");
    }
    if (!(tls_width > 0.0)) throw std::invalid_argument("TLS width must be > 0");
  }

  [[nodiscard]] double emission(double omega) const {
    const double d = omega - tls_center;
    return std::max(0.0, ohmic * omega) + flat + tls_amplitude * tls_width * tls_width / (d * d + tls_width * tls_width);
  }

  [[nodiscard]] double operator()(double omega) const {
    if (omega >= 0.0) return emission(omega);
    if (temperature <= 0.0) return 0.0;
    return std::exp(omega / temperature) * emission(-omega);
  }
};

inline double spectral_density_eval(const SpectralDensity& sd, double omega) { return sd(omega); }

enum class NoiseMode { none, lab_frame, eigenbasis_davies };

inline const char* noise_mode_name(NoiseMode m) {
  switch (m) {
    case NoiseMode::none: return "none";
    case NoiseMode::lab_frame: return "lab_frame";
    case NoiseMode::eigenbasis_davies: return "eigenbasis_davies";
  }
  return "?";
}

inline NoiseMode parse_noise_mode(const std::string& s) {
  if (s == "none") return NoiseMode::none;
  if (s == "lab_frame") return NoiseMode::lab_frame;
  if (s == "eigenbasis_davies") return NoiseMode::eigenbasis_davies;
  throw std::invalid_argument("unknown noise mode '" + s + "'");
}

struct NoiseSpec {
  NoiseMode mode = NoiseMode::none;
  Axis axis = Axis::z;  // local coupling operator on every qubit
  double gamma = 0.0;   // overall rate, 1/us
  SpectralDensity spectral;

  void validate() const {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("noise rate gamma must be >= 0");
    if (mode == NoiseMode::eigenbasis_davies) spectral.validate();
  }

  [[nodiscard]] bool active() const { return mode != NoiseMode::none && gamma > 0.0; }

  /// Reference weak-coupling noise: Ohmic relaxation (eta = 1) on sigma^z at
  /// gamma = 0.01/us with strong low-frequency dephasing (gamma S(0) = 1/us),
  /// zero temperature, TLS off.
  static NoiseSpec davies_default() {
    NoiseSpec n;
    n.mode = NoiseMode::eigenbasis_davies;
    n.axis = Axis::z;
    n.gamma = 0.01;
    n.spectral.dephasing = 100.0;
    return n;
  }
};

/// rates(n, m): transition rate from level n to level m in 1/us.
struct RateMatrix {
  Eigen::MatrixXd rates;

  [[nodiscard]] std::size_t levels() const { return static_cast<std::size_t>(rates.rows()); }
  [[nodiscard]] double operator()(std::size_t n, std::size_t m) const {
    return rates(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  }
  /// Total decay rate out of level n.
  [[nodiscard]] double out_rate(std::size_t n) const { return rates.row(static_cast<Eigen::Index>(n)).sum(); }
};

/// Groups sorted energies into blocks whose neighbours differ by at most
/// kDegeneracyTol. Returns the block index of every level.
inline std::vector<std::size_t> energy_blocks(const std::vector<double>& energies) {
  std::vector<std::size_t> block(energies.size(), 0);
  for (std::size_t i = 1; i < energies.size(); ++i) {
    if (energies[i] < energies[i - 1]) throw std::invalid_argument("energies must be sorted ascending");
    block[i] = block[i - 1] + (energies[i] - energies[i - 1] > kDegeneracyTol ? 1 : 0);
  }
  return block;
}

namespace detail {

inline std::vector<Matrix> coupling_operators_lab(std::size_t n_qubits, Axis axis) {
  std::vector<Matrix> ops;
  ops.reserve(n_qubits);
  for (std::size_t j = 1; j <= n_qubits; ++j) ops.push_back(pauli(axis, j, n_qubits).matrix());
  return ops;
}

inline std::vector<Matrix> to_eigenbasis(const EigenSystem& sys, const std::vector<Matrix>& lab_ops) {
  std::vector<Matrix> xs;
  xs.reserve(lab_ops.size());
  for (const auto& op : lab_ops) xs.push_back(sys.vectors.adjoint() * op * sys.vectors);
  return xs;
}

inline std::vector<Matrix> coupling_operators_eigenbasis(const EigenSystem& sys, Axis axis) {
  return to_eigenbasis(sys, coupling_operators_lab(sys.n_qubits, axis));
}

}  // namespace detail

/// rates(n, m) = gamma * sum_j |<phi_m| sigma_j |phi_n>|^2 * S(E_n - E_m),
/// zero inside a degenerate block (including the diagonal).
inline RateMatrix davies_rate_matrix(const EigenSystem& sys, const NoiseSpec& spec) {
  spec.validate();
  const auto block = energy_blocks(sys.energies);
  const auto xs = detail::coupling_operators_eigenbasis(sys, spec.axis);
  const auto d = static_cast<Eigen::Index>(sys.size());
  RateMatrix r{Eigen::MatrixXd::Zero(d, d)};
  for (Eigen::Index n = 0; n < d; ++n) {
    for (Eigen::Index m = 0; m < d; ++m) {
      if (block[static_cast<std::size_t>(n)] == block[static_cast<std::size_t>(m)]) continue;
      double w = 0.0;
      for (const auto& x : xs) w += std::norm(x(m, n));
      r.rates(n, m) = spec.gamma * w *
                      spec.spectral(sys.energies[static_cast<std::size_t>(n)] - sys.energies[static_cast<std::size_t>(m)]);
    }
  }
  return r;
}

/// Populations after time t under dp/dt = Q p with Q built from `r`.
inline Eigen::VectorXd classical_populations(const RateMatrix& r, const Eigen::VectorXd& p0, double t) {
  const Eigen::Index d = r.rates.rows();
  Eigen::MatrixXd q = r.rates.transpose();
  for (Eigen::Index n = 0; n < d; ++n) q(n, n) = -r.rates.row(n).sum();
  Eigen::MatrixXd qt = q * t;
  return qt.exp() * p0;
}

/// sqrt(gamma) * sigma_j^(axis) for every qubit j.
inline std::vector<Matrix> lab_frame_dissipators(const ModelParams& p, const NoiseSpec& spec) {
  spec.validate();
  std::vector<Matrix> ops;
  ops.reserve(p.n_qubits);
  const double s = std::sqrt(spec.gamma);
  for (std::size_t j = 1; j <= p.n_qubits; ++j) ops.push_back(s * pauli(spec.axis, j, p.n_qubits).matrix());
  return ops;
}

/// Weak-coupling generator built on the eigensystem of a fixed H:
///
///   L(rho) = -i[H, rho] + sum_j sum_{B != B'} c(B,B') (A rho A^dag - 1/2 {A^dag A, rho})
///                       + sum_j c0 (D rho D - 1/2 {D^2, rho}),
///   A = P_B' sigma_j P_B,   c(B,B') = gamma S(E_B - E_B'),
///   D = sum_B P_B sigma_j P_B,   c0 = gamma S(0),
///
/// with P_B the projector on the energy block B. The zero-frequency channel
/// D only dephases (and mixes inside degenerate blocks); it is off unless
/// SpectralDensity::dephasing > 0. For nondegenerate levels
/// the jump operators reduce to sqrt(rates(n,m)) |phi_m><phi_n|.
class DaviesGenerator {
 public:
  DaviesGenerator(EigenSystem sys, const NoiseSpec& spec)
      : DaviesGenerator(std::move(sys), spec, detail::coupling_operators_lab(sys.n_qubits, spec.axis)) {}

  /// `lab_ops` are the lab-frame coupling operators sigma_j^(axis), passed
  /// in to avoid rebuilding them for every instantaneous eigensystem.
  DaviesGenerator(EigenSystem sys, const NoiseSpec& spec, const std::vector<Matrix>& lab_ops)
      : sys_(std::move(sys)), block_of_(energy_blocks(sys_.energies)) {
    spec.validate();
    const std::size_t nb = block_of_.empty() ? 0 : block_of_.back() + 1;
    blocks_.assign(nb, {});
    for (std::size_t i = 0; i < block_of_.size(); ++i) blocks_[block_of_[i]].push_back(static_cast<Eigen::Index>(i));
    block_energy_.assign(nb, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
      double e = 0.0;
      for (auto i : blocks_[b]) e += sys_.energies[static_cast<std::size_t>(i)];
      block_energy_[b] = e / static_cast<double>(blocks_[b].size());
    }
    c_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nb), static_cast<Eigen::Index>(nb));
    for (std::size_t b = 0; b < nb; ++b) {
      for (std::size_t bp = 0; bp < nb; ++bp) {
        if (b != bp) {
          c_(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(bp)) =
              spec.gamma * spec.spectral(block_energy_[b] - block_energy_[bp]);
        }
      }
    }
    xs_ = detail::to_eigenbasis(sys_, lab_ops);

    // decay matrix G = sum_j sum_B' c(B,B') P_B X_j P_B' X_j P_B (block diagonal)
    const auto d = static_cast<Eigen::Index>(sys_.size());
    mask_ = Matrix::Zero(d, d);
    for (Eigen::Index a = 0; a < d; ++a) {
      for (Eigen::Index b = 0; b < d; ++b) mask_(a, b) = blk(a) == blk(b) ? 1.0 : 0.0;
    }
    g_ = Matrix::Zero(d, d);
    for (const auto& x : xs_) {
      Matrix cx(d, d), z(d, d);
      for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index b = 0; b < d; ++b) {
          cx(a, b) = c_(blk(a), blk(b)) * x(a, b);
          z(a, b) = c_(blk(b), blk(a)) * x(a, b);
        }
      }
      g_ += (cx * x).cwiseProduct(mask_);
      zs_.push_back(std::move(z));
    }
    c0_ = spec.gamma * spec.spectral.dephasing;
    if (c0_ > 0.0) {
      for (const auto& x : xs_) {
        Matrix dj = x.cwiseProduct(mask_);
        g_ += c0_ * dj * dj;
        ds_.push_back(std::move(dj));
      }
    }
  }

  [[nodiscard]] const EigenSystem& system() const noexcept { return sys_; }
  [[nodiscard]] std::size_t block_count() const noexcept { return blocks_.size(); }

  /// Dissipator acting on a density matrix expressed in the eigenbasis.
  ///
  /// sum_{B,B'} c(B,B') P_B' X P_B rho P_B X P_B' equals the block-diagonal
  /// part of Z rho_bd X, with Z(a,k) = c(blk(k), blk(a)) X(a,k) and rho_bd
  /// the block-diagonal part of rho.
  [[nodiscard]] Matrix dissipator_eigenbasis(const Matrix& rho) const {
    const Matrix rho_bd = rho.cwiseProduct(mask_);
    Matrix jump = Matrix::Zero(rho.rows(), rho.cols());
    for (std::size_t j = 0; j < xs_.size(); ++j) jump.noalias() += zs_[j] * rho_bd * xs_[j];
    Matrix out = jump.cwiseProduct(mask_) - 0.5 * (g_ * rho + rho * g_);
    for (const auto& dj : ds_) out.noalias() += c0_ * dj * rho * dj;
    return out;
  }

  /// Dissipator acting on a lab-frame density matrix.
  [[nodiscard]] Matrix dissipator(const Matrix& rho_lab) const {
    const Matrix& v = sys_.vectors;
    return v * dissipator_eigenbasis(v.adjoint() * rho_lab * v) * v.adjoint();
  }

  /// Exact propagation of a lab-frame density matrix for time t under the
  /// full generator (Hamiltonian part included). Energies inside a
  /// degenerate block are treated as exactly equal.
  [[nodiscard]] Matrix propagate(const Matrix& rho_lab, double t) const {
    const Matrix& v = sys_.vectors;
    const Matrix rho = v.adjoint() * rho_lab * v;
    const auto d = static_cast<Eigen::Index>(sys_.size());
    const std::size_t nb = blocks_.size();
    Matrix out = Matrix::Zero(d, d);

    // Block-diagonal sector: populations and intra-block coherences.
    std::vector<std::pair<Eigen::Index, Eigen::Index>> slots;
    for (const auto& blk_idx : blocks_) {
      for (auto a : blk_idx) {
        for (auto ap : blk_idx) slots.emplace_back(a, ap);
      }
    }
    const auto ds = static_cast<Eigen::Index>(slots.size());
    Matrix gen(ds, ds);
    for (Eigen::Index col = 0; col < ds; ++col) {
      Matrix unit = Matrix::Zero(d, d);
      unit(slots[static_cast<std::size_t>(col)].first, slots[static_cast<std::size_t>(col)].second) = 1.0;
      const Matrix img = dissipator_eigenbasis(unit);
      for (Eigen::Index row = 0; row < ds; ++row) {
        gen(row, col) = img(slots[static_cast<std::size_t>(row)].first, slots[static_cast<std::size_t>(row)].second);
      }
    }
    Vector vec(ds);
    for (Eigen::Index i = 0; i < ds; ++i) vec(i) = rho(slots[static_cast<std::size_t>(i)].first, slots[static_cast<std::size_t>(i)].second);
    Matrix gt = gen * t;
    const Vector evolved = gt.exp() * vec;
    for (Eigen::Index i = 0; i < ds; ++i) out(slots[static_cast<std::size_t>(i)].first, slots[static_cast<std::size_t>(i)].second) = evolved(i);

    if (c0_ > 0.0) {
      // Each inter-block coherence evolves on its own:
      // d rho_12/dt = -i(E_1 - E_2) rho_12 - 1/2 (G_1 rho_12 + rho_12 G_2) + c0 sum_j D_11 rho_12 D_22,
      // vectorized column-major with vec(A X B) = (B^T kron A) vec(X).
      for (std::size_t b1 = 0; b1 < nb; ++b1) {
        for (std::size_t b2 = 0; b2 < nb; ++b2) {
          if (b1 == b2) continue;
          const auto& i1 = blocks_[b1];
          const auto& i2 = blocks_[b2];
          const auto n1 = static_cast<Eigen::Index>(i1.size());
          const auto n2 = static_cast<Eigen::Index>(i2.size());
          const Matrix id1 = Matrix::Identity(n1, n1);
          const Matrix id2 = Matrix::Identity(n2, n2);
          const Matrix g1 = g_(i1, i1);
          const Matrix g2 = g_(i2, i2);
          Matrix m = Complex(0.0, -(block_energy_[b1] - block_energy_[b2])) * Matrix::Identity(n1 * n2, n1 * n2) -
                     0.5 * (Eigen::kroneckerProduct(id2, g1).eval() + Eigen::kroneckerProduct(g2.transpose(), id1).eval());
          for (const auto& dj : ds_) {
            const Matrix d11 = dj(i1, i1);
            const Matrix d22 = dj(i2, i2);
            m += c0_ * Eigen::kroneckerProduct(d22.transpose(), d11).eval();
          }
          const Matrix blockv = rho(i1, i2);
          const Vector vin = Eigen::Map<const Vector>(blockv.data(), n1 * n2);
          Matrix mt = m * t;
          const Vector vout = mt.exp() * vin;
          out(i1, i2) = Eigen::Map<const Matrix>(vout.data(), n1, n2);
        }
      }
      return v * out * v.adjoint();
    }

    // Inter-block coherences: rho_12(t) = U_1 rho_12 U_2^dag,
    // U_B = exp(-i E_B t) exp(-G_B t / 2).
    std::vector<Matrix> u(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      const auto& idx = blocks_[b];
      Eigen::SelfAdjointEigenSolver<Matrix> es(g_(idx, idx));
      const Eigen::VectorXd damp = (-0.5 * t * es.eigenvalues().array()).exp();
      const Complex phase = std::exp(Complex(0.0, -block_energy_[b] * t));
      u[b] = phase * es.eigenvectors() * damp.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
    }
    for (std::size_t b1 = 0; b1 < nb; ++b1) {
      for (std::size_t b2 = 0; b2 < nb; ++b2) {
        if (b1 == b2) continue;
        out(blocks_[b1], blocks_[b2]) = u[b1] * rho(blocks_[b1], blocks_[b2]) * u[b2].adjoint();
      }
    }
    return v * out * v.adjoint();
  }

 private:
  [[nodiscard]] Eigen::Index blk(Eigen::Index level) const {
    return static_cast<Eigen::Index>(block_of_[static_cast<std::size_t>(level)]);
  }

  EigenSystem sys_;
  std::vector<std::size_t> block_of_;
  std::vector<std::vector<Eigen::Index>> blocks_;
  std::vector<double> block_energy_;
  Eigen::MatrixXd c_;
  std::vector<Matrix> xs_;
  std::vector<Matrix> zs_;
  std::vector<Matrix> ds_;
  double c0_ = 0.0;
  Matrix mask_;
  Matrix g_;
};

}  // namespace qalab
