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

/// @file operators.hpp
/// @brief Dense complex linear algebra for small qubit registers.
///
/// Basis convention: computational basis state index i of an N-qubit
/// register encodes qubit 1 in the most significant bit. A set bit means
/// spin up, i.e. sigma^z eigenvalue +1, so index 0 is |up up ... up>.
/// Qubit indices in the public API are 1-based.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <compare>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qalab/errors.hpp"

namespace qalab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kNormTol = 1e-10;
inline constexpr double kTraceTol = 1e-8;
inline constexpr double kPositivityTol = 1e-9;

enum class Axis { x, y, z };

inline const char* axis_name(Axis a) {
  switch (a) {
    case Axis::x: return "x";
    case Axis::y: return "y";
    case Axis::z: return "z";
  }
  return "?";
}

inline Axis parse_axis(const std::string& s) {
  if (s == "x") return Axis::x;
  if (s == "y") return Axis::y;
  if (s == "z") return Axis::z;
  throw std::invalid_argument("unknown axis '" + s + "', expected x, y or z");
}

namespace detail {

inline std::size_t qubits_for_dim(Eigen::Index dim) {
  if (dim <= 0) throw std::invalid_argument("operator dimension must be positive");
  auto d = static_cast<std::uint64_t>(dim);
  if ((d & (d - 1)) != 0) {
    throw std::invalid_argument("dimension " + std::to_string(d) + " is not a power of two");
  }
  std::size_t n = 0;
  while ((std::uint64_t{1} << n) < d) ++n;
  return n;
}

inline std::size_t dim_for_qubits(std::size_t n_qubits) {
  if (n_qubits > 20) throw std::invalid_argument("register too large for dense storage");
  return std::size_t{1} << n_qubits;
}

inline double hermitian_defect(const Matrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// Bit position (from the least significant end) of 1-based qubit `site`.
inline std::size_t bit_of(std::size_t site, std::size_t n_qubits) { return n_qubits - site; }

}  // namespace detail

/// Dense complex square matrix that is Hermitian within kHermitianTol and
/// acts on a register of n_qubits qubits (dim = 2^n_qubits).
class HermitianOperator {
 public:
  HermitianOperator() : HermitianOperator(Matrix::Zero(1, 1), 0) {}

  /// Validating constructor.
  static HermitianOperator from_matrix(Matrix m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("operator matrix must be square");
    const std::size_t n = detail::qubits_for_dim(m.rows());
    const double defect = detail::hermitian_defect(m);
    if (!(defect <= kHermitianTol)) {
      throw std::invalid_argument("matrix is not Hermitian (max |A - A^dagger| = " +
                                  std::to_string(defect) + ")");
    }
    return HermitianOperator(std::move(m), n);
  }

  static HermitianOperator zero(std::size_t n_qubits) {
    const auto d = static_cast<Eigen::Index>(detail::dim_for_qubits(n_qubits));
    return HermitianOperator(Matrix::Zero(d, d), n_qubits);
  }

  static HermitianOperator identity(std::size_t n_qubits) {
    const auto d = static_cast<Eigen::Index>(detail::dim_for_qubits(n_qubits));
    return HermitianOperator(Matrix::Identity(d, d), n_qubits);
  }

  [[nodiscard]] const Matrix& matrix() const noexcept { return m_; }
  [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  [[nodiscard]] std::size_t n_qubits() const noexcept { return n_qubits_; }
  [[nodiscard]] Complex operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  HermitianOperator& operator+=(const HermitianOperator& o) {
    check_same(o);
    m_ += o.m_;
    return *this;
  }
  HermitianOperator& operator-=(const HermitianOperator& o) {
    check_same(o);
    m_ -= o.m_;
    return *this;
  }
  HermitianOperator& operator*=(double s) {
    m_ *= s;
    return *this;
  }

  friend HermitianOperator operator+(HermitianOperator a, const HermitianOperator& b) { return a += b; }
  friend HermitianOperator operator-(HermitianOperator a, const HermitianOperator& b) { return a -= b; }
  friend HermitianOperator operator*(double s, HermitianOperator a) { return a *= s; }
  friend HermitianOperator operator*(HermitianOperator a, double s) { return a *= s; }
  friend HermitianOperator operator-(HermitianOperator a) { return a *= -1.0; }

 private:
  HermitianOperator(Matrix m, std::size_t n) : m_(std::move(m)), n_qubits_(n) {}

  void check_same(const HermitianOperator& o) const {
    if (o.m_.rows() != m_.rows()) throw std::invalid_argument("operator dimensions differ");
  }

  friend HermitianOperator operator_from_trusted(Matrix m, std::size_t n);

  Matrix m_;
  std::size_t n_qubits_;
};

/// Internal: wraps a matrix already known to be Hermitian by construction.
inline HermitianOperator operator_from_trusted(Matrix m, std::size_t n) {
  return HermitianOperator(std::move(m), n);
}

/// Normalised pure state of an n-qubit register.
class StateVector {
 public:
  static StateVector from_amplitudes(Vector amps) {
    const std::size_t n = detail::qubits_for_dim(amps.size());
    const double norm2 = amps.squaredNorm();
    if (!(std::abs(norm2 - 1.0) <= kNormTol)) {
      throw std::invalid_argument("state vector is not normalised (norm^2 = " +
                                  std::to_string(norm2) + ")");
    }
    return StateVector(std::move(amps), n);
  }

  /// Normalises `amps`; fails on the zero vector.
  static StateVector normalized(Vector amps) {
    const double norm = amps.norm();
    if (!(norm > 0.0)) throw std::invalid_argument("cannot normalise the zero vector");
    const std::size_t n = detail::qubits_for_dim(amps.size());
    amps /= norm;
    return StateVector(std::move(amps), n);
  }

  static StateVector basis(std::size_t n_qubits, std::size_t index) {
    const auto d = detail::dim_for_qubits(n_qubits);
    if (index >= d) throw std::invalid_argument("basis index out of range");
    Vector v = Vector::Zero(static_cast<Eigen::Index>(d));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return StateVector(std::move(v), n_qubits);
  }

  [[nodiscard]] const Vector& amplitudes() const noexcept { return v_; }
  [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(v_.size()); }
  [[nodiscard]] std::size_t n_qubits() const noexcept { return n_qubits_; }

 private:
  StateVector(Vector v, std::size_t n) : v_(std::move(v)), n_qubits_(n) {}

  Vector v_;
  std::size_t n_qubits_;
};

/// Density matrix: Hermitian, unit trace, positive semidefinite.
class DensityMatrix {
 public:
  struct unchecked_t {};
  static constexpr unchecked_t unchecked{};

  static DensityMatrix from_matrix(Matrix m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("density matrix must be square");
    const std::size_t n = detail::qubits_for_dim(m.rows());
    if (!(detail::hermitian_defect(m) <= kHermitianTol)) {
      throw std::invalid_argument("density matrix is not Hermitian");
    }
    const double tr = m.trace().real();
    if (!(std::abs(tr - 1.0) <= kTraceTol)) {
      throw std::invalid_argument("density matrix trace " + std::to_string(tr) + " != 1");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kPositivityTol) {
      throw std::invalid_argument("density matrix has a negative eigenvalue");
    }
    return DensityMatrix(std::move(m), n);
  }

  /// Wraps integrator output whose invariants are checked by the caller at
  /// its own tolerance.
  DensityMatrix(unchecked_t, Matrix m) : m_(std::move(m)), n_qubits_(detail::qubits_for_dim(m_.rows())) {}

  static DensityMatrix pure(const StateVector& psi) {
    return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint(), psi.n_qubits());
  }

  static DensityMatrix maximally_mixed(std::size_t n_qubits) {
    const auto d = static_cast<Eigen::Index>(detail::dim_for_qubits(n_qubits));
    return DensityMatrix(Matrix::Identity(d, d) / static_cast<double>(d), n_qubits);
  }

  [[nodiscard]] const Matrix& matrix() const noexcept { return m_; }
  [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  [[nodiscard]] std::size_t n_qubits() const noexcept { return n_qubits_; }
  [[nodiscard]] double trace() const { return m_.trace().real(); }

  /// Diagonal in the computational basis.
  [[nodiscard]] std::vector<double> populations() const {
    std::vector<double> p(dim());
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
    }
    return p;
  }

  [[nodiscard]] double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

 private:
  DensityMatrix(Matrix m, std::size_t n) : m_(std::move(m)), n_qubits_(n) {}

  Matrix m_;
  std::size_t n_qubits_;
};

/// Classical spin configuration; bits[q-1] is qubit q, true = up.
class SpinConfiguration {
 public:
  SpinConfiguration() = default;
  explicit SpinConfiguration(std::vector<bool> bits) : bits_(std::move(bits)) {
    if (bits_.empty()) throw std::invalid_argument("spin configuration needs at least one qubit");
  }

  static SpinConfiguration all_up(std::size_t n) { return SpinConfiguration(std::vector<bool>(n, true)); }
  static SpinConfiguration all_down(std::size_t n) { return SpinConfiguration(std::vector<bool>(n, false)); }

  static SpinConfiguration from_index(std::size_t n_qubits, std::size_t index) {
    const auto d = detail::dim_for_qubits(n_qubits);
    if (index >= d) throw std::invalid_argument("basis index out of range");
    std::vector<bool> bits(n_qubits);
    for (std::size_t q = 1; q <= n_qubits; ++q) {
      // index bit set means spin down
      bits[q - 1] = ((index >> detail::bit_of(q, n_qubits)) & 1U) == 0;
    }
    return SpinConfiguration(std::move(bits));
  }

  /// Spins encoded as +1 (up) / -1 (down).
  static SpinConfiguration from_spins(const std::vector<int>& spins) {
    std::vector<bool> bits;
    bits.reserve(spins.size());
    for (int s : spins) {
      if (s != 1 && s != -1) throw std::invalid_argument("spin values must be +1 or -1");
      bits.push_back(s == 1);
    }
    return SpinConfiguration(std::move(bits));
  }

  [[nodiscard]] std::size_t n_qubits() const noexcept { return bits_.size(); }
  [[nodiscard]] bool up(std::size_t site) const { return bits_.at(site - 1); }
  [[nodiscard]] const std::vector<bool>& bits() const noexcept { return bits_; }

  [[nodiscard]] std::size_t index() const {
    std::size_t idx = 0;
    const std::size_t n = bits_.size();
    for (std::size_t q = 1; q <= n; ++q) {
      if (!bits_[q - 1]) idx |= std::size_t{1} << detail::bit_of(q, n);
    }
    return idx;
  }

  [[nodiscard]] std::vector<int> spins() const {
    std::vector<int> s;
    s.reserve(bits_.size());
    for (bool b : bits_) s.push_back(b ? 1 : -1);
    return s;
  }

  [[nodiscard]] int total_sz() const {
    int s = 0;
    for (bool b : bits_) s += b ? 1 : -1;
    return s;
  }

  /// "u"/"d" per qubit, qubit 1 first.
  [[nodiscard]] std::string to_string() const {
    std::string s;
    for (bool b : bits_) s.push_back(b ? 'u' : 'd');
    return s;
  }

  friend bool operator==(const SpinConfiguration&, const SpinConfiguration&) = default;
  friend bool operator<(const SpinConfiguration& a, const SpinConfiguration& b) {
    if (a.n_qubits() != b.n_qubits()) return a.n_qubits() < b.n_qubits();
    return a.index() < b.index();
  }

 private:
  std::vector<bool> bits_;
};

/// Total-S^z label of a Dicke state of N spins: s_z in {-N, -N+2, ..., N}.
class DickeLabel {
 public:
  DickeLabel(std::size_t n_qubits, int s_z) : n_(n_qubits), s_z_(s_z) {
    const int n = static_cast<int>(n_qubits);
    if (n_qubits == 0 || s_z < -n || s_z > n || ((s_z + n) % 2) != 0) {
      throw std::invalid_argument("invalid Dicke label s_z=" + std::to_string(s_z) + " for N=" +
                                  std::to_string(n_qubits));
    }
  }

  [[nodiscard]] std::size_t n_qubits() const noexcept { return n_; }
  [[nodiscard]] int s_z() const noexcept { return s_z_; }
  [[nodiscard]] std::size_t n_up() const noexcept {
    return static_cast<std::size_t>((s_z_ + static_cast<int>(n_)) / 2);
  }

  friend bool operator==(const DickeLabel&, const DickeLabel&) = default;
  friend auto operator<=>(const DickeLabel& a, const DickeLabel& b) {
    if (auto c = a.n_ <=> b.n_; c != 0) return c;
    return a.s_z_ <=> b.s_z_;
  }

 private:
  std::size_t n_;
  int s_z_;
};

inline Matrix pauli_matrix(Axis axis) {
  Matrix m(2, 2);
  const Complex i(0.0, 1.0);
  switch (axis) {
    case Axis::x: m << 0.0, 1.0, 1.0, 0.0; break;
    case Axis::y: m << 0.0, -i, i, 0.0; break;
    case Axis::z: m << 1.0, 0.0, 0.0, -1.0; break;
  }
  return m;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Embeds a single-qubit matrix at 1-based `site` of an n-qubit register.
inline Matrix embed(const Matrix& single, std::size_t site, std::size_t n_qubits) {
  if (site < 1 || site > n_qubits) {
    throw std::invalid_argument("qubit index " + std::to_string(site) + " out of range 1.." +
                                std::to_string(n_qubits));
  }
  Matrix out = Matrix::Identity(1, 1);
  for (std::size_t q = 1; q <= n_qubits; ++q) {
    out = kron(out, q == site ? single : Matrix::Identity(2, 2));
  }
  return out;
}

/// sigma^(axis) acting on qubit `site` (1-based) of an n-qubit register.
inline HermitianOperator pauli(Axis axis, std::size_t site, std::size_t n_qubits) {
  return operator_from_trusted(embed(pauli_matrix(axis), site, n_qubits), n_qubits);
}

/// Unitary permuting qubits: qubit q of the input ends up at perm[q-1].
inline Matrix qubit_permutation(const std::vector<std::size_t>& perm) {
  const std::size_t n = perm.size();
  std::vector<std::size_t> sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t q = 0; q < n; ++q) {
    if (sorted[q] != q + 1) throw std::invalid_argument("not a permutation of 1..N");
  }
  const auto d = static_cast<Eigen::Index>(detail::dim_for_qubits(n));
  Matrix p = Matrix::Zero(d, d);
  for (std::size_t idx = 0; idx < static_cast<std::size_t>(d); ++idx) {
    std::size_t out = 0;
    for (std::size_t q = 1; q <= n; ++q) {
      if ((idx >> detail::bit_of(q, n)) & 1U) out |= std::size_t{1} << detail::bit_of(perm[q - 1], n);
    }
    p(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(idx)) = 1.0;
  }
  return p;
}

/// Sorted eigenvalues with orthonormal eigenvectors (columns of `vectors`).
struct EigenSystem {
  std::vector<double> energies;
  Matrix vectors;
  std::size_t n_qubits = 0;

  [[nodiscard]] std::size_t size() const noexcept { return energies.size(); }

  [[nodiscard]] StateVector state(std::size_t n) const {
    if (n >= energies.size()) throw std::invalid_argument("level index out of range");
    return StateVector::normalized(vectors.col(static_cast<Eigen::Index>(n)));
  }

  [[nodiscard]] double gap(std::size_t lower = 0, std::size_t upper = 1) const {
    if (upper >= energies.size() || lower >= energies.size()) {
      throw std::invalid_argument("level index out of range");
    }
    return energies[upper] - energies[lower];
  }
};

inline constexpr double kDegeneracyTol = 1e-9;

/// Throws DegenerateSpectrumError if level n shares its energy with a
/// neighbouring level (within kDegeneracyTol).
inline void require_nondegenerate(const EigenSystem& sys, std::size_t n) {
  if (n >= sys.size()) throw std::invalid_argument("level index out of range");
  const double e = sys.energies[n];
  const bool below = n > 0 && std::abs(e - sys.energies[n - 1]) <= kDegeneracyTol;
  const bool above = n + 1 < sys.size() && std::abs(sys.energies[n + 1] - e) <= kDegeneracyTol;
  if (below || above) {
    throw DegenerateSpectrumError("level " + std::to_string(n) + " (E=" + std::to_string(e) +
                                  ") is degenerate; its eigenvector is not unique");
  }
}

namespace detail {

// Largest-magnitude component made real positive; ties go to the lowest index.
inline void fix_phase(Matrix& vecs) {
  for (Eigen::Index c = 0; c < vecs.cols(); ++c) {
    const double maxabs = vecs.col(c).cwiseAbs().maxCoeff();
    Eigen::Index pick = 0;
    for (Eigen::Index r = 0; r < vecs.rows(); ++r) {
      if (std::abs(vecs(r, c)) >= maxabs - 1e-12) {
        pick = r;
        break;
      }
    }
    const Complex z = vecs(pick, c);
    vecs.col(c) *= std::conj(z) / std::abs(z);
  }
}

}  // namespace detail

inline EigenSystem eigensystem(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix());
  if (es.info() != Eigen::Success) throw ConvergenceError("Hermitian eigensolver did not converge");
  EigenSystem sys;
  sys.n_qubits = h.n_qubits();
  sys.energies.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  sys.vectors = es.eigenvectors();
  detail::fix_phase(sys.vectors);
  return sys;
}

/// Validating overload for raw matrices.
inline EigenSystem eigensystem(const Matrix& m) { return eigensystem(HermitianOperator::from_matrix(m)); }

namespace detail {

inline std::vector<std::size_t> normalize_keep(std::vector<std::size_t> keep, std::size_t n) {
  if (keep.empty()) throw std::invalid_argument("partial trace needs a nonempty set of kept qubits");
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  if (keep.front() < 1 || keep.back() > n) {
    throw std::invalid_argument("kept qubit index out of range 1.." + std::to_string(n));
  }
  return keep;
}

}  // namespace detail

/// Reduced density matrix on `keep` (1-based qubit indices). Kept qubits
/// retain their relative order in the result.
inline DensityMatrix partial_trace(const DensityMatrix& rho, std::vector<std::size_t> keep) {
  const std::size_t n = rho.n_qubits();
  keep = detail::normalize_keep(std::move(keep), n);
  std::vector<std::size_t> traced;
  for (std::size_t q = 1; q <= n; ++q) {
    if (!std::binary_search(keep.begin(), keep.end(), q)) traced.push_back(q);
  }
  const std::size_t dk = std::size_t{1} << keep.size();
  const std::size_t dt = std::size_t{1} << traced.size();

  auto scatter = [n](std::size_t local, const std::vector<std::size_t>& sites) {
    std::size_t full = 0;
    const std::size_t m = sites.size();
    for (std::size_t k = 0; k < m; ++k) {
      if ((local >> (m - 1 - k)) & 1U) full |= std::size_t{1} << detail::bit_of(sites[k], n);
    }
    return full;
  };
  std::vector<std::size_t> kept_full(dk), traced_full(dt);
  for (std::size_t a = 0; a < dk; ++a) kept_full[a] = scatter(a, keep);
  for (std::size_t b = 0; b < dt; ++b) traced_full[b] = scatter(b, traced);

  const Matrix& m = rho.matrix();
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
  for (std::size_t a = 0; a < dk; ++a) {
    for (std::size_t ap = 0; ap < dk; ++ap) {
      Complex s = 0.0;
      for (std::size_t b = 0; b < dt; ++b) {
        s += m(static_cast<Eigen::Index>(kept_full[a] | traced_full[b]),
               static_cast<Eigen::Index>(kept_full[ap] | traced_full[b]));
      }
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(ap)) = s;
    }
  }
  return DensityMatrix(DensityMatrix::unchecked, std::move(out));
}

/// Von Neumann entropy -Tr[rho ln rho] (natural log, 0 ln 0 = 0).
inline double von_neumann_entropy(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix(), Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double l = es.eigenvalues()(i);
    if (l > 0.0) s -= l * std::log(l);
  }
  return std::max(0.0, s);
}

/// Entanglement entropy of a pure state across keep | complement.
inline double entanglement_entropy(const StateVector& psi, std::vector<std::size_t> keep) {
  return von_neumann_entropy(partial_trace(DensityMatrix::pure(psi), std::move(keep)));
}

/// Normalised Dicke state: equal-weight superposition of all
/// configurations with the given total S^z.
inline StateVector dicke_state(const DickeLabel& label) {
  const std::size_t n = label.n_qubits();
  const auto d = detail::dim_for_qubits(n);
  const std::size_t n_down = n - label.n_up();
  Vector v = Vector::Zero(static_cast<Eigen::Index>(d));
  for (std::size_t idx = 0; idx < d; ++idx) {
    if (static_cast<std::size_t>(__builtin_popcountll(idx)) == n_down) v(static_cast<Eigen::Index>(idx)) = 1.0;
  }
  return StateVector::normalized(std::move(v));
}

/// Unnormalised collective flip sum_j sigma_j^(+) |psi> (raise = true) or
/// sum_j sigma_j^(-) |psi>.
inline Vector collective_flip(const Vector& psi, std::size_t n_qubits, bool raise) {
  const auto d = detail::dim_for_qubits(n_qubits);
  if (static_cast<std::size_t>(psi.size()) != d) throw std::invalid_argument("state dimension mismatch");
  Vector out = Vector::Zero(psi.size());
  for (std::size_t idx = 0; idx < d; ++idx) {
    const Complex a = psi(static_cast<Eigen::Index>(idx));
    if (a == Complex(0.0)) continue;
    for (std::size_t q = 1; q <= n_qubits; ++q) {
      const std::size_t bit = std::size_t{1} << detail::bit_of(q, n_qubits);
      const bool is_down = (idx & bit) != 0;
      // sigma^+ takes down -> up (clears the bit); sigma^- the reverse
      if (raise && is_down) out(static_cast<Eigen::Index>(idx & ~bit)) += a;
      if (!raise && !is_down) out(static_cast<Eigen::Index>(idx | bit)) += a;
    }
  }
  return out;
}

inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

/// |<bra|op|ket>|
inline double matrix_element_abs(const Vector& bra, const Matrix& op, const Vector& ket) {
  return std::abs(bra.dot(op * ket));
}

}  // namespace qalab
