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


#include "qalab/noise.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "qalab/spectral.hpp"

namespace qalab {
namespace {

NoiseSpec davies(double gamma, SpectralDensity sd = {}) {
  NoiseSpec n;
  n.mode = NoiseMode::eigenbasis_davies;
  n.gamma = gamma;
  n.spectral = sd;
  return n;
}

SpectralDensity white() {
  SpectralDensity sd;
  sd.ohmic = 0.0;
  sd.flat = 1.0;
  return sd;
}

TEST(SpectralDensity, OhmicZeroCrossing) {
  SpectralDensity sd;
  EXPECT_DOUBLE_EQ(sd(0.0), 0.0);
  EXPECT_DOUBLE_EQ(sd(2.0), 2.0);
}

TEST(SpectralDensity, LorentzianPeakEqualsAmplitude) {
  SpectralDensity sd;
  sd.ohmic = 0.0;
  sd.tls_amplitude = 2.0;
  sd.tls_width = 0.05;
  EXPECT_DOUBLE_EQ(spectral_density_eval(sd, sd.tls_center), 2.0);
  EXPECT_NEAR(sd(sd.tls_center + 0.05), 1.0, 1e-12);  // half width at half maximum
}

TEST(SpectralDensity, NoAbsorptionAtZeroTemperature) {
  SpectralDensity sd;
  sd.tls_amplitude = 3.0;
  EXPECT_EQ(sd(-1.0), 0.0);
  EXPECT_EQ(sd(-0.75), 0.0);
}

TEST(SpectralDensity, DetailedBalance) {
  SpectralDensity sd;
  sd.flat = 0.3;
  sd.tls_amplitude = 1.5;
  sd.temperature = 0.4;
  for (double w : {0.1, 0.75, 1.3, 4.0}) EXPECT_NEAR(sd(-w), std::exp(-w / 0.4) * sd(w), 1e-14);
  for (double w = -5.0; w <= 5.0; w += 0.01) EXPECT_GE(sd(w), 0.0);
}

TEST(SpectralDensity, Validation) {
  SpectralDensity sd;
  sd.tls_width = 0.0;
  EXPECT_THROW(sd.validate(), std::invalid_argument);
  sd = {};
  sd.ohmic = -1.0;
  EXPECT_THROW(sd.validate(), std::invalid_argument);
}

TEST(RateMatrix, SingleQubitClosedForm) {
  const double l = 0.1;
  const auto sys = eigensystem(pauli(Axis::z, 1, 1) + l * pauli(Axis::x, 1, 1));
  const auto r = davies_rate_matrix(sys, davies(1.0, white()));
  EXPECT_NEAR(r(1, 0), l * l / (1 + l * l), 1e-12);
  EXPECT_NEAR(r(1, 0), 0.009901, 1e-6);
  EXPECT_EQ(r(0, 1), 0.0);
  EXPECT_EQ(r(0, 0), 0.0);
}

TEST(RateMatrix, ComputationalEigenstatesDoNotRelaxUnderZNoise) {
  const auto sys = eigensystem(total_hamiltonian(1.0, ModelParams::fully_connected()));
  const auto r = davies_rate_matrix(sys, davies(1.0, white()));
  EXPECT_EQ(r.rates.cwiseAbs().maxCoeff(), 0.0);
}

TEST(RateMatrix, SingleQubitRelaxesFasterThanFourQubits) {
  const double l = 0.1;
  const auto four = davies_rate_matrix(eigensystem(total_hamiltonian(1 - l, ModelParams::fully_connected())),
                                       davies(1.0, white()));
  const auto one = davies_rate_matrix(eigensystem(total_hamiltonian(1 - l, ModelParams::single_qubit())),
                                      davies(1.0, white()));
  EXPECT_GT(one(1, 0) / four(1, 0), 20.0);
}

TEST(RateMatrix, NoUpwardRatesAtZeroTemperature) {
  SpectralDensity sd;
  sd.tls_amplitude = 5.0;
  for (double k : {0.3, 0.5, 0.8}) {
    const auto sys = eigensystem(total_hamiltonian(k, ModelParams::fully_connected()));
    const auto r = davies_rate_matrix(sys, davies(0.7, sd));
    for (std::size_t n = 0; n < r.levels(); ++n) {
      for (std::size_t m = 0; m < r.levels(); ++m) {
        if (sys.energies[m] > sys.energies[n]) {
          EXPECT_EQ(r(n, m), 0.0);
        }
      }
    }
  }
}

TEST(RateMatrix, InvariantUnderEigenvectorPhases) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> phase(0.0, 6.283185307179586);
  SpectralDensity sd;
  sd.temperature = 0.5;
  for (double k : {0.35, 0.5, 0.9}) {
    const auto sys = eigensystem(total_hamiltonian(k, ModelParams::fully_connected()));
    EigenSystem rotated = sys;
    for (Eigen::Index c = 0; c < rotated.vectors.cols(); ++c) rotated.vectors.col(c) *= std::polar(1.0, phase(rng));
    const auto a = davies_rate_matrix(sys, davies(1.0, sd));
    const auto b = davies_rate_matrix(rotated, davies(1.0, sd));
    EXPECT_LT((a.rates - b.rates).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(RateMatrix, GrowsWithTheTransitionElement) {
  double prev_rate = -1.0, prev_elem = -1.0;
  for (double l = 0.02; l <= 0.3; l += 0.02) {
    const auto sys = eigensystem(total_hamiltonian(1 - l, ModelParams::fully_connected()));
    const double elem = transition_matrix_element(sys, 0, 1, pauli(Axis::z, 1, 4));
    const double rate = davies_rate_matrix(sys, davies(1.0, white()))(1, 0);
    if (prev_elem >= 0.0) {
      ASSERT_GT(elem, prev_elem);
      EXPECT_GT(rate, prev_rate);
    }
    prev_elem = elem;
    prev_rate = rate;
  }
}

TEST(RateMatrix, ZeroInsideDegenerateBlocks) {
  const auto sys = eigensystem(total_hamiltonian(0.5, ModelParams::fully_connected()));
  const auto block = energy_blocks(sys.energies);
  ASSERT_LT(block.back() + 1, sys.size());  // the 4-qubit spectrum has multiplets
  const auto r = davies_rate_matrix(sys, davies(1.0, white()));
  for (std::size_t n = 0; n < sys.size(); ++n) {
    for (std::size_t m = 0; m < sys.size(); ++m) {
      if (block[n] == block[m]) {
        EXPECT_EQ(r(n, m), 0.0);
      }
      EXPECT_GE(r(n, m), 0.0);
    }
  }
}

TEST(LabFrame, CollapseOperators) {
  NoiseSpec n;
  n.mode = NoiseMode::lab_frame;
  n.gamma = 0.04;
  const auto one = lab_frame_dissipators(ModelParams::single_qubit(), n);
  ASSERT_EQ(one.size(), 1U);
  EXPECT_LT((one[0] - 0.2 * pauli_matrix(Axis::z)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(lab_frame_dissipators(ModelParams::fully_connected(), n).size(), 4U);
  n.axis = Axis::x;
  const auto xs = lab_frame_dissipators(ModelParams::fully_connected(), n);
  EXPECT_LT((xs[2] - 0.2 * pauli(Axis::x, 3, 4).matrix()).cwiseAbs().maxCoeff(), 1e-15);
}

Matrix random_density(Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = Complex(g(rng), g(rng));
  }
  Matrix m = a * a.adjoint();
  return m / m.trace();
}

TEST(DaviesGenerator, TraceAndHermiticityPreserving) {
  SpectralDensity sd;
  sd.tls_amplitude = 2.0;
  sd.temperature = 0.3;
  for (double k : {0.2, 0.5, 1.0}) {
    const DaviesGenerator gen(eigensystem(total_hamiltonian(k, ModelParams::fully_connected())), davies(0.5, sd));
    const Matrix rho = random_density(16, 9);
    const Matrix d = gen.dissipator(rho);
    EXPECT_NEAR(std::abs(d.trace()), 0.0, 1e-13);
    EXPECT_LT((d - d.adjoint()).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(DaviesGenerator, NondegeneratePopulationsFollowTheRateEquation) {
  const auto sys = eigensystem(total_hamiltonian(0.6, ModelParams::single_qubit()));
  const NoiseSpec n = davies(0.3);
  const DaviesGenerator gen(sys, n);
  const Matrix rho0 = sys.vectors * random_density(2, 4) * sys.vectors.adjoint();
  const double t = 2.7;
  const Matrix rho_t = sys.vectors.adjoint() * gen.propagate(rho0, t) * sys.vectors;
  const Matrix rho0_e = sys.vectors.adjoint() * rho0 * sys.vectors;
  const Eigen::VectorXd p = classical_populations(davies_rate_matrix(sys, n), rho0_e.diagonal().real(), t);
  for (Eigen::Index i = 0; i < 2; ++i) EXPECT_NEAR(rho_t(i, i).real(), p(i), 1e-12);
}

// Exact propagation versus brute-force RK4 on the same time-independent
// generator, including degenerate multiplets and inter-block coherences.
double exact_vs_rk4(double dephasing) {
  SpectralDensity sd;
  sd.flat = 0.2;
  sd.temperature = 0.5;
  sd.dephasing = dephasing;
  const auto h = total_hamiltonian(0.5, ModelParams::fully_connected());
  const DaviesGenerator gen(eigensystem(h), davies(0.2, sd));
  const Matrix rho0 = random_density(16, 21);
  const double t = 3.0;
  const int steps = 6000;
  const double dt = t / steps;
  const Complex mi(0.0, -1.0);
  auto f = [&](const Matrix& r) -> Matrix { return mi * commutator(h.matrix(), r) + gen.dissipator(r); };
  Matrix rho = rho0;
  for (int i = 0; i < steps; ++i) {
    const Matrix k1 = f(rho);
    const Matrix k2 = f(rho + 0.5 * dt * k1);
    const Matrix k3 = f(rho + 0.5 * dt * k2);
    const Matrix k4 = f(rho + dt * k3);
    rho += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return (gen.propagate(rho0, t) - rho).cwiseAbs().maxCoeff();
}

TEST(DaviesGenerator, ExactPropagationMatchesIntegration) { EXPECT_LT(exact_vs_rk4(0.0), 1e-9); }

TEST(DaviesGenerator, ExactPropagationWithDephasingMatchesIntegration) { EXPECT_LT(exact_vs_rk4(0.7), 1e-9); }

// Single qubit: the zero-frequency channel adds c0 (x00 - x11)^2 / 2 to the
// coherence decay rate and leaves populations on the rate equation.
TEST(DaviesGenerator, DephasingDampsCoherencesOnly) {
  const auto sys = eigensystem(total_hamiltonian(0.6, ModelParams::single_qubit()));
  SpectralDensity sd;
  sd.dephasing = 4.0;
  const NoiseSpec n = davies(0.3, sd);
  const DaviesGenerator gen(sys, n);
  const Matrix x = sys.vectors.adjoint() * pauli(Axis::z, 1, 1).matrix() * sys.vectors;
  const RateMatrix r = davies_rate_matrix(sys, n);
  const double decay = 0.5 * 0.3 * 4.0 * std::norm(x(0, 0) - x(1, 1)) + 0.5 * r(1, 0);

  const Matrix rho0_e = random_density(2, 8);
  const double t = 1.9;
  const Matrix rho_t = sys.vectors.adjoint() * gen.propagate(sys.vectors * rho0_e * sys.vectors.adjoint(), t) * sys.vectors;
  EXPECT_NEAR(std::abs(rho_t(0, 1)), std::abs(rho0_e(0, 1)) * std::exp(-decay * t), 1e-12);
  const Eigen::VectorXd p = classical_populations(r, rho0_e.diagonal().real(), t);
  for (Eigen::Index i = 0; i < 2; ++i) EXPECT_NEAR(rho_t(i, i).real(), p(i), 1e-12);
}

TEST(DaviesGenerator, DephasingIsOffByDefault) {
  const auto sys = eigensystem(total_hamiltonian(0.5, ModelParams::fully_connected()));
  SpectralDensity sd;
  EXPECT_EQ(sd.dephasing, 0.0);
  const Matrix rho = random_density(16, 5);
  sd.dephasing = 1e-300;
  const Matrix a = DaviesGenerator(sys, davies(0.4)).dissipator(rho);
  const Matrix b = DaviesGenerator(sys, davies(0.4, sd)).dissipator(rho);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-15);
}

// The slowest level at k = 0.7 decays at ~2e-5 per unit time, hence the long horizon.
TEST(DaviesGenerator, RelaxesToTheGroundStateAtZeroTemperature) {
  const auto sys = eigensystem(total_hamiltonian(0.7, ModelParams::fully_connected()));
  const DaviesGenerator gen(sys, davies(1.0, white()));
  const Matrix rho = sys.vectors.adjoint() * gen.propagate(random_density(16, 2), 2e6) * sys.vectors;
  EXPECT_NEAR(rho(0, 0).real(), 1.0, 1e-6);
}

TEST(NoiseSpec, Names) {
  for (NoiseMode m : {NoiseMode::none, NoiseMode::lab_frame, NoiseMode::eigenbasis_davies}) {
    EXPECT_EQ(parse_noise_mode(noise_mode_name(m)), m);
  }
  EXPECT_THROW(parse_noise_mode("davies"), std::invalid_argument);
}

TEST(NoiseSpec, DaviesDefault) {
  const NoiseSpec n = NoiseSpec::davies_default();
  EXPECT_EQ(n.mode, NoiseMode::eigenbasis_davies);
  EXPECT_EQ(n.axis, Axis::z);
  EXPECT_DOUBLE_EQ(n.gamma, 0.01);
  EXPECT_DOUBLE_EQ(n.spectral.ohmic, 1.0);
  EXPECT_DOUBLE_EQ(n.spectral.tls_amplitude, 0.0);
  EXPECT_DOUBLE_EQ(n.spectral.temperature, 0.0);
  EXPECT_DOUBLE_EQ(n.gamma * n.spectral.dephasing, 1.0);
}

TEST(SpectralDensity, RejectsNegativeDephasing) {
  SpectralDensity sd;
  sd.dephasing = -1.0;
  EXPECT_THROW(sd.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace qalab
