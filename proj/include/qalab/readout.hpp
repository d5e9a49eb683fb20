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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "qalab/operators.hpp"

namespace qalab {

using Counts = std::map<SpinConfiguration, std::uint64_t>;

inline constexpr double kProbabilityMassTol = 1e-6;

/// Projective computational-basis readout: a multinomial draw of `shots`
/// outcomes with probabilities diag(rho). Deterministic for a given seed.
/// Only outcomes with nonzero counts appear in the result.
inline Counts sample_readout(const DensityMatrix& rho, std::uint64_t shots, std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("shots must be >= 1");
  std::vector<double> p = rho.populations();
  double raw = 0.0;
  for (double x : p) raw += x;
  if (!(std::abs(raw - 1.0) <= kProbabilityMassTol)) {
    throw std::invalid_argument("readout probabilities sum to " + std::to_string(raw));
  }
  // clamp small negative populations; the draw below renormalises implicitly
  double mass = 0.0;
  for (double& x : p) {
    x = std::max(x, 0.0);
    mass += x;
  }

  std::mt19937_64 rng(seed);
  Counts counts;
  auto remaining = static_cast<long long>(shots);
  double rest = mass;
  for (std::size_t i = 0; i < p.size() && remaining > 0; ++i) {
    long long k = 0;
    if (i + 1 == p.size() || p[i] >= rest) {
      k = remaining;
    } else if (p[i] > 0.0) {
      std::binomial_distribution<long long> draw(remaining, std::min(1.0, p[i] / rest));
      k = draw(rng);
    }
    rest -= p[i];
    remaining -= k;
    if (k > 0) counts[SpinConfiguration::from_index(rho.n_qubits(), i)] = static_cast<std::uint64_t>(k);
  }
  return counts;
}

/// Fraction of reads equal to `initial`.
inline double survival_probability(const Counts& counts, const SpinConfiguration& initial) {
  std::uint64_t total = 0;
  for (const auto& [cfg, n] : counts) total += n;
  if (total == 0) throw std::invalid_argument("survival probability of an empty count table");
  const auto it = counts.find(initial);
  return it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
}

}  // namespace qalab
