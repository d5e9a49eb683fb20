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

#include <stdexcept>
#include <string>

namespace qalab {

/// Base class for failures that are not plain precondition violations.
/// Precondition violations (index out of range, k outside [0,1], ...)
/// throw std::invalid_argument.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A level-resolved quantity was requested for a level that shares its
/// energy with a neighbour, so its eigenvector is not unique.
class DegenerateSpectrumError : public Error {
 public:
  using Error::Error;
};

/// A configuration document is unreadable, malformed or inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Eigendecomposition or iterative fit did not converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Integrator drifted outside the norm / trace / positivity tolerance.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  enum class Kind { too_few_points, unidentifiable, no_convergence };

  FitError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  [[nodiscard]] Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class ClientError : public Error {
 public:
  enum class Kind { transport, http_status, malformed_response, timeout, job_failed };

  ClientError(Kind kind, const std::string& what, int http_status = 0)
      : Error(what), kind_(kind), http_status_(http_status) {}

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] int http_status() const noexcept { return http_status_; }

 private:
  Kind kind_;
  int http_status_;
};

}  // namespace qalab
