// Copyright 2026 The qfk-lab Authors
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

namespace qfk {

/// Invalid function argument (bad qubit index, size mismatch, ...).
class ArgumentError : public std::invalid_argument {
  public:
    explicit ArgumentError(const std::string &msg)
        : std::invalid_argument(msg) {}
};

/// A requested computation would exceed a configured resource ceiling.
class ResourceError : public std::runtime_error {
  public:
    explicit ResourceError(const std::string &msg)
        : std::runtime_error(msg) {}
};

/// An iterative solver failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
  public:
    explicit ConvergenceError(const std::string &msg, double residual)
        : std::runtime_error(msg), final_residual(residual) {}
    double final_residual;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string &msg) : std::runtime_error(msg) {}
};

/// A numerically ill-posed request (rank deficiency, empty spectrum, ...).
class DiagnosticError : public std::runtime_error {
  public:
    explicit DiagnosticError(const std::string &msg)
        : std::runtime_error(msg) {}
};

} // namespace qfk
