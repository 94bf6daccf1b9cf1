// Copyright 2026 The nucleartight Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace nucleartight {

// Precondition violations on public operations throw std::invalid_argument.
// The two types below map onto distinct CLI exit codes.

/// Malformed or inconsistent scenario configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A computed quantity violated a structural guarantee (e.g. an increment
/// covariance that is not positive semidefinite). Signals a misconfigured
/// quadrature or truncation rather than bad input.
class NumericalIntegrityError : public std::runtime_error {
 public:
  explicit NumericalIntegrityError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace nucleartight
