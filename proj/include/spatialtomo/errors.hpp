// Copyright 2026 The spatialtomo Authors
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
#include <utility>

namespace spatialtomo {

// Thrown when a Geometry violates one of its invariants. field() names the
// offending member (e.g. "s", "z").
class GeometryError : public std::invalid_argument {
 public:
  GeometryError(std::string field, const std::string& what)
      : std::invalid_argument("geometry." + field + ": " + what),
        field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Precondition violated by a caller (non-Hermitian input, null state, ...).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Adaptive quadrature exhausted its node budget. estimate() carries the best
// value reached.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double re, double im, double error)
      : std::runtime_error(what), re_(re), im_(im), error_(error) {}
  double estimate_real() const noexcept { return re_; }
  double estimate_imag() const noexcept { return im_; }
  double error_estimate() const noexcept { return error_; }

 private:
  double re_;
  double im_;
  double error_;
};

// Reconstruction could not proceed: incomplete record, degenerate settings.
class ReconstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration or data file. The message carries the JSON path.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace spatialtomo
