// Copyright 2026 The subdpd Authors
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

namespace subdpd {

/// Base class of all errors thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Component carriers overlap in frequency.
class OverlapError : public Error {
 public:
  using Error::Error;
};

/// A sample-rate constraint cannot be met (aliasing, mismatched clocks,
/// or the derived composite rate exceeds the configured maximum).
class RateError : public Error {
 public:
  using Error::Error;
};

/// FIR design specification is infeasible within the allowed filter length.
class DesignError : public Error {
 public:
  using Error::Error;
};

/// Cross-correlation peak too weak; the signals appear unrelated.
class AlignError : public Error {
 public:
  using Error::Error;
};

/// Requested IM sub-band order exceeds what the model supports.
class BandError : public Error {
 public:
  using Error::Error;
};

/// Nonlinearity order is out of range or has the wrong parity.
class OrderError : public Error {
 public:
  using Error::Error;
};

/// Basis columns are (numerically) linearly dependent.
class DegenerateBasisError : public Error {
 public:
  using Error::Error;
};

/// Container dimensions do not match.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A denominator is exactly or numerically zero.
class ZeroDivideError : public Error {
 public:
  using Error::Error;
};

/// Adaptive learning residual grew far beyond its initial level.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Complexity model is only tabulated for specific orders.
class UnsupportedOrderError : public Error {
 public:
  using Error::Error;
};

/// Scenario configuration file is malformed or inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace subdpd
