// Copyright 2026 The umlmc Authors
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

#include <exception>
#include <string>
#include <utility>

namespace umlmc {

/// Base class for every error raised by the library. The message can be
/// extended with context (level, sample index, config key) as the error
/// propagates, while the dynamic type is kept for exit-code mapping.
class Error : public std::exception {
 public:
  explicit Error(std::string message) : message_(std::move(message)) {}

  const char* what() const noexcept override { return message_.c_str(); }

  void add_context(const std::string& context) { message_ = context + ": " + message_; }

 private:
  std::string message_;
};

/// Malformed or unknown configuration entry.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A parameter outside its admissible domain (e.g. a <= e/2 for radial_gauss).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A simulated state left the finite range.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Accumulated log Radon-Nikodym weight exceeded the representable range.
class OverflowError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value met during a numerical check.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// The potential lacks the regularity metadata required by an algorithm.
class RegimeError : public Error {
 public:
  using Error::Error;
};

/// Geometric level draw exceeded its safety cap.
class JCapError : public Error {
 public:
  using Error::Error;
};

/// Rate regression could not be performed.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of an operation (e.g. scan radius inside R2).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Evaluation would overflow double precision.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A potential expected to be radially symmetric is not.
class IsotropyError : public Error {
 public:
  using Error::Error;
};

}  // namespace umlmc
