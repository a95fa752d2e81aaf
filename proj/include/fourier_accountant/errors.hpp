// Copyright 2026 The Fourier Accountant Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FOURIER_ACCOUNTANT_ERRORS_HPP_
#define FOURIER_ACCOUNTANT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace fourier_accountant {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A parameter lies outside the mathematical domain of an operation (bad
// sigma, odd grid size, truncation radius too small, mismatched grids, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// An iterative solver hit its iteration cap without meeting its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// A delta target handed to the epsilon inversion cannot be reached on the
// current grid. Kept distinct from DomainError so callers can tell the two
// failure directions apart.
class TargetOutOfRange : public DomainError {
 public:
  enum class Reason {
    kAboveDeltaAtZero,  // target > delta(0): no positive epsilon needed
    kBelowFloor,        // target not resolvable above the residual tolerance
  };

  TargetOutOfRange(Reason reason, const std::string& what)
      : DomainError(what), reason_(reason) {}

  Reason reason() const noexcept { return reason_; }

 private:
  Reason reason_;
};

}  // namespace fourier_accountant

#endif  // FOURIER_ACCOUNTANT_ERRORS_HPP_
