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

// Scalar root finding for monotone functions: Newton's method kept inside a
// shrinking bracket, with bisection whenever a Newton step is unusable.

#ifndef FOURIER_ACCOUNTANT_ROOT_FINDING_HPP_
#define FOURIER_ACCOUNTANT_ROOT_FINDING_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <utility>

#include "fourier_accountant/errors.hpp"

namespace fourier_accountant {

struct ValueAndSlope {
  double value;
  double slope;
};

struct RootFinderOptions {
  // Stop as soon as |f(x)| <= residual_tolerance.
  double residual_tolerance = 1e-13;
  // Newton/bisection steps before giving up with ConvergenceError.
  std::size_t max_iterations = 100;
  // Slopes smaller than this in magnitude force a bisection step.
  double slope_floor = 1e-300;
};

struct RootFinderResult {
  double root;
  double residual;
  std::size_t iterations;
  std::size_t bisection_steps;
};

// Finds x in [lo, hi] with |f(x)| <= tolerance for a continuous monotone f,
// starting from `start`. `eval` returns f and f' at a point. The bracket must
// satisfy f(lo) * f(hi) <= 0; each iteration takes the Newton step when it
// lands strictly inside the current bracket and bisects otherwise.
template <class Eval>
RootFinderResult safeguarded_newton(Eval&& eval, double lo, double hi,
                                    double start,
                                    const RootFinderOptions& options = {}) {
  if (!(lo <= hi)) throw DomainError("safeguarded_newton: empty bracket");
  const ValueAndSlope at_lo = eval(lo);
  const ValueAndSlope at_hi = eval(hi);
  if (std::abs(at_lo.value) <= options.residual_tolerance) {
    return {lo, at_lo.value, 0, 0};
  }
  if (std::abs(at_hi.value) <= options.residual_tolerance) {
    return {hi, at_hi.value, 0, 0};
  }
  if ((at_lo.value > 0) == (at_hi.value > 0)) {
    std::ostringstream msg;
    msg << "safeguarded_newton: root not bracketed in [" << lo << ", " << hi
        << "] (f = " << at_lo.value << ", " << at_hi.value << ")";
    throw DomainError(msg.str());
  }
  // Orient so that f(neg_side) < 0 < f(pos_side).
  double neg_side = at_lo.value < 0 ? lo : hi;
  double pos_side = at_lo.value < 0 ? hi : lo;

  double x = (start >= lo && start <= hi) ? start : 0.5 * (lo + hi);
  RootFinderResult result{x, 0.0, 0, 0};
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    const ValueAndSlope f = eval(x);
    result.root = x;
    result.residual = f.value;
    result.iterations = it;
    if (std::abs(f.value) <= options.residual_tolerance) return result;
    if (f.value < 0) {
      neg_side = x;
    } else {
      pos_side = x;
    }
    const double a = std::min(neg_side, pos_side);
    const double b = std::max(neg_side, pos_side);
    double next = a + 0.5 * (b - a);
    bool bisect = true;
    if (std::abs(f.slope) >= options.slope_floor && std::isfinite(f.slope)) {
      const double newton = x - f.value / f.slope;
      if (newton > a && newton < b) {
        next = newton;
        bisect = false;
      }
    }
    if (bisect) ++result.bisection_steps;
    if (next <= a || next >= b) {
      // Bracket collapsed to adjacent doubles; the best we can do is here.
      const ValueAndSlope fa = eval(a);
      const ValueAndSlope fb = eval(b);
      const bool take_a = std::abs(fa.value) <= std::abs(fb.value);
      result.root = take_a ? a : b;
      result.residual = take_a ? fa.value : fb.value;
      result.iterations = it + 1;
      if (std::abs(result.residual) <= options.residual_tolerance) {
        return result;
      }
      std::ostringstream msg;
      msg << "safeguarded_newton: bracket collapsed at x = " << result.root
          << " with residual " << result.residual << " above tolerance "
          << options.residual_tolerance;
      throw ConvergenceError(msg.str());
    }
    x = next;
  }
  std::ostringstream msg;
  msg << "safeguarded_newton: no convergence after " << options.max_iterations
      << " iterations (last x = " << result.root
      << ", residual = " << result.residual << ")";
  throw ConvergenceError(msg.str());
}

}  // namespace fourier_accountant

#endif  // FOURIER_ACCOUNTANT_ROOT_FINDING_HPP_
