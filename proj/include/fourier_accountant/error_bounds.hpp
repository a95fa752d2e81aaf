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

// Tail and truncation bounds for k-fold compositions of Poisson subsampled
// Gaussian mechanisms.
//
// All of them go through the Chernoff inequality
//
//   P[S_k >= L] <= exp(k alpha(lambda) - lambda L),
//
// alpha(lambda) = log E[exp(lambda omega)], with some closed-form upper
// estimate of alpha. None of the functions here throw on out-of-envelope
// parameters: each returns a BoundReport listing the preconditions that
// failed, so callers can still print a clearly labelled advisory value.

#ifndef FOURIER_ACCOUNTANT_ERROR_BOUNDS_HPP_
#define FOURIER_ACCOUNTANT_ERROR_BOUNDS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace fourier_accountant {

struct BoundReport {
  // Empty when the quantity is not defined for the inputs (for example a
  // formula that divides by 1 - q at q = 1) or when the bound is only
  // meaningful inside its envelope.
  std::optional<double> value;
  // True iff every precondition of the underlying result holds.
  bool valid = true;
  std::vector<std::string> violations;

  void violate(std::string what) {
    valid = false;
    violations.push_back(std::move(what));
  }
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace detail

// Upper end sigma^2 ln(1/(q sigma)) of the lambda range on which the
// moment bound below is stated.
inline double moment_bound_lambda_max(double sigma, double q) {
  return sigma * sigma * std::log(1.0 / (q * sigma));
}

// alpha(lambda) <= q^2 lambda (lambda + 1) / ((1 - q) sigma^2), Poisson
// subsampling, third-order term dropped. Stated for sigma >= 1,
// q < 1/(16 sigma) and integer 1 <= lambda <= sigma^2 ln(1/(q sigma));
// integrality is not enforced since callers evaluate at lambda = L/2.
inline BoundReport alpha_bound(double sigma, double q, double lambda) {
  BoundReport r;
  if (!(sigma >= 1.0)) r.violate("sigma >= 1 fails (sigma = " + detail::fmt(sigma) + ")");
  if (!(q < 1.0 / (16.0 * sigma))) {
    r.violate("q < 1/(16 sigma) fails (q = " + detail::fmt(q) +
              ", 1/(16 sigma) = " + detail::fmt(1.0 / (16.0 * sigma)) + ")");
  }
  if (!(lambda >= 1.0)) r.violate("lambda >= 1 fails (lambda = " + detail::fmt(lambda) + ")");
  const double lambda_max = moment_bound_lambda_max(sigma, q);
  if (!(lambda <= lambda_max)) {
    r.violate("lambda <= sigma^2 ln(1/(q sigma)) = " + detail::fmt(lambda_max) +
              " fails (lambda = " + detail::fmt(lambda) + ")");
  }
  if (q > 0.0 && q < 1.0 && sigma > 0.0) {
    r.value = q * q * lambda * (lambda + 1.0) / ((1.0 - q) * sigma * sigma);
  }
  return r;
}

// One homogeneous block of a composition, for the tail functions.
struct TailComponent {
  double sigma;
  double q;
  std::uint64_t count;
};

// exp(sum_i k_i alpha_i(L/2)) e^{-L^2/2} with the closed-form alpha above.
// Approximate: the dropped third-order term can make it slightly optimistic.
inline BoundReport tail_estimate(std::span<const TailComponent> components,
                                 double L) {
  BoundReport r;
  const double lambda = 0.5 * L;
  double exponent = -0.5 * L * L;
  bool defined = true;
  for (const TailComponent& c : components) {
    BoundReport a = alpha_bound(c.sigma, c.q, lambda);
    for (std::string& v : a.violations) r.violate(std::move(v));
    if (!a.value) {
      defined = false;
      continue;
    }
    exponent += static_cast<double>(c.count) * *a.value;
  }
  if (defined && !components.empty()) r.value = std::exp(exponent);
  return r;
}

inline BoundReport tail_estimate(double sigma, double q, std::uint64_t k,
                                 double L) {
  const TailComponent c{sigma, q, k};
  return tail_estimate(std::span<const TailComponent>(&c, 1), L);
}

// Chernoff bound for unsubsampled Gaussian mechanisms (q = 1 in every
// component), where alpha(lambda) = lambda (lambda + 1) / (2 sigma^2) holds
// exactly; minimised over lambda > 0. Rigorous, so it carries no envelope.
// The q fields are ignored.
inline BoundReport gaussian_tail_bound(std::span<const TailComponent> components,
                                       double L) {
  BoundReport r;
  // sum_i k_i alpha_i(lambda) = A lambda (lambda + 1).
  double A = 0.0;
  for (const TailComponent& c : components) {
    A += static_cast<double>(c.count) / (2.0 * c.sigma * c.sigma);
  }
  const double lambda = (L - A) / (2.0 * A);
  if (!(lambda > 0.0)) {
    r.value = 1.0;
    return r;
  }
  r.value = std::min(1.0, std::exp(A * lambda * (lambda + 1.0) - lambda * L));
  return r;
}

inline BoundReport gaussian_tail_bound(double sigma, std::uint64_t k, double L) {
  const TailComponent c{sigma, 1.0, k};
  return gaussian_tail_bound(std::span<const TailComponent>(&c, 1), L);
}

namespace detail {

// Conditions on lambda for the analytic bound; appends failures to r.
inline void analytic_lambda_conditions(double sigma, double q, double lambda,
                                       BoundReport& r) {
  if (!(lambda > 1.0)) {
    r.violate("lambda > 1 fails (lambda = L/2 = " + fmt(lambda) + ")");
    return;
  }
  const double s2 = sigma * sigma;
  const double c = std::log1p(1.0 / (q * (lambda - 1.0)));
  const double first = 0.5 * s2 * c - 2.0 * std::log(sigma);
  if (!(lambda <= first)) {
    r.violate("lambda <= sigma^2 c/2 - 2 log sigma = " + fmt(first) +
              " fails (lambda = " + fmt(lambda) + ")");
  }
  // Second condition in multiplied-out form, so a non-positive denominator
  // does not flip the inequality.
  const double numer = 0.5 * s2 * c - std::log(5.0) - 2.0 * std::log(sigma);
  const double denom = c + std::log(q * lambda) + 1.0 / (2.0 * s2);
  if (!(lambda * denom <= numer)) {
    r.violate("lambda (c + log(q lambda) + 1/(2 sigma^2)) <= sigma^2 c/2 - log 5 - "
              "2 log sigma fails (lambda = " + fmt(lambda) + ", lhs = " +
              fmt(lambda * denom) + ", rhs = " + fmt(numer) + ")");
  }
}

}  // namespace detail

// (1 + 2 q^2 (L/2 + 1)(L/2) / sigma^2)^k e^{-L^2/2}, a rigorous bound on
// P[S_k >= L] for q <= 1/5, sigma >= 4 and lambda = L/2 inside the
// admissible range. Outside the envelope the value is withheld.
inline BoundReport analytic_tail_bound(double sigma, double q, std::uint64_t k,
                                       double L) {
  BoundReport r;
  if (!(q > 0.0 && q <= 0.2)) r.violate("q <= 1/5 fails (q = " + detail::fmt(q) + ")");
  if (!(sigma >= 4.0)) r.violate("sigma >= 4 fails (sigma = " + detail::fmt(sigma) + ")");
  if (r.valid) detail::analytic_lambda_conditions(sigma, q, 0.5 * L, r);
  if (r.valid) {
    const double lambda = 0.5 * L;
    const double growth = std::log1p(2.0 * q * q * (lambda + 1.0) * lambda / (sigma * sigma));
    r.value = std::exp(static_cast<double>(k) * growth - 0.5 * L * L);
  }
  return r;
}

// Upper end of the initial interval (1, lambda_max] on which all the
// analytic-bound conditions hold, to within `resolution`. Returns 0 when
// the interval is empty (including sigma < 4 or q > 1/5).
inline double analytic_bound_lambda_max(double sigma, double q,
                                        double resolution = 1e-6) {
  auto holds = [&](double lambda) {
    BoundReport r;
    if (!(q > 0.0 && q <= 0.2) || !(sigma >= 4.0)) return false;
    detail::analytic_lambda_conditions(sigma, q, lambda, r);
    return r.valid;
  };
  const double step = 1e-2;
  double lo = 1.0 + step;
  if (!holds(lo)) return 0.0;
  double hi = lo;
  while (holds(hi)) {
    lo = hi;
    hi += step;
    if (hi > 1e6) return std::numeric_limits<double>::infinity();
  }
  while (hi - lo > resolution) {
    const double mid = 0.5 * (lo + hi);
    (holds(mid) ? lo : hi) = mid;
  }
  return lo;
}

// alpha as a function of lambda, with its own validity report.
using AlphaFunction = std::function<BoundReport(double)>;

struct PeriodisationBound {
  BoundReport report;
  // L k sigma exp(-(sigma^2 L + C)^2 / (2 sigma^2)).
  double truncation_term = 0.0;
  // exp(alpha(L/2)) exp(-L^2/2).
  double tail_term = 0.0;
  // 2 sum_{j>=1} exp(k alpha(jL)) exp(-2 (jL)^2), truncated.
  double series = 0.0;
  std::size_t series_terms = 0;
};

// Error from truncating to [-L, L] and periodising the convolution, with
// C = sigma^2 log(1/(2q)) - 1/2. `alpha` defaults to alpha_bound.
inline PeriodisationBound periodisation_bound(double sigma, double q,
                                              std::uint64_t k, double L,
                                              AlphaFunction alpha = {}) {
  if (!alpha) {
    alpha = [sigma, q](double lambda) { return alpha_bound(sigma, q, lambda); };
  }
  PeriodisationBound out;
  BoundReport& r = out.report;
  if (!(q > 0.0 && q < 0.5)) r.violate("0 < q < 1/2 fails (q = " + detail::fmt(q) + ")");
  if (!(L >= 1.0)) r.violate("L >= 1 fails (L = " + detail::fmt(L) + ")");

  const double s2 = sigma * sigma;
  const double kd = static_cast<double>(k);
  const double C = s2 * std::log(1.0 / (2.0 * q)) - 0.5;
  const double shifted = s2 * L + C;
  out.truncation_term = L * kd * sigma * std::exp(-shifted * shifted / (2.0 * s2));

  bool alpha_flagged = false;
  auto alpha_at = [&](double lambda) -> std::optional<double> {
    BoundReport a = alpha(lambda);
    if (!a.valid && !alpha_flagged) {
      alpha_flagged = true;
      r.violate("alpha outside its validity envelope at lambda = " + detail::fmt(lambda));
    }
    return a.value;
  };

  const std::optional<double> a_half = alpha_at(0.5 * L);
  if (!a_half) return out;
  out.tail_term = std::exp(*a_half - 0.5 * L * L);

  constexpr double kSeriesFloor = 1e-300;
  constexpr std::size_t kMaxSeriesTerms = 64;
  double sum = 0.0;
  for (std::size_t j = 1; j <= kMaxSeriesTerms; ++j) {
    const double lambda = static_cast<double>(j) * L;
    const std::optional<double> a = alpha_at(lambda);
    if (!a) return out;
    const double term = std::exp(kd * *a - 2.0 * lambda * lambda);
    out.series_terms = j;
    sum += term;
    if (term < kSeriesFloor) break;
  }
  out.series = 2.0 * sum;
  r.value = out.truncation_term + out.tail_term + out.series;
  return out;
}

// err(L, n) = 2 |I_n - I_2n| from two evaluations of the same quantity.
inline double richardson_estimate(double coarse, double fine) {
  return 2.0 * std::abs(coarse - fine);
}

}  // namespace fourier_accountant

#endif  // FOURIER_ACCOUNTANT_ERROR_BOUNDS_HPP_
