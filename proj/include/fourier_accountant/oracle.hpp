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

// Slow reference implementations for cross-checking the fast path: direct
// quadratic-time convolution, the DFT by its defining sum, bisection
// inversion of delta(eps), and the closed-form delta of the plain Gaussian
// mechanism. Nothing here shares arithmetic with spectral.hpp or fft.hpp.

#ifndef FOURIER_ACCOUNTANT_ORACLE_HPP_
#define FOURIER_ACCOUNTANT_ORACLE_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <sstream>
#include <vector>

#include "fourier_accountant/accountant.hpp"
#include "fourier_accountant/discretization.hpp"
#include "fourier_accountant/errors.hpp"
#include "fourier_accountant/mechanisms.hpp"

namespace fourier_accountant::oracle {

inline constexpr std::size_t kMaxDirectPoints = 8192;
inline constexpr std::uint64_t kMaxDirectCompositions = 3;

// out_i = dx sum_j a_j b_{(i - j + n/2) mod n}: the periodic convolution on
// a lattice whose origin sits at index n/2. Entries of `a` at or below
// skip_below are left out of the sum, which makes it affordable for large
// n when `a` is concentrated.
inline std::vector<double> periodic_convolution(std::span<const double> a,
                                                std::span<const double> b,
                                                double dx,
                                                double skip_below = 0.0) {
  const std::size_t n = a.size();
  if (b.size() != n || n % 2 != 0) {
    throw DomainError("periodic_convolution: operands must share an even length");
  }
  const std::size_t half = n / 2;
  std::vector<double> out(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double aj = a[j];
    if (aj == 0.0 || std::abs(aj) <= skip_below) continue;
    // out[i] += aj * b[m] with m = (i - j + half) mod n, i.e. i = (m + j -
    // half) mod n; walk m in two contiguous runs.
    const std::size_t shift = (j + n - half) % n;  // i for m = 0
    const std::size_t first_run = n - shift;
    for (std::size_t m = 0; m < first_run; ++m) out[shift + m] += aj * b[m];
    for (std::size_t m = first_run; m < n; ++m) out[m - first_run] += aj * b[m];
  }
  for (double& v : out) v *= dx;
  return out;
}

// k-fold periodic self-convolution by repeated direct summation.
inline std::vector<double> direct_convolution_power(const DiscretePld& pld,
                                                    std::uint64_t k) {
  const std::size_t n = pld.grid.n();
  if (k < 1 || k > kMaxDirectCompositions) {
    std::ostringstream msg;
    msg << "direct convolution oracle supports 1 <= k <= "
        << kMaxDirectCompositions << ", got " << k;
    throw DomainError(msg.str());
  }
  if (n > kMaxDirectPoints) {
    std::ostringstream msg;
    msg << "direct convolution oracle supports n <= " << kMaxDirectPoints
        << ", got " << n;
    throw DomainError(msg.str());
  }
  std::vector<double> acc = pld.values;
  for (std::uint64_t i = 1; i < k; ++i) {
    acc = periodic_convolution(acc, pld.values, pld.grid.dx());
  }
  return acc;
}

// dx sum over x_i > eps of (1 - e^{eps - x_i}) c_i.
inline double riemann_delta(std::span<const double> c, const Grid& grid,
                            double eps) {
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.n(); ++i) {
    const double x = grid.x(i);
    if (x > eps) sum += (1.0 - std::exp(eps - x)) * c[i];
  }
  return grid.dx() * sum;
}

// delta(eps) of the k-fold composition with C^k from direct summation.
inline double direct_convolution_delta(const MechanismSpec& spec,
                                       std::uint64_t k, const Grid& grid,
                                       double eps) {
  const DiscretePld pld = discretize(spec, grid);
  const std::vector<double> c = direct_convolution_power(pld, k);
  return riemann_delta(c, grid, eps);
}

// (F x)_k by its defining O(n^2) sum, angles reduced exactly mod n.
inline std::vector<Complex> brute_force_dft(std::span<const Complex> x,
                                            bool inverse = false) {
  const std::size_t n = x.size();
  std::vector<Complex> out(n);
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t k = 0; k < n; ++k) {
    long double re = 0.0L;
    long double im = 0.0L;
    for (std::size_t j = 0; j < n; ++j) {
      const std::uint64_t r = (static_cast<std::uint64_t>(k) * j) % n;
      const long double angle = sign * 2.0L * std::numbers::pi_v<long double> *
                                static_cast<long double>(r) /
                                static_cast<long double>(n);
      const long double c = std::cos(angle);
      const long double s = std::sin(angle);
      re += x[j].real() * c - x[j].imag() * s;
      im += x[j].real() * s + x[j].imag() * c;
    }
    if (inverse) {
      re /= static_cast<long double>(n);
      im /= static_cast<long double>(n);
    }
    out[k] = Complex(static_cast<double>(re), static_cast<double>(im));
  }
  return out;
}

inline std::vector<Complex> brute_force_inverse_dft(std::span<const Complex> w) {
  return brute_force_dft(w, true);
}

// eps in [lo, hi] with |delta(eps) - target| <= tolerance for a
// nonincreasing delta, by plain bisection.
inline double bisection_epsilon(const std::function<double(double)>& delta,
                                double lo, double hi, double target,
                                double tolerance = 1e-9) {
  const double d_lo = delta(lo);
  if (std::abs(d_lo - target) <= tolerance) return lo;
  const double d_hi = delta(hi);
  if (std::abs(d_hi - target) <= tolerance) return hi;
  if (!(d_lo > target && d_hi < target)) {
    std::ostringstream msg;
    msg << "bisection_epsilon: target " << target << " not bracketed by delta("
        << lo << ") = " << d_lo << " and delta(" << hi << ") = " << d_hi;
    throw DomainError(msg.str());
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return mid;
    const double d = delta(mid);
    if (std::abs(d - target) <= tolerance) return mid;
    (d > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Same, over [0, L - dx] on the accountant's delta(eps) curve.
inline double bisection_epsilon(const MechanismSpec& spec, std::uint64_t k,
                                const Grid& grid, double delta_target,
                                double tolerance = 1e-9) {
  const CompositionCurve curve = build_curve({{spec, k}}, grid, std::nullopt);
  return bisection_epsilon([&](double e) { return curve.delta_at(e); }, 0.0,
                           grid.L() - grid.dx(), delta_target, tolerance);
}

// Complementary error function: the positive-term series
//   erf(x) = (2/sqrt(pi)) e^{-x^2} sum_n 2^n x^{2n+1} / (1 3 5 ... (2n+1))
// for small |x|, the Laplace continued fraction
//   erfc(x) = (e^{-x^2}/sqrt(pi)) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
// for large x, evaluated by the modified Lentz method.
inline double erfc(double x) {
  if (std::isnan(x)) return x;
  if (x < 0) return 2.0 - erfc(-x);
  constexpr double kSwitch = 1.0;
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  if (x < kSwitch) {
    double term = x;
    double sum = x;
    const double x2 = x * x;
    for (int n = 1; n < 500; ++n) {
      term *= 2.0 * x2 / (2.0 * n + 1.0);
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return 1.0 - 2.0 * inv_sqrt_pi * std::exp(-x2) * sum;
  }
  // f = x + a_1/(x + a_2/(x + ...)), a_j = j/2.
  constexpr double tiny = 1e-300;
  double f = x;
  double C = x;
  double D = 0.0;
  for (int j = 1; j < 500; ++j) {
    const double a = 0.5 * j;
    D = x + a * D;
    if (D == 0.0) D = tiny;
    C = x + a / C;
    if (C == 0.0) C = tiny;
    D = 1.0 / D;
    const double delta = C * D;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return inv_sqrt_pi * std::exp(-x * x) / f;
}

// Standard normal CDF.
inline double normal_cdf(double x) {
  return 0.5 * erfc(-x / std::numbers::sqrt2);
}

// Tight delta(eps) of k compositions of the Gaussian mechanism with noise
// sigma and unit sensitivity:
//   Phi(-eps sigma/sqrt(k) + sqrt(k)/(2 sigma))
//     - e^eps Phi(-eps sigma/sqrt(k) - sqrt(k)/(2 sigma)).
inline double gaussian_mechanism_delta(double sigma, std::uint64_t k,
                                       double eps) {
  const double rk = std::sqrt(static_cast<double>(k));
  const double a = -eps * sigma / rk;
  const double b = rk / (2.0 * sigma);
  return normal_cdf(a + b) - std::exp(eps) * normal_cdf(a - b);
}

}  // namespace fourier_accountant::oracle

#endif  // FOURIER_ACCOUNTANT_ORACLE_HPP_
