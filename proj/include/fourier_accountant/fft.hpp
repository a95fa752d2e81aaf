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

// Discrete Fourier transform of arbitrary length.
//
//   (F x)_k      = sum_j x_j e^{-2 pi i k j / n}
//   (F^{-1} w)_k = (1/n) sum_j w_j e^{+2 pi i k j / n}
//
// Power-of-two lengths use an iterative radix-2 Cooley-Tukey transform. Any
// other length goes through Bluestein's chirp-z identity
//
//   k j = (k^2 + j^2 - (k - j)^2) / 2,
//
// which rewrites the DFT as a linear convolution with the chirp
// e^{i pi m^2 / n}; that convolution is evaluated with radix-2 transforms of
// length M >= 2n - 1.

#ifndef FOURIER_ACCOUNTANT_FFT_HPP_
#define FOURIER_ACCOUNTANT_FFT_HPP_

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fourier_accountant/errors.hpp"

namespace fourier_accountant {

using Complex = std::complex<double>;

// Fourier coefficients of a length-n sequence.
using SpectralVector = std::vector<Complex>;

namespace detail {

// Plain complex product. std::complex operator* carries NaN/inf recovery
// branches that keep the butterfly loop from vectorising.
inline Complex cmul(const Complex& a, const Complex& b) {
  return {a.real() * b.real() - a.imag() * b.imag(),
          a.real() * b.imag() + a.imag() * b.real()};
}

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// In-place iterative radix-2 transform of a fixed power-of-two length.
class Radix2Transform {
 public:
  explicit Radix2Transform(std::size_t n) : n_(n), twiddles_(n / 2) {
    if (!is_power_of_two(n)) {
      throw DomainError("Radix2Transform: length must be a power of two");
    }
    // Each twiddle is computed directly from its angle rather than by
    // recurrence, so the table error stays at a few ulp for every entry.
    for (std::size_t j = 0; j < n / 2; ++j) {
      const double angle =
          -2.0 * std::numbers::pi * static_cast<double>(j) /
          static_cast<double>(n);
      twiddles_[j] = {std::cos(angle), std::sin(angle)};
    }
  }

  std::size_t size() const { return n_; }

  // e^{-2 pi i k j / n} kernel, unscaled.
  void forward(Complex* data) const { run(data, false); }
  // e^{+2 pi i k j / n} kernel, unscaled.
  void backward(Complex* data) const { run(data, true); }

 private:
  void run(Complex* data, bool conjugate) const {
    const std::size_t n = n_;
    if (n <= 1) return;
    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
      std::size_t bit = n >> 1;
      for (; j & bit; bit >>= 1) j ^= bit;
      j ^= bit;
      if (i < j) std::swap(data[i], data[j]);
    }
    // Length-2 butterflies need no twiddles.
    for (std::size_t i = 0; i < n; i += 2) {
      const Complex u = data[i];
      const Complex v = data[i + 1];
      data[i] = u + v;
      data[i + 1] = u - v;
    }
    for (std::size_t len = 4; len <= n; len <<= 1) {
      const std::size_t half = len >> 1;
      const std::size_t stride = n / len;
      for (std::size_t start = 0; start < n; start += len) {
        Complex* lo = data + start;
        Complex* hi = lo + half;
        for (std::size_t j = 0; j < half; ++j) {
          Complex w = twiddles_[j * stride];
          if (conjugate) w = std::conj(w);
          const Complex v = cmul(hi[j], w);
          const Complex u = lo[j];
          lo[j] = u + v;
          hi[j] = u - v;
        }
      }
    }
  }

  std::size_t n_;
  std::vector<Complex> twiddles_;
};

}  // namespace detail

// Reusable transform of one fixed length. Building the plan does the
// length-dependent precomputation (twiddles; chirp and its spectrum for
// Bluestein), so repeated transforms of the same length should share a plan.
// A plan is immutable after construction and may be used from several
// threads at once.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n) : n_(n) {
    if (n == 0) throw DomainError("FftPlan: length must be positive");
    if (detail::is_power_of_two(n)) {
      radix2_.emplace(n);
      return;
    }
    const std::size_t m = detail::next_power_of_two(2 * n - 1);
    radix2_.emplace(m);
    // chirp_j = e^{-i pi j^2 / n}. j^2 is reduced mod 2n in integers so the
    // angle stays small and exact.
    chirp_.resize(n);
    const std::uint64_t period = 2 * static_cast<std::uint64_t>(n);
    for (std::size_t j = 0; j < n; ++j) {
      const std::uint64_t jj = static_cast<std::uint64_t>(j);
      const std::uint64_t r = (jj * jj) % period;
      const double angle = -std::numbers::pi * static_cast<double>(r) /
                           static_cast<double>(n);
      chirp_[j] = {std::cos(angle), std::sin(angle)};
    }
    // Convolution kernel b_j = conj(chirp_|j|) laid out circularly, with the
    // 1/M of the inverse transform folded in.
    kernel_spectrum_.assign(m, Complex(0.0, 0.0));
    const double scale = 1.0 / static_cast<double>(m);
    kernel_spectrum_[0] = std::conj(chirp_[0]) * scale;
    for (std::size_t j = 1; j < n; ++j) {
      const Complex b = std::conj(chirp_[j]) * scale;
      kernel_spectrum_[j] = b;
      kernel_spectrum_[m - j] = b;
    }
    radix2_->forward(kernel_spectrum_.data());
  }

  std::size_t size() const { return n_; }

  // Length of the underlying power-of-two transform.
  std::size_t work_size() const { return radix2_->size(); }

  // In-place forward DFT.
  void forward(std::span<Complex> data) const {
    check_length(data.size());
    if (chirp_.empty()) {
      radix2_->forward(data.data());
      return;
    }
    const std::size_t m = radix2_->size();
    std::vector<Complex> work(m, Complex(0.0, 0.0));
    for (std::size_t j = 0; j < n_; ++j) work[j] = detail::cmul(data[j], chirp_[j]);
    radix2_->forward(work.data());
    for (std::size_t k = 0; k < m; ++k) {
      work[k] = detail::cmul(work[k], kernel_spectrum_[k]);
    }
    radix2_->backward(work.data());
    for (std::size_t k = 0; k < n_; ++k) data[k] = detail::cmul(work[k], chirp_[k]);
  }

  // In-place inverse DFT, including the 1/n factor.
  void inverse(std::span<Complex> data) const {
    check_length(data.size());
    const double scale = 1.0 / static_cast<double>(n_);
    if (chirp_.empty()) {
      radix2_->backward(data.data());
      for (Complex& z : data) z *= scale;
      return;
    }
    // F^{-1} w = conj(F conj(w)) / n.
    for (Complex& z : data) z = std::conj(z);
    forward(data);
    for (Complex& z : data) z = std::conj(z) * scale;
  }

 private:
  void check_length(std::size_t length) const {
    if (length != n_) {
      throw DomainError("FftPlan: input length does not match plan length");
    }
  }

  std::size_t n_;
  std::optional<detail::Radix2Transform> radix2_;
  std::vector<Complex> chirp_;
  std::vector<Complex> kernel_spectrum_;
};

inline SpectralVector dft(std::span<const Complex> v) {
  SpectralVector out(v.begin(), v.end());
  FftPlan(v.size()).forward(out);
  return out;
}

inline std::vector<Complex> inverse_dft(std::span<const Complex> w) {
  std::vector<Complex> out(w.begin(), w.end());
  FftPlan(w.size()).inverse(out);
  return out;
}

}  // namespace fourier_accountant

#endif  // FOURIER_ACCOUNTANT_FFT_HPP_
