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

// Periodic convolution powers of sampled densities.
//
// For a density sampled as omega on a Grid, the k-fold periodic convolution
// is
//
//   C^k = (1/dx) D F^{-1}( F(D omega dx)^k )
//
// where D is the half swap and the power is elementwise. Several different
// densities on the same grid combine the same way, with the product of
// their individual spectra (each raised to its own repetition count) in
// place of the single power.

#ifndef FOURIER_ACCOUNTANT_SPECTRAL_HPP_
#define FOURIER_ACCOUNTANT_SPECTRAL_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include "fourier_accountant/discretization.hpp"
#include "fourier_accountant/errors.hpp"
#include "fourier_accountant/fft.hpp"

namespace fourier_accountant {

// Inverse transforms whose imaginary part exceeds this fraction of the real
// part's magnitude are rejected.
inline constexpr double kMaxImaginaryResidue = 1e-6;

// k-fold periodic convolution of one or more sampled densities.
struct ConvolvedPld {
  Grid grid;
  std::vector<double> values;
  // Total composition count (sum of all repetition counts).
  std::uint64_t k = 0;
  // max_i |Im| / max_i |Re| of the inverse transform before it was dropped.
  double imaginary_residue = 0.0;
  // Entries that came out negative from round-off and were set to zero.
  std::size_t clamped_entries = 0;

  double mass() const {
    return grid.dx() * std::accumulate(values.begin(), values.end(), 0.0);
  }
};

// z^k by repeated squaring.
inline Complex complex_power(Complex z, std::uint64_t k) {
  Complex result(1.0, 0.0);
  while (k > 0) {
    if (k & 1u) result = detail::cmul(result, z);
    k >>= 1;
    if (k > 0) z = detail::cmul(z, z);
  }
  return result;
}

// One factor of a heterogeneous product: a sampled density and how many
// times it is composed.
struct PldPower {
  std::reference_wrapper<const DiscretePld> pld;
  std::uint64_t count;
};

namespace detail {

inline void check_plan(const Grid& grid, const FftPlan& plan) {
  if (plan.size() != grid.n()) {
    std::ostringstream msg;
    msg << "spectral: FFT plan length " << plan.size()
        << " does not match grid size " << grid.n();
    throw DomainError(msg.str());
  }
}

// F(D omega dx).
inline SpectralVector pld_spectrum(const DiscretePld& pld, const FftPlan& plan) {
  const std::size_t n = pld.grid.n();
  if (pld.values.size() != n) {
    throw DomainError("spectral: density has the wrong number of samples");
  }
  const double dx = pld.grid.dx();
  const std::size_t half = n / 2;
  SpectralVector out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = Complex(pld.values[(i + half) % n] * dx, 0.0);
  }
  plan.forward(out);
  return out;
}

// (1/dx) D F^{-1}(spectrum), real part, negatives clamped.
inline ConvolvedPld back_to_grid(SpectralVector spectrum, const Grid& grid,
                                 std::uint64_t k, const FftPlan& plan) {
  plan.inverse(spectrum);
  const std::size_t n = grid.n();
  const std::size_t half = n / 2;
  double max_real = 0.0;
  double max_imag = 0.0;
  bool finite = true;
  for (const Complex& z : spectrum) {
    finite = finite && std::isfinite(z.real()) && std::isfinite(z.imag());
    max_real = std::max(max_real, std::abs(z.real()));
    max_imag = std::max(max_imag, std::abs(z.imag()));
  }
  if (!finite) {
    throw DomainError("spectral: inverse transform produced non-finite values");
  }
  const double residue = max_real > 0 ? max_imag / max_real : max_imag;
  if (!(residue <= kMaxImaginaryResidue)) {
    std::ostringstream msg;
    msg << "spectral: imaginary residue " << residue
        << " of the inverse transform exceeds " << kMaxImaginaryResidue
        << " (non-finite or corrupted input?)";
    throw DomainError(msg.str());
  }
  ConvolvedPld out{grid, std::vector<double>(n), k, residue, 0};
  const double inv_dx = 1.0 / grid.dx();
  for (std::size_t i = 0; i < n; ++i) {
    double v = spectrum[(i + half) % n].real() * inv_dx;
    if (v < 0.0) {
      v = 0.0;
      ++out.clamped_entries;
    }
    out.values[i] = v;
  }
  return out;
}

}  // namespace detail

// Product of the factors' spectra, each raised to its count. All factors
// must share one grid. `plan`, when given, must have the grid's length.
inline ConvolvedPld convolution_product(std::span<const PldPower> factors,
                                        const FftPlan* plan = nullptr) {
  if (factors.empty()) {
    throw DomainError("convolution_product: empty list of densities");
  }
  const Grid& grid = factors.front().pld.get().grid;
  std::uint64_t k = 0;
  for (const PldPower& f : factors) {
    if (!(f.pld.get().grid == grid)) {
      std::ostringstream msg;
      msg << "convolution_product: grid mismatch (L = " << f.pld.get().grid.L()
          << ", n = " << f.pld.get().grid.n() << " vs L = " << grid.L()
          << ", n = " << grid.n() << ")";
      throw DomainError(msg.str());
    }
    if (f.count == 0) {
      throw DomainError("convolution_product: repetition counts must be >= 1");
    }
    k += f.count;
  }
  std::optional<FftPlan> own_plan;
  if (plan == nullptr) plan = &own_plan.emplace(grid.n());
  detail::check_plan(grid, *plan);

  SpectralVector acc;
  for (const PldPower& f : factors) {
    SpectralVector s = detail::pld_spectrum(f.pld.get(), *plan);
    if (acc.empty()) {
      acc.resize(s.size());
      for (std::size_t i = 0; i < s.size(); ++i) acc[i] = complex_power(s[i], f.count);
    } else {
      for (std::size_t i = 0; i < s.size(); ++i) {
        acc[i] = detail::cmul(acc[i], complex_power(s[i], f.count));
      }
    }
  }
  return detail::back_to_grid(std::move(acc), grid, k, *plan);
}

// Convolution of several densities, each used once.
inline ConvolvedPld convolution_product(std::span<const DiscretePld> plds,
                                        const FftPlan* plan = nullptr) {
  std::vector<PldPower> factors;
  factors.reserve(plds.size());
  for (const DiscretePld& p : plds) factors.push_back({std::cref(p), 1});
  return convolution_product(std::span<const PldPower>(factors), plan);
}

// C^k for a single density.
inline ConvolvedPld convolution_power(const DiscretePld& pld, std::uint64_t k,
                                      const FftPlan* plan = nullptr) {
  if (k == 0) throw DomainError("convolution_power: k must be >= 1");
  const PldPower factor{std::cref(pld), k};
  return convolution_product(std::span<const PldPower>(&factor, 1), plan);
}

}  // namespace fourier_accountant

#endif  // FOURIER_ACCOUNTANT_SPECTRAL_HPP_
