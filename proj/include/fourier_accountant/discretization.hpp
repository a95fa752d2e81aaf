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

#ifndef FOURIER_ACCOUNTANT_DISCRETIZATION_HPP_
#define FOURIER_ACCOUNTANT_DISCRETIZATION_HPP_

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <sstream>
#include <vector>

#include "fourier_accountant/errors.hpp"
#include "fourier_accountant/mechanisms.hpp"

namespace fourier_accountant {

// Equidistant lattice x_i = -L + i dx, i = 0..n-1, dx = 2L/n. The left end
// is included and the right end excluded, so x_{n/2} = 0.
class Grid {
 public:
  Grid(double half_width, std::size_t points)
      : half_width_(half_width), points_(points) {
    if (!(half_width > 0) || !std::isfinite(half_width)) {
      std::ostringstream msg;
      msg << "Grid: truncation radius L must be positive, got " << half_width;
      throw DomainError(msg.str());
    }
    if (points < 2 || points % 2 != 0) {
      std::ostringstream msg;
      msg << "Grid: point count n must be even and >= 2, got " << points;
      throw DomainError(msg.str());
    }
  }

  double L() const { return half_width_; }
  std::size_t n() const { return points_; }
  double dx() const { return 2.0 * half_width_ / static_cast<double>(points_); }
  double x(std::size_t i) const {
    return -half_width_ + static_cast<double>(i) * dx();
  }

  // Same radius, twice the points.
  Grid refined() const { return Grid(half_width_, 2 * points_); }

  bool operator==(const Grid&) const = default;

 private:
  double half_width_;
  std::size_t points_;
};

// Samples omega_i = omega(x_i) of one mechanism's PLD.
struct DiscretePld {
  Grid grid;
  std::vector<double> values;
  MechanismSpec spec;

  // dx * sum_i omega_i, the Riemann-sum mass on [-L, L).
  double mass() const {
    return grid.dx() * std::accumulate(values.begin(), values.end(), 0.0);
  }
};

// Swaps the two halves of v: out[i] = v[(i + n/2) mod n]. This is the
// permutation D that moves the lattice origin to index 0 for the periodic
// transform; it is an involution.
template <class T>
std::vector<T> half_swap(std::span<const T> v) {
  const std::size_t n = v.size();
  if (n % 2 != 0) {
    std::ostringstream msg;
    msg << "half_swap: length must be even, got " << n;
    throw DomainError(msg.str());
  }
  const std::size_t half = n / 2;
  std::vector<T> out(n);
  for (std::size_t i = 0; i < half; ++i) {
    out[i] = v[i + half];
    out[i + half] = v[i];
  }
  return out;
}

template <class T>
std::vector<T> half_swap(const std::vector<T>& v) {
  return half_swap(std::span<const T>(v));
}

// Evaluates the density on every lattice point. Fails when a finite support
// edge sits at or beyond the truncation interval, since mass would then be
// cut off on that side.
inline DiscretePld discretize(const PldDensity& density, const Grid& grid) {
  const double lo = density.support_lo();
  const double hi = density.support_hi();
  if (std::isfinite(lo) && lo <= -grid.L()) {
    std::ostringstream msg;
    msg << "discretize: support starts at log(1 - q) = " << lo
        << " which is not inside (-L, L) for L = " << grid.L()
        << "; increase L";
    throw DomainError(msg.str());
  }
  if (std::isfinite(hi) && hi >= grid.L()) {
    std::ostringstream msg;
    msg << "discretize: support ends at -log(1 - q) = " << hi
        << " which is not inside (-L, L) for L = " << grid.L()
        << "; increase L";
    throw DomainError(msg.str());
  }
  DiscretePld pld{grid, std::vector<double>(grid.n()), density.spec()};
  for (std::size_t i = 0; i < grid.n(); ++i) {
    pld.values[i] = density(grid.x(i));
  }
  return pld;
}

inline DiscretePld discretize(const MechanismSpec& spec, const Grid& grid) {
  return discretize(PldDensity(spec), grid);
}

}  // namespace fourier_accountant

#endif  // FOURIER_ACCOUNTANT_DISCRETIZATION_HPP_
