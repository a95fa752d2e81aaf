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

// delta(epsilon) and epsilon(delta) for compositions of subsampled Gaussian
// mechanisms.
//
// With C^k the periodic k-fold convolution of the sampled PLD on the grid
// x_l = -L + l dx,
//
//   delta(eps)  ~  dx sum_{l >= l_eps} (1 - e^{eps - x_l}) C^k_l,
//   delta'(eps) ~ -dx sum_{l >= l_eps} e^{eps - x_l} C^k_l,
//
// with l_eps = min{l : x_l > eps}. epsilon(delta) inverts the first sum by
// Newton's method started from eps = 0, reusing one C^k for all iterations.
//
// For Poisson subsampling the two neighbouring directions have different
// PLDs and the tight delta is the larger of the two; by default both are
// computed and reported.

#ifndef FOURIER_ACCOUNTANT_ACCOUNTANT_HPP_
#define FOURIER_ACCOUNTANT_ACCOUNTANT_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "fourier_accountant/discretization.hpp"
#include "fourier_accountant/error_bounds.hpp"
#include "fourier_accountant/errors.hpp"
#include "fourier_accountant/fft.hpp"
#include "fourier_accountant/mechanisms.hpp"
#include "fourier_accountant/root_finding.hpp"
#include "fourier_accountant/spectral.hpp"

namespace fourier_accountant {

struct Epsilon {
  double value;
};

struct Delta {
  double value;
};

using Target = std::variant<Epsilon, Delta>;

// A mechanism and the number of times it is composed.
struct MechanismCount {
  MechanismSpec spec;
  std::uint64_t count = 1;

  bool operator==(const MechanismCount&) const = default;
};

enum class DirectionPolicy {
  // Use each spec's own direction; one pipeline run.
  kAsSpecified,
  // Tight delta: max over both directions when any Poisson mechanism is
  // present (two runs), one run otherwise.
  kWorstCase,
};

inline constexpr std::string_view kEmptySumWarning =
    "epsilon exceeds truncation radius";
inline constexpr std::string_view kTailEnvelopeWarning =
    "tail estimate outside its validity envelope";

struct CompositionQuery {
  std::vector<MechanismCount> mechanisms;
  Grid grid{20.0, std::size_t{1} << 22};
  Target target = Epsilon{1.0};
  // Newton stops once |delta(eps) - target| <= newton_tolerance.
  double newton_tolerance = 1e-10;
  std::size_t newton_max_iterations = 50;
  DirectionPolicy directions = DirectionPolicy::kWorstCase;
  // Re-run at 2n to fill DeltaResult::discretization_estimate.
  bool with_discretization_estimate = true;

  static CompositionQuery homogeneous(const MechanismSpec& spec,
                                      std::uint64_t k, const Grid& grid,
                                      Target target) {
    CompositionQuery q;
    q.mechanisms = {{spec, k}};
    q.grid = grid;
    q.target = target;
    return q;
  }

  std::uint64_t k() const {
    std::uint64_t total = 0;
    for (const MechanismCount& m : mechanisms) total += m.count;
    return total;
  }

  void validate() const {
    if (mechanisms.empty()) {
      throw DomainError("composition needs at least one mechanism");
    }
    for (const MechanismCount& m : mechanisms) {
      m.spec.validate();
      if (m.count == 0) throw DomainError("composition counts must be >= 1");
    }
    if (!(newton_tolerance > 0)) {
      throw DomainError("Newton tolerance must be positive");
    }
    if (const auto* eps = std::get_if<Epsilon>(&target)) {
      if (!(eps->value >= 0) || std::isnan(eps->value)) {
        std::ostringstream msg;
        msg << "epsilon must be >= 0, got " << eps->value;
        throw DomainError(msg.str());
      }
    } else {
      const double d = std::get<Delta>(target).value;
      if (!(d > 0 && d < 1)) {
        std::ostringstream msg;
        msg << "delta target must lie in (0, 1), got " << d;
        throw DomainError(msg.str());
      }
    }
  }
};

enum class ResultKind { kDelta, kEpsilon };

inline std::string_view to_string(ResultKind kind) {
  return kind == ResultKind::kDelta ? "delta" : "epsilon";
}

// Outcome of one pipeline run (one direction).
struct DirectionalValue {
  Direction direction;
  double value;
  std::size_t ell_eps;
  std::size_t newton_iterations = 0;
  // delta(eps) - target for epsilon queries, 0 otherwise.
  double residual = 0.0;
};

struct DeltaResult {
  ResultKind kind = ResultKind::kDelta;
  // delta for delta queries, epsilon for epsilon queries.
  double value = 0.0;
  // First summed index of the run that produced `value`.
  std::size_t ell_eps = 0;
  std::vector<DirectionalValue> directions;
  BoundReport tail_estimate;
  // Only for a single Poisson mechanism.
  std::optional<BoundReport> analytic_tail_bound;
  // 2 |I_n - I_2n|; empty when not requested or not computable.
  std::optional<double> discretization_estimate;
  std::vector<std::string> warnings;
  Grid grid{1.0, 2};
  std::uint64_t k = 0;
  std::vector<MechanismCount> mechanisms;
  double newton_tolerance = 0.0;
};

// The delta(eps) curve of one composed PLD on a fixed grid.
class CompositionCurve {
 public:
  explicit CompositionCurve(ConvolvedPld convolved)
      : convolved_(std::move(convolved)) {}

  const ConvolvedPld& convolved() const { return convolved_; }
  const Grid& grid() const { return convolved_.grid; }

  // min{l : x_l > eps}; n when no lattice point lies above eps.
  std::size_t first_index_above(double eps) const {
    const Grid& g = grid();
    const std::size_t n = g.n();
    const double raw = std::floor((eps + g.L()) / g.dx());
    std::size_t l;
    if (!(raw >= 0)) {
      l = 0;
    } else if (raw >= static_cast<double>(n)) {
      l = n;
    } else {
      l = static_cast<std::size_t>(raw);
    }
    // Correct the floating-point guess against the lattice itself.
    while (l > 0 && g.x(l - 1) > eps) --l;
    while (l < n && !(g.x(l) > eps)) ++l;
    return l;
  }

  // delta(eps) and delta'(eps) in one pass.
  ValueAndSlope evaluate(double eps) const {
    const Grid& g = grid();
    const std::size_t n = g.n();
    const std::vector<double>& c = convolved_.values;
    double value = 0.0;
    double slope = 0.0;
    for (std::size_t l = first_index_above(eps); l < n; ++l) {
      const double d = eps - g.x(l);
      value += -std::expm1(d) * c[l];
      slope -= std::exp(d) * c[l];
    }
    return {g.dx() * value, g.dx() * slope};
  }

  double delta_at(double eps) const { return evaluate(eps).value; }
  double derivative_at(double eps) const { return evaluate(eps).slope; }

 private:
  ConvolvedPld convolved_;
};

struct EpsilonSolution {
  double epsilon;
  std::size_t iterations;
  double residual;
};

// Smallest-residual eps with |delta(eps) - target| <= tolerance, by Newton
// from eps = 0 inside [0, L - dx].
inline EpsilonSolution solve_epsilon(const CompositionCurve& curve,
                                     double target, double tolerance,
                                     std::size_t max_iterations = 50) {
  if (!(target > tolerance)) {
    std::ostringstream msg;
    msg << "delta target " << target << " is not above the Newton tolerance "
        << tolerance << "; it cannot be resolved on this grid";
    throw TargetOutOfRange(TargetOutOfRange::Reason::kBelowFloor, msg.str());
  }
  const ValueAndSlope at_zero = curve.evaluate(0.0);
  if (std::abs(at_zero.value - target) <= tolerance) {
    return {0.0, 0, at_zero.value - target};
  }
  if (target > at_zero.value) {
    std::ostringstream msg;
    msg << "delta target " << target << " exceeds delta(0) = " << at_zero.value
        << "; no positive epsilon is needed";
    throw TargetOutOfRange(TargetOutOfRange::Reason::kAboveDeltaAtZero,
                           msg.str());
  }
  const double hi = curve.grid().L() - curve.grid().dx();
  RootFinderOptions options;
  options.residual_tolerance = tolerance;
  options.max_iterations = max_iterations;
  const RootFinderResult r = safeguarded_newton(
      [&](double eps) {
        ValueAndSlope v = curve.evaluate(eps);
        v.value -= target;
        return v;
      },
      0.0, hi, 0.0, options);
  return {r.root, r.iterations, r.residual};
}

namespace detail {

inline std::vector<MechanismCount> merge_duplicates(
    const std::vector<MechanismCount>& mechanisms) {
  std::vector<MechanismCount> merged;
  for (const MechanismCount& m : mechanisms) {
    auto it = std::find_if(merged.begin(), merged.end(),
                           [&](const MechanismCount& e) { return e.spec == m.spec; });
    if (it == merged.end()) {
      merged.push_back(m);
    } else {
      it->count += m.count;
    }
  }
  return merged;
}

inline bool any_poisson(const std::vector<MechanismCount>& mechanisms) {
  return std::any_of(mechanisms.begin(), mechanisms.end(), [](const auto& m) {
    return m.spec.scheme == Scheme::kPoissonRemoveAdd;
  });
}

// Directions to run under the policy; nullopt means "as specified".
inline std::vector<std::optional<Direction>> planned_directions(
    const CompositionQuery& query) {
  if (query.directions == DirectionPolicy::kWorstCase &&
      any_poisson(query.mechanisms)) {
    return {Direction::kXOverY, Direction::kYOverX};
  }
  return {std::nullopt};
}

inline Direction label_of(const CompositionQuery& query,
                          std::optional<Direction> forced) {
  if (forced) return *forced;
  for (const MechanismCount& m : query.mechanisms) {
    if (m.spec.scheme == Scheme::kPoissonRemoveAdd) return m.spec.direction;
  }
  return Direction::kXOverY;
}

inline TailComponent tail_component(const MechanismCount& m) {
  const MechanismSpec& s = m.spec;
  double q = s.q;
  if (s.scheme == Scheme::kWithReplacementSubstitute) {
    q = -std::expm1(static_cast<double>(s.batch_size) *
                    std::log1p(-s.sampling_probability()));
  }
  return {s.sigma, q, m.count};
}

inline BoundReport composition_tail_estimate(const CompositionQuery& query) {
  std::vector<TailComponent> components;
  bool all_gaussian = true;
  bool all_poisson = true;
  for (const MechanismCount& m : query.mechanisms) {
    components.push_back(tail_component(m));
    all_poisson = all_poisson && m.spec.scheme == Scheme::kPoissonRemoveAdd;
    all_gaussian = all_gaussian && m.spec.scheme == Scheme::kPoissonRemoveAdd &&
                   m.spec.q == 1.0;
  }
  const double L = query.grid.L();
  if (all_gaussian) return gaussian_tail_bound(components, L);
  BoundReport r = tail_estimate(components, L);
  if (!all_poisson) {
    r.violate("moment bound is stated for Poisson subsampling only");
  }
  return r;
}

}  // namespace detail

// C^k for the query's mechanisms on `grid`, optionally forcing every
// Poisson mechanism into one direction.
inline CompositionCurve build_curve(const std::vector<MechanismCount>& mechanisms,
                                    const Grid& grid,
                                    std::optional<Direction> forced,
                                    const FftPlan* plan = nullptr) {
  std::vector<MechanismCount> specs = mechanisms;
  if (forced) {
    for (MechanismCount& m : specs) {
      if (m.spec.scheme == Scheme::kPoissonRemoveAdd) m.spec.direction = *forced;
    }
  }
  specs = detail::merge_duplicates(specs);
  std::vector<DiscretePld> plds;
  plds.reserve(specs.size());
  for (const MechanismCount& m : specs) plds.push_back(discretize(m.spec, grid));
  std::vector<PldPower> factors;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    factors.push_back({std::cref(plds[i]), specs[i].count});
  }
  return CompositionCurve(
      convolution_product(std::span<const PldPower>(factors), plan));
}

// One composed curve per direction that the query's policy requires.
using CurveSet = std::vector<std::pair<Direction, CompositionCurve>>;

// Builds the CurveSet for the query's grid, sharing one FFT plan.
inline CurveSet build_curves(const CompositionQuery& query) {
  query.validate();
  const FftPlan plan(query.grid.n());
  CurveSet curves;
  for (std::optional<Direction> d : detail::planned_directions(query)) {
    curves.emplace_back(detail::label_of(query, d),
                        build_curve(query.mechanisms, query.grid, d, &plan));
  }
  return curves;
}

namespace detail {

// Fills value / ell_eps / directions / warnings from already built curves.
inline void evaluate_target(const CompositionQuery& query,
                            const CurveSet& curves, DeltaResult& out) {
  if (const auto* eps = std::get_if<Epsilon>(&query.target)) {
    out.kind = ResultKind::kDelta;
    bool first = true;
    for (const auto& [direction, curve] : curves) {
      const std::size_t ell = curve.first_index_above(eps->value);
      const double delta = curve.delta_at(eps->value);
      out.directions.push_back({direction, delta, ell});
      if (first || delta > out.value) {
        out.value = delta;
        out.ell_eps = ell;
        first = false;
      }
    }
    if (out.ell_eps >= query.grid.n()) {
      out.warnings.emplace_back(kEmptySumWarning);
    }
    return;
  }
  out.kind = ResultKind::kEpsilon;
  const double target = std::get<Delta>(query.target).value;
  std::optional<TargetOutOfRange> above;
  bool any = false;
  for (const auto& [direction, curve] : curves) {
    try {
      const EpsilonSolution s = solve_epsilon(curve, target, query.newton_tolerance,
                                              query.newton_max_iterations);
      out.directions.push_back({direction, s.epsilon,
                                curve.first_index_above(s.epsilon), s.iterations,
                                s.residual});
    } catch (const TargetOutOfRange& e) {
      if (e.reason() != TargetOutOfRange::Reason::kAboveDeltaAtZero) throw;
      // This direction already meets the target at eps = 0.
      above.emplace(e);
      out.directions.push_back({direction, 0.0, curve.first_index_above(0.0), 0,
                                curve.delta_at(0.0) - target});
      continue;
    }
    any = true;
  }
  if (!any) throw *above;
  bool first = true;
  for (const DirectionalValue& d : out.directions) {
    if (first || d.value > out.value) {
      out.value = d.value;
      out.ell_eps = d.ell_eps;
      first = false;
    }
  }
}

}  // namespace detail

// Runs the query on curves built earlier by build_curves(query) (and, for
// the discretization estimate, build_curves on the refined grid). Lets a
// sweep over targets reuse one C^k.
inline DeltaResult evaluate(const CompositionQuery& query, const CurveSet& curves,
                            const CurveSet* refined_curves) {
  query.validate();
  DeltaResult out;
  out.grid = query.grid;
  out.k = query.k();
  out.mechanisms = query.mechanisms;
  out.newton_tolerance = query.newton_tolerance;

  detail::evaluate_target(query, curves, out);

  out.tail_estimate = detail::composition_tail_estimate(query);
  if (!out.tail_estimate.valid) out.warnings.emplace_back(kTailEnvelopeWarning);
  if (query.mechanisms.size() == 1 &&
      query.mechanisms.front().spec.scheme == Scheme::kPoissonRemoveAdd) {
    const MechanismCount& m = query.mechanisms.front();
    out.analytic_tail_bound =
        analytic_tail_bound(m.spec.sigma, m.spec.q, m.count, query.grid.L());
  }

  if (refined_curves != nullptr) {
    CompositionQuery fine = query;
    fine.grid = query.grid.refined();
    try {
      DeltaResult refined;
      detail::evaluate_target(fine, *refined_curves, refined);
      out.discretization_estimate = richardson_estimate(out.value, refined.value);
    } catch (const Error& e) {
      out.warnings.push_back(std::string("discretization estimate unavailable: ") +
                             e.what());
    }
  }
  return out;
}

// Runs the query: delta for an Epsilon target, epsilon for a Delta target.
inline DeltaResult evaluate(const CompositionQuery& query) {
  query.validate();
  const CurveSet curves = build_curves(query);
  if (!query.with_discretization_estimate) return evaluate(query, curves, nullptr);
  CompositionQuery fine = query;
  fine.grid = query.grid.refined();
  const CurveSet refined = build_curves(fine);
  return evaluate(query, curves, &refined);
}

inline DeltaResult delta_of_epsilon(const CompositionQuery& query) {
  if (!std::holds_alternative<Epsilon>(query.target)) {
    throw DomainError("delta_of_epsilon needs an epsilon target");
  }
  return evaluate(query);
}

inline DeltaResult epsilon_of_delta(const CompositionQuery& query) {
  if (!std::holds_alternative<Delta>(query.target)) {
    throw DomainError("epsilon_of_delta needs a delta target");
  }
  return evaluate(query);
}

// Composition of different mechanisms, each with its own count.
inline DeltaResult compose_heterogeneous(
    const std::vector<MechanismCount>& mechanisms, const Grid& grid,
    Target target, DirectionPolicy directions = DirectionPolicy::kWorstCase,
    bool with_discretization_estimate = true) {
  CompositionQuery query;
  query.mechanisms = mechanisms;
  query.grid = grid;
  query.target = target;
  query.directions = directions;
  query.with_discretization_estimate = with_discretization_estimate;
  return evaluate(query);
}

// 2 |I_n - I_2n| for the query's target, from two full pipeline runs.
inline double discretization_estimate(const CompositionQuery& query) {
  CompositionQuery coarse = query;
  coarse.with_discretization_estimate = false;
  CompositionQuery fine = coarse;
  fine.grid = query.grid.refined();
  return richardson_estimate(evaluate(coarse).value, evaluate(fine).value);
}

}  // namespace fourier_accountant

#endif  // FOURIER_ACCOUNTANT_ACCOUNTANT_HPP_
