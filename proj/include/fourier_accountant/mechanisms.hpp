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

// Privacy loss functions and privacy loss distribution (PLD) densities of the
// subsampled Gaussian mechanism with sensitivity 1.
//
// Every scheme reduces to a pair of one-dimensional output densities f_X, f_Y.
// The privacy loss function is L(t) = log(f_X(t) / f_Y(t)), strictly
// increasing in t, and the PLD density is the push-forward of f_X through L:
//
//   omega(s) = f_X(L^{-1}(s)) * d/ds L^{-1}(s) = f_X(t) / L'(t),  t = L^{-1}(s).
//
// Schemes:
//   * Poisson subsampling, remove/add neighbours:
//       f_X = q N(1, sigma^2) + (1 - q) N(0, sigma^2),  f_Y = N(0, sigma^2).
//     Support of omega_{X/Y} is (log(1 - q), inf); the Y/X direction is the
//     reflected, reweighted distribution supported on (-inf, -log(1 - q)).
//   * Sampling without replacement, substitute neighbours:
//       f_X = q N(1, sigma^2) + (1 - q) N(0, sigma^2),
//       f_Y = q N(-1, sigma^2) + (1 - q) N(0, sigma^2).
//   * Sampling with replacement, substitute neighbours: the differing record
//     appears Binomial(m, 1/n_data) times, giving a mixture over shifts l.
//
// The two substitute schemes have odd loss functions, so omega(s) =
// e^s omega(-s) and both directions coincide.

#ifndef FOURIER_ACCOUNTANT_MECHANISMS_HPP_
#define FOURIER_ACCOUNTANT_MECHANISMS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fourier_accountant/errors.hpp"
#include "fourier_accountant/root_finding.hpp"

namespace fourier_accountant {

enum class Scheme {
  kPoissonRemoveAdd,
  kWithoutReplacementSubstitute,
  kWithReplacementSubstitute,
};

// Which ratio the loss is taken over: log(f_X / f_Y) or log(f_Y / f_X).
enum class Direction { kXOverY, kYOverX };

inline std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::kPoissonRemoveAdd:
      return "poisson";
    case Scheme::kWithoutReplacementSubstitute:
      return "without-replacement";
    case Scheme::kWithReplacementSubstitute:
      return "with-replacement";
  }
  return "unknown";
}

inline std::string_view to_string(Direction direction) {
  return direction == Direction::kXOverY ? "xy" : "yx";
}

inline Direction reversed(Direction direction) {
  return direction == Direction::kXOverY ? Direction::kYOverX
                                         : Direction::kXOverY;
}

struct MechanismSpec {
  double sigma = 1.0;
  Scheme scheme = Scheme::kPoissonRemoveAdd;
  // Inclusion probability; used by the Poisson and without-replacement
  // schemes.
  double q = 0.01;
  // Batch size m and dataset size; used by the with-replacement scheme, where
  // each of the m draws hits the differing record with probability
  // 1 / dataset_size.
  std::uint64_t batch_size = 1;
  std::uint64_t dataset_size = 1;
  Direction direction = Direction::kXOverY;

  static MechanismSpec poisson(double sigma, double q,
                               Direction direction = Direction::kXOverY) {
    MechanismSpec spec;
    spec.sigma = sigma;
    spec.scheme = Scheme::kPoissonRemoveAdd;
    spec.q = q;
    spec.direction = direction;
    return spec;
  }

  static MechanismSpec without_replacement(double sigma, double q) {
    MechanismSpec spec;
    spec.sigma = sigma;
    spec.scheme = Scheme::kWithoutReplacementSubstitute;
    spec.q = q;
    return spec;
  }

  static MechanismSpec with_replacement(double sigma, std::uint64_t batch_size,
                                        std::uint64_t dataset_size) {
    MechanismSpec spec;
    spec.sigma = sigma;
    spec.scheme = Scheme::kWithReplacementSubstitute;
    spec.batch_size = batch_size;
    spec.dataset_size = dataset_size;
    spec.q = 1.0 / static_cast<double>(dataset_size);
    return spec;
  }

  // Per-draw (or per-record) probability that enters the mixture weights.
  double sampling_probability() const {
    return scheme == Scheme::kWithReplacementSubstitute
               ? 1.0 / static_cast<double>(dataset_size)
               : q;
  }

  // Both directions give the same PLD for the substitute schemes.
  bool self_dual() const { return scheme != Scheme::kPoissonRemoveAdd; }

  void validate() const {
    std::ostringstream msg;
    if (!(sigma > 0) || !std::isfinite(sigma)) {
      msg << "sigma must be positive and finite, got " << sigma;
    } else if (scheme == Scheme::kWithReplacementSubstitute) {
      if (batch_size < 1 || dataset_size < batch_size) {
        msg << "with-replacement sampling needs 1 <= batch_size <= "
               "dataset_size, got batch_size="
            << batch_size << " dataset_size=" << dataset_size;
      }
    } else if (!(q > 0 && q <= 1)) {
      msg << "q must lie in (0, 1], got " << q;
    }
    if (!msg.str().empty()) throw DomainError(msg.str());
  }

  bool operator==(const MechanismSpec&) const = default;
};

namespace detail {

// Gaussian density with mean `mean` and standard deviation sigma.
inline double normal_pdf(double t, double mean, double sigma) {
  const double z = (t - mean) / sigma;
  return std::exp(-0.5 * z * z) /
         (sigma * std::sqrt(2.0 * std::numbers::pi));
}

// f_X(t) = q N(1, sigma^2) + (1 - q) N(0, sigma^2).
inline double two_point_mixture_pdf(double t, double sigma, double q) {
  return q * normal_pdf(t, 1.0, sigma) + (1.0 - q) * normal_pdf(t, 0.0, sigma);
}

// log(q e^a + 1 - q) without overflow for large a and without cancellation
// for small |a|.
inline double log_mixture(double q, double a) {
  if (a > 1.0) return a + std::log(q + (1.0 - q) * std::exp(-a));
  return std::log1p(q * std::expm1(a));
}

// q e^a / (q e^a + 1 - q), the derivative of log_mixture in a.
inline double mixture_weight(double q, double a) {
  if (q >= 1.0) return 1.0;
  return 1.0 / (1.0 + ((1.0 - q) / q) * std::exp(-a));
}

// log(e^s - (1 - q)) for s > log(1 - q). For small q the difference is formed
// as expm1(s) + q, which keeps full relative accuracy next to the support
// edge; for q >= 1/2 the subtraction exp(s) - (1 - q) is already exact
// enough. Large s goes through log1p to avoid overflow.
inline double log_shifted_exp(double s, double q) {
  if (s > 1.0) return s + std::log1p(-(1.0 - q) * std::exp(-s));
  if (q < 0.5) return std::log(std::expm1(s) + q);
  return std::log(std::exp(s) - (1.0 - q));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Poisson subsampling, remove/add neighbours.

// L_{X/Y}(t) = log(q e^{(2t - 1) / (2 sigma^2)} + 1 - q).
inline double poisson_loss(const MechanismSpec& spec, double t) {
  const double a = (2.0 * t - 1.0) / (2.0 * spec.sigma * spec.sigma);
  return detail::log_mixture(spec.q, a);
}

// Lower end of the range of L_{X/Y}; -inf when q = 1.
inline double poisson_support_lo(const MechanismSpec& spec) {
  return spec.q >= 1.0 ? -std::numeric_limits<double>::infinity()
                       : std::log1p(-spec.q);
}

// L_{X/Y}^{-1}(s) = sigma^2 log((e^s - (1 - q)) / q) + 1/2, s > log(1 - q).
inline double loss_inverse_poisson(const MechanismSpec& spec, double s) {
  if (!(s > poisson_support_lo(spec))) {
    std::ostringstream msg;
    msg << "loss_inverse_poisson: s = " << s
        << " is outside the range (log(1 - q), inf) = ("
        << poisson_support_lo(spec) << ", inf)";
    throw DomainError(msg.str());
  }
  const double sigma2 = spec.sigma * spec.sigma;
  return sigma2 * (detail::log_shifted_exp(s, spec.q) - std::log(spec.q)) +
         0.5;
}

namespace detail {

// d/ds L_{X/Y}^{-1}(s) = sigma^2 e^s / (e^s - (1 - q)).
inline double poisson_inverse_slope(const MechanismSpec& spec, double s) {
  const double sigma2 = spec.sigma * spec.sigma;
  return sigma2 * std::exp(s - log_shifted_exp(s, spec.q));
}

}  // namespace detail

// PLD density for Poisson subsampling in the direction given by the spec.
// Returns exactly 0 outside the support; the support edge itself maps to 0.
inline double pld_density_poisson(const MechanismSpec& spec, double s) {
  const double lo = poisson_support_lo(spec);
  if (spec.direction == Direction::kXOverY) {
    if (!(s > lo)) return 0.0;
    const double t = loss_inverse_poisson(spec, s);
    const double f = detail::two_point_mixture_pdf(t, spec.sigma, spec.q);
    if (f == 0.0) return 0.0;
    return f * detail::poisson_inverse_slope(spec, s);
  }
  // Y/X: S = -L_{X/Y}(T) with T ~ f_Y, so omega(s) = f_Y(g(-s)) g'(-s).
  if (!(-s > lo)) return 0.0;
  const double t = loss_inverse_poisson(spec, -s);
  const double f = detail::normal_pdf(t, 0.0, spec.sigma);
  if (f == 0.0) return 0.0;
  return f * detail::poisson_inverse_slope(spec, -s);
}

// ---------------------------------------------------------------------------
// Sampling without replacement, substitute neighbours.

inline double without_replacement_loss(const MechanismSpec& spec, double t) {
  const double two_sigma2 = 2.0 * spec.sigma * spec.sigma;
  return detail::log_mixture(spec.q, (2.0 * t - 1.0) / two_sigma2) -
         detail::log_mixture(spec.q, (-2.0 * t - 1.0) / two_sigma2);
}

// Closed-form inverse: with x = e^{t / sigma^2} and c = q e^{-1/(2 sigma^2)},
// L(t) = s is the quadratic c x^2 + (1 - q)(1 - e^s) x - c e^s = 0. The
// positive root is evaluated in a form free of cancellation on either side of
// s = 0, and the two branches are exact mirror images so that
// L^{-1}(-s) == -L^{-1}(s) holds bit for bit.
inline double without_replacement_loss_inverse(const MechanismSpec& spec,
                                               double s) {
  const double sigma2 = spec.sigma * spec.sigma;
  const double c = spec.q * std::exp(-1.0 / (2.0 * sigma2));
  const double r = std::abs(s);
  // b = (1 - q)(1 - e^{-|s|}) >= 0, disc = b^2 + 4 c^2 e^{-|s|}.
  const double b = (1.0 - spec.q) * -std::expm1(-r);
  const double disc = b * b + 4.0 * c * c * std::exp(-r);
  const double log_x = r + std::log((b + std::sqrt(disc)) / (2.0 * c));
  return s < 0 ? -sigma2 * log_x : sigma2 * log_x;
}

inline double pld_density_without_replacement(const MechanismSpec& spec,
                                              double s) {
  const double t = without_replacement_loss_inverse(spec, s);
  const double f = detail::two_point_mixture_pdf(t, spec.sigma, spec.q);
  if (f == 0.0) return 0.0;
  const double sigma2 = spec.sigma * spec.sigma;
  const double two_sigma2 = 2.0 * sigma2;
  const double slope =
      (detail::mixture_weight(spec.q, (2.0 * t - 1.0) / two_sigma2) +
       detail::mixture_weight(spec.q, (-2.0 * t - 1.0) / two_sigma2)) /
      sigma2;
  return f / slope;
}

// ---------------------------------------------------------------------------
// Sampling with replacement, substitute neighbours.

// Loss function of the binomial mixture,
//   L(t) = log(sum_l c_l x^l) - log(sum_l c_l x^{-l}),  x = e^{t / sigma^2},
//   c_l = C(m, l) p^l (1 - p)^{m - l} e^{-l^2 / (2 sigma^2)},  p = 1/n_data.
// The weights live in log space. For fixed t the exponents
// log c_l +- l t / sigma^2 are concave in l, so each sum is accumulated
// outward from its largest term and stops once terms are negligible.
class WithReplacementLoss {
 public:
  explicit WithReplacementLoss(const MechanismSpec& spec)
      : sigma2_(spec.sigma * spec.sigma) {
    spec.validate();
    const std::uint64_t m = spec.batch_size;
    const double p = spec.sampling_probability();
    const double log_p = std::log(p);
    const double log_1mp = std::log1p(-p);
    log_c_.resize(m + 1);
    double log_binom = 0.0;
    for (std::uint64_t l = 0; l <= m; ++l) {
      if (l > 0) {
        log_binom += std::log(static_cast<double>(m - l + 1)) -
                     std::log(static_cast<double>(l));
      }
      const double ld = static_cast<double>(l);
      log_c_[l] = log_binom + ld * log_p +
                  static_cast<double>(m - l) * log_1mp -
                  ld * ld / (2.0 * sigma2_);
    }
    // Initial guesses come from the single-draw closed form with the
    // probability that the record is drawn at least once.
    guess_spec_ = MechanismSpec::without_replacement(
        spec.sigma, -std::expm1(static_cast<double>(m) * log_1mp));
  }

  std::size_t batch_size() const { return log_c_.size() - 1; }

  struct Evaluation {
    double loss;        // L(t)
    double slope;       // L'(t)
    double log_upper;   // log sum_l c_l x^l
  };

  Evaluation evaluate(double t) const {
    const Moments up = log_sum(t / sigma2_);
    const Moments down = log_sum(-t / sigma2_);
    return {up.log_sum - down.log_sum, (up.mean + down.mean) / sigma2_,
            up.log_sum};
  }

  double operator()(double t) const { return evaluate(t).loss; }

  // Solves L(t) = s. Only |s| is solved for; the odd symmetry of L fixes the
  // sign, which keeps omega(s) = e^s omega(-s) tight in floating point.
  double inverse(double s) const {
    if (s == 0.0) return 0.0;
    const double target = std::abs(s);
    const double guess = without_replacement_loss_inverse(guess_spec_, target);
    auto eval = [&](double t) {
      const Evaluation e = evaluate(t);
      return ValueAndSlope{e.loss - target, e.slope};
    };
    // L is increasing, so a bracket is found by stepping outward.
    double step = std::max(1.0, std::abs(guess));
    double lo = std::max(0.0, guess - step);
    double hi = guess + step;
    while (evaluate(hi).loss < target) {
      lo = hi;
      hi += step;
      step *= 2.0;
      if (!std::isfinite(hi)) {
        throw ConvergenceError("WithReplacementLoss: cannot bracket root");
      }
    }
    RootFinderOptions options;
    options.residual_tolerance = 1e-13;
    options.max_iterations = 100;
    const double t =
        safeguarded_newton(eval, lo, hi, std::clamp(guess, lo, hi), options)
            .root;
    return s < 0 ? -t : t;
  }

  // omega(s) = f_X(t) / L'(t) with f_X(t) = phi_sigma(t) sum_l c_l x^l.
  double density(double s) const {
    const double t = inverse(s);
    const Evaluation e = evaluate(t);
    const double log_fx = -t * t / (2.0 * sigma2_) -
                          0.5 * std::log(2.0 * std::numbers::pi * sigma2_) +
                          e.log_upper;
    return std::exp(log_fx) / e.slope;
  }

 private:
  struct Moments {
    double log_sum;  // log sum_l exp(log c_l + l u)
    double mean;     // sum_l l w_l / sum_l w_l
  };

  // Terms smaller than the largest by this much in log space are dropped;
  // concavity bounds the dropped tail far below double precision.
  static constexpr double kLogCutoff = 50.0;

  Moments log_sum(double u) const {
    const std::size_t m = log_c_.size() - 1;
    auto term = [&](std::size_t l) {
      return log_c_[l] + static_cast<double>(l) * u;
    };
    // Integer ternary search for the peak of a concave sequence.
    std::size_t a = 0, b = m;
    while (b - a > 2) {
      const std::size_t m1 = a + (b - a) / 3;
      const std::size_t m2 = b - (b - a) / 3;
      if (term(m1) < term(m2)) {
        a = m1 + 1;
      } else {
        b = m2;
      }
    }
    std::size_t peak = a;
    for (std::size_t l = a + 1; l <= b; ++l) {
      if (term(l) > term(peak)) peak = l;
    }
    const double top = term(peak);
    double total = 1.0;
    double first = static_cast<double>(peak);
    for (std::size_t l = peak + 1; l <= m; ++l) {
      const double d = term(l) - top;
      if (d < -kLogCutoff) break;
      const double w = std::exp(d);
      total += w;
      first += w * static_cast<double>(l);
    }
    for (std::size_t l = peak; l-- > 0;) {
      const double d = term(l) - top;
      if (d < -kLogCutoff) break;
      const double w = std::exp(d);
      total += w;
      first += w * static_cast<double>(l);
    }
    return {top + std::log(total), first / total};
  }

  double sigma2_;
  std::vector<double> log_c_;
  MechanismSpec guess_spec_;
};

inline double with_replacement_loss_inverse(const MechanismSpec& spec,
                                            double s) {
  return WithReplacementLoss(spec).inverse(s);
}

// Convenience single-point evaluator. Builds the weight table on every call;
// use PldDensity when evaluating many points.
inline double pld_density_with_replacement(const MechanismSpec& spec,
                                           double s) {
  return WithReplacementLoss(spec).density(s);
}

// ---------------------------------------------------------------------------

// PLD density of one mechanism invocation, with the loss function and its
// inverse for the same direction. Immutable after construction.
class PldDensity {
 public:
  explicit PldDensity(const MechanismSpec& spec) : spec_(spec) {
    spec_.validate();
    if (spec_.scheme == Scheme::kWithReplacementSubstitute) {
      with_replacement_.emplace(spec_);
    }
  }

  const MechanismSpec& spec() const { return spec_; }

  // omega(s) = 0 for s <= support_lo() and for s >= support_hi().
  double support_lo() const {
    if (spec_.scheme == Scheme::kPoissonRemoveAdd &&
        spec_.direction == Direction::kXOverY) {
      return poisson_support_lo(spec_);
    }
    return -std::numeric_limits<double>::infinity();
  }

  double support_hi() const {
    if (spec_.scheme == Scheme::kPoissonRemoveAdd &&
        spec_.direction == Direction::kYOverX) {
      return -poisson_support_lo(spec_);
    }
    return std::numeric_limits<double>::infinity();
  }

  double operator()(double s) const {
    switch (spec_.scheme) {
      case Scheme::kPoissonRemoveAdd:
        return pld_density_poisson(spec_, s);
      case Scheme::kWithoutReplacementSubstitute:
        return pld_density_without_replacement(spec_, s);
      case Scheme::kWithReplacementSubstitute:
        return with_replacement_->density(s);
    }
    return 0.0;
  }

  // Privacy loss function in the spec's direction.
  double loss(double t) const {
    switch (spec_.scheme) {
      case Scheme::kPoissonRemoveAdd: {
        const double l = poisson_loss(spec_, t);
        return spec_.direction == Direction::kXOverY ? l : -l;
      }
      case Scheme::kWithoutReplacementSubstitute:
        return without_replacement_loss(spec_, t);
      case Scheme::kWithReplacementSubstitute:
        return (*with_replacement_)(t);
    }
    return 0.0;
  }

  // Inverse of loss(); decreasing for the Poisson Y/X direction, increasing
  // otherwise.
  double loss_inverse(double s) const {
    switch (spec_.scheme) {
      case Scheme::kPoissonRemoveAdd:
        return spec_.direction == Direction::kXOverY
                   ? loss_inverse_poisson(spec_, s)
                   : loss_inverse_poisson(spec_, -s);
      case Scheme::kWithoutReplacementSubstitute:
        return without_replacement_loss_inverse(spec_, s);
      case Scheme::kWithReplacementSubstitute:
        return with_replacement_->inverse(s);
    }
    return 0.0;
  }

 private:
  MechanismSpec spec_;
  std::optional<WithReplacementLoss> with_replacement_;
};

}  // namespace fourier_accountant

#endif  // FOURIER_ACCOUNTANT_MECHANISMS_HPP_
