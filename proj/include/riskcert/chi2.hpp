// Copyright 2026 The riskcert Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Chi-squared distribution: CDF, survival function and their inverses, via
// the regularized incomplete gamma functions P(a, x) and Q(a, x).

#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "riskcert/error.hpp"

namespace riskcert {

/// Degrees of freedom of a chi-squared distribution.
struct Chi2Dof {
  int k = 3;

  explicit constexpr Chi2Dof(int dof) : k(dof) {}
  bool operator==(const Chi2Dof&) const = default;
};

/// Workspace dimension; ellipsoid levels for 3D displacements use this.
inline constexpr Chi2Dof kWorkspaceDof{3};

namespace detail {

inline constexpr double kGammaEps = 1e-16;
inline constexpr int kGammaMaxIter = 1000;

// P(a, x) by its power series; converges quickly for x < a + 1.
inline double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int n = 0; n < kGammaMaxIter; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kGammaEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by its continued fraction (modified Lentz); for x >= a + 1.
inline double gamma_q_continued_fraction(double a, double x) {
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kGammaEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

// Q(3/2, x) = erfc(sqrt x) + 2 sqrt(x / pi) exp(-x). Used for x >= 1, where
// neither term cancels; this is the k = 3 case on every shadow query.
inline double gamma_q_three_halves(double x) {
  constexpr double kTwoOverSqrtPi = 1.1283791670955126;
  const double r = std::sqrt(x);
  return std::erfc(r) + kTwoOverSqrtPi * r * std::exp(-x);
}

inline double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  if (a == 1.5) return 1.0 - gamma_q_three_halves(x);
  return 1.0 - gamma_q_continued_fraction(a, x);
}

inline double gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  if (a == 1.5) return gamma_q_three_halves(x);
  return gamma_q_continued_fraction(a, x);
}

inline void check_dof(Chi2Dof dof) {
  if (dof.k < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "chi-squared degrees of freedom must be >= 1, got " +
                    std::to_string(dof.k));
  }
}

inline void check_abscissa(double x) {
  if (std::isnan(x) || x < 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "chi-squared argument must be >= 0, got " + std::to_string(x));
  }
}

}  // namespace detail

inline double chi2_pdf(double x, Chi2Dof dof) {
  detail::check_dof(dof);
  detail::check_abscissa(x);
  const double a = 0.5 * dof.k;
  if (x == 0.0) {
    if (dof.k == 1) return std::numeric_limits<double>::infinity();
    return dof.k == 2 ? 0.5 : 0.0;
  }
  return std::exp((a - 1.0) * std::log(x) - 0.5 * x - a * std::log(2.0) -
                  std::lgamma(a));
}

/// P(X <= x) for X ~ chi^2_k.
inline double chi2_cdf(double x, Chi2Dof dof) {
  detail::check_dof(dof);
  detail::check_abscissa(x);
  return detail::gamma_p(0.5 * dof.k, 0.5 * x);
}

/// P(X > x); accurate in the far tail where 1 - chi2_cdf cancels.
inline double chi2_sf(double x, Chi2Dof dof) {
  detail::check_dof(dof);
  detail::check_abscissa(x);
  return detail::gamma_q(0.5 * dof.k, 0.5 * x);
}

namespace detail {

// Upper-tail standard normal quantile, |error| < 4.5e-4 (rational
// approximation of Hastings). Only used to seed Newton.
inline double rough_normal_isf(double q) {
  const bool lower = q > 0.5;
  const double t = std::sqrt(-2.0 * std::log(lower ? 1.0 - q : q));
  const double z = t - (2.515517 + t * (0.802853 + t * 0.010328)) /
                           (1.0 + t * (1.432788 + t * (0.189269 + t * 0.001308)));
  return lower ? -z : z;
}

// Starting point: Wilson-Hilferty cube, or the leading series term
// P ~ (x/2)^a / Gamma(a + 1) deep in the lower tail.
inline double chi2_initial_guess(double target, Chi2Dof dof, bool upper) {
  const double k = dof.k;
  const double a = 0.5 * k;
  const double q = upper ? target : 1.0 - target;
  if (!upper && target < 0.05) {
    return 2.0 * std::pow(target * std::tgamma(a + 1.0), 1.0 / a);
  }
  const double h = 2.0 / (9.0 * k);
  const double c = 1.0 - h + rough_normal_isf(q) * std::sqrt(h);
  double x = k * c * c * c;
  if (!(x > 0.0)) return 0.5 * k;
  if (upper && target < 1e-3) {
    // Far upper tail: fixed point of Q ~ (x/2)^(a-1) exp(-x/2) / Gamma(a).
    for (int i = 0; i < 2; ++i) {
      x = 2.0 * ((a - 1.0) * std::log(0.5 * x) - std::lgamma(a) - std::log(target));
    }
  }
  return x;
}

// Root of F(x) = target on [0, inf) where F is the CDF (upper = false) or the
// survival function (upper = true). Newton steps safeguarded by a bracket
// that starts as [0, inf) and tightens with every residual sign.
inline double chi2_solve(double target, Chi2Dof dof, bool upper) {
  auto residual = [&](double x) {
    return upper ? gamma_q(0.5 * dof.k, 0.5 * x) - target
                 : gamma_p(0.5 * dof.k, 0.5 * x) - target;
  };
  // CDF residual increases with x; survival residual decreases.
  const double sign = upper ? -1.0 : 1.0;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  double x = chi2_initial_guess(target, dof, upper);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = residual(x);
    if (f == 0.0) return x;
    if (sign * f < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (std::isfinite(hi) &&
        hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      break;
    }
    const double slope = sign * chi2_pdf(x, dof);
    double next = (slope != 0.0 && std::isfinite(slope)) ? x - f / slope : lo;
    if (std::abs(next - x) <= 1e-14 * x) return next;
    if (!(next > lo && next < hi)) {
      next = std::isinf(hi) ? 2.0 * x + 1.0 : 0.5 * (lo + hi);
    }
    x = next;
  }
  return x;
}

}  // namespace detail

/// Inverse CDF: the x with chi2_cdf(x) = p, for p in [0, 1).
inline double chi2_inv(double p, Chi2Dof dof) {
  detail::check_dof(dof);
  if (std::isnan(p) || p < 0.0 || p >= 1.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "chi2_inv needs p in [0, 1), got " + std::to_string(p));
  }
  if (p == 0.0) return 0.0;
  if (p > 0.5) return detail::chi2_solve(1.0 - p, dof, /*upper=*/true);
  return detail::chi2_solve(p, dof, /*upper=*/false);
}

/// Inverse survival function: the x with chi2_sf(x) = q, for q in (0, 1].
/// Equals chi2_inv(1 - q) without the rounding of 1 - q for tiny q.
inline double chi2_isf(double q, Chi2Dof dof) {
  detail::check_dof(dof);
  if (std::isnan(q) || q <= 0.0 || q > 1.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "chi2_isf needs q in (0, 1], got " + std::to_string(q));
  }
  if (q == 1.0) return 0.0;
  if (q < 0.5) return detail::chi2_solve(q, dof, /*upper=*/true);
  return detail::chi2_solve(1.0 - q, dof, /*upper=*/false);
}

}  // namespace riskcert
