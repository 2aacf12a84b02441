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

// Certified upper bounds on the probability that an uncertain obstacle hits
// any robot link.
//
// One-shot: bisect on eps over [0, 1]. If the eps-shadow misses every link it
// contains the obstacle with probability 1 - eps while touching nothing, so
// eps bounds the collision risk. The returned bound is the upper end of the
// final bracket, i.e. a shadow that was actually checked clear.
//
// Two-shot: after the one-shot search ends at eps1, take the contact normal n
// between the clear eps1-shadow and the link that stopped it, and bisect
// again over half shadows expanding along n, starting from the bracket
// [0, eps1]. With D1 the eps1 ellipsoid and D2' the eps2 half ellipsoid
// (eps2 <= eps1, so D1 is inside D2), the union captures
//
//   (1 - eps1) + (1 - eps2)/2 - (1 - eps1)/2 = 1 - (eps1 + eps2)/2,
//
// and both convex pieces are clear, so (eps1 + eps2)/2 bounds the risk. The
// union itself is never built.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "riskcert/convex.hpp"
#include "riskcert/error.hpp"
#include "riskcert/gjk.hpp"
#include "riskcert/scene.hpp"
#include "riskcert/shadow.hpp"

namespace riskcert {

enum class Method { kOneShot, kTwoShot };

enum class MethodUsed {
  kOneShot,
  kTwoShot,
  /// Two-shot was requested but no usable contact normal existed; the bound
  /// is the phase-one result.
  kOneShotFallback,
};

inline const char* method_name(MethodUsed m) {
  switch (m) {
    case MethodUsed::kOneShot: return "one-shot";
    case MethodUsed::kTwoShot: return "two-shot";
    case MethodUsed::kOneShotFallback: return "one-shot-fallback";
  }
  return "?";
}

struct CertifyOptions {
  double eps_tol = 1e-6;
  GjkSettings gjk;
  Tolerances tolerances;
};

struct CertifiedBound {
  /// Certified upper bound on the collision probability.
  double epsilon = 1.0;
  /// Final bisection bracket (phase two for two-shot).
  double eps_lower = 0.0;
  double eps_upper = 1.0;
  MethodUsed method = MethodUsed::kOneShot;
  /// Phase results. For one-shot both equal epsilon.
  double eps1 = 1.0;
  double eps2 = 1.0;
  std::optional<Vec3> normal;
  bool normal_degenerate = false;
  /// No shadow down to the floor touched a link: risk is 0 within eps_tol.
  bool saturated_low = false;
  /// Every shadow touched a link (nominal geometry already in collision).
  bool saturated_high = false;
  /// Shadow-versus-robot checks, i.e. bisection steps.
  int collision_checks = 0;
  int phase1_checks = 0;
  int phase2_checks = 0;
  /// Individual shadow-versus-link GJK queries.
  int gjk_calls = 0;
  std::chrono::nanoseconds elapsed{0};

  /// Equality on everything except timing.
  bool same_result(const CertifiedBound& o) const {
    return epsilon == o.epsilon && eps_lower == o.eps_lower &&
           eps_upper == o.eps_upper && method == o.method && eps1 == o.eps1 &&
           eps2 == o.eps2 && normal == o.normal &&
           normal_degenerate == o.normal_degenerate &&
           saturated_low == o.saturated_low &&
           saturated_high == o.saturated_high &&
           collision_checks == o.collision_checks &&
           phase1_checks == o.phase1_checks &&
           phase2_checks == o.phase2_checks && gjk_calls == o.gjk_calls;
  }
};

struct RiskReport {
  std::vector<CertifiedBound> per_obstacle;
  std::vector<std::string> obstacle_names;
  /// Union bound over obstacles, clamped to 1.
  double scene_bound = 0.0;
};

/// Sums per-obstacle bounds (Boole's inequality), clamped to 1.
inline RiskReport aggregate(std::vector<CertifiedBound> bounds) {
  RiskReport report;
  double total = 0.0;
  for (const CertifiedBound& b : bounds) total += b.epsilon;
  report.scene_bound = std::min(1.0, total);
  report.per_obstacle = std::move(bounds);
  return report;
}

namespace detail {

class LinkSet {
 public:
  explicit LinkSet(std::span<const ConvexBody> links) : links_(links) {
    bounds_.reserve(links.size());
    for (const ConvexBody& link : links) bounds_.push_back(probe_axes(link));
    warm_.assign(links.size(), Vec3::Zero());
  }

  std::size_t size() const { return links_.size(); }
  const ConvexBody& operator[](std::size_t i) const { return links_[i]; }

  /// Index of the first link (scene order) intersecting `shadow`, or -1.
  template <SupportMapped S>
  int first_hit(const S& shadow, const GjkSettings& gjk, int& gjk_calls) const {
    const AxisBounds shadow_bounds = probe_axes(shadow);
    for (std::size_t i = 0; i < links_.size(); ++i) {
      ++gjk_calls;
      if (intersects(shadow, shadow_bounds, links_[i], bounds_[i], gjk, warm_[i])) {
        return static_cast<int>(i);
      }
    }
    return -1;
  }

 private:
  std::span<const ConvexBody> links_;
  std::vector<AxisBounds> bounds_;
  // Per-link GJK seeds carried across bisection steps of one query.
  mutable std::vector<Vec3> warm_;
};

struct BisectionResult {
  double lower = 0.0;
  double upper = 1.0;
  int checks = 0;
  bool any_hit = false;
  bool any_clear = false;
  /// Link that stopped the most recent colliding shadow.
  int last_hit_link = -1;
};

// `hit(eps)` returns the colliding link index or -1. Shadows are only built
// inside [eps_floor, 1 - eps_floor].
template <class HitFn>
BisectionResult bisect(double lower, double upper, double eps_tol,
                       double eps_floor, HitFn&& hit) {
  BisectionResult r;
  r.lower = lower;
  r.upper = upper;
  while (r.upper - r.lower > eps_tol) {
    const double mid = 0.5 * (r.lower + r.upper);
    const double eps = std::clamp(mid, eps_floor, 1.0 - eps_floor);
    ++r.checks;
    const int link = hit(eps);
    if (link >= 0) {
      r.any_hit = true;
      r.last_hit_link = link;
      r.lower = std::min(mid, eps);
    } else {
      r.any_clear = true;
      r.upper = std::max(mid, eps);
    }
  }
  return r;
}

inline void check_certify_inputs(std::span<const ConvexBody> links,
                                 double eps_tol) {
  if (links.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "certification needs >= 1 link");
  }
  if (!(eps_tol > 0.0 && eps_tol <= 0.5)) {
    throw Error(ErrorCode::kInvalidArgument,
                "eps_tol must lie in (0, 0.5], got " + std::to_string(eps_tol));
  }
}

inline CertifiedBound one_shot_phase(const LinkSet& links,
                                     const ShadowBuilder& shadows,
                                     const CertifyOptions& opt,
                                     BisectionResult& phase) {
  CertifiedBound out;
  const double floor = epsilon_min(opt.eps_tol);
  phase = bisect(0.0, 1.0, opt.eps_tol, floor, [&](double eps) {
    return links.first_hit(shadows.full(eps), opt.gjk, out.gjk_calls);
  });
  out.method = MethodUsed::kOneShot;
  out.eps_lower = phase.lower;
  out.eps_upper = phase.upper;
  out.epsilon = phase.upper;
  out.eps1 = phase.upper;
  out.eps2 = phase.upper;
  out.saturated_low = !phase.any_hit;
  out.saturated_high = !phase.any_clear;
  if (out.saturated_high) {
    out.epsilon = out.eps1 = out.eps2 = out.eps_upper = 1.0;
  }
  out.phase1_checks = phase.checks;
  out.collision_checks = phase.checks;
  return out;
}

}  // namespace detail

/// One-shot bisection over full shadows.
inline CertifiedBound certify_one_shot(std::span<const ConvexBody> links,
                                       const UncertainObstacle& obstacle,
                                       const CertifyOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  detail::check_certify_inputs(links, opt.eps_tol);
  const ShadowBuilder shadows(obstacle, opt.tolerances);
  const detail::LinkSet link_set(links);
  detail::BisectionResult phase;
  CertifiedBound out = detail::one_shot_phase(link_set, shadows, opt, phase);
  out.elapsed = std::chrono::steady_clock::now() - start;
  return out;
}

inline CertifiedBound certify_one_shot(std::span<const ConvexBody> links,
                                       const UncertainObstacle& obstacle,
                                       double eps_tol) {
  CertifyOptions opt;
  opt.eps_tol = eps_tol;
  return certify_one_shot(links, obstacle, opt);
}

/// One-shot search followed by a half-shadow expansion along the contact
/// normal; the bound is (eps1 + eps2) / 2.
inline CertifiedBound certify_two_shot(std::span<const ConvexBody> links,
                                       const UncertainObstacle& obstacle,
                                       const CertifyOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  detail::check_certify_inputs(links, opt.eps_tol);
  const ShadowBuilder shadows(obstacle, opt.tolerances);
  const detail::LinkSet link_set(links);
  detail::BisectionResult phase1;
  CertifiedBound out = detail::one_shot_phase(link_set, shadows, opt, phase1);

  auto fallback = [&]() {
    out.method = MethodUsed::kOneShotFallback;
    out.elapsed = std::chrono::steady_clock::now() - start;
    return out;
  };
  if (out.saturated_high || phase1.last_hit_link < 0) return fallback();

  const double floor = epsilon_min(opt.eps_tol);
  const double eps1 = out.eps1;
  const FullShadow clear_shadow =
      shadows.full(std::clamp(eps1, floor, 1.0 - floor));
  const ContactNormal contact = contact_normal_into(
      clear_shadow, link_set[static_cast<std::size_t>(phase1.last_hit_link)],
      opt.gjk);
  if (!contact.valid) return fallback();
  out.normal = contact.normal;
  out.normal_degenerate = contact.degenerate;

  const detail::BisectionResult phase2 =
      detail::bisect(0.0, eps1, opt.eps_tol, floor, [&](double eps) {
        return link_set.first_hit(shadows.half(eps, contact.normal), opt.gjk,
                                  out.gjk_calls);
      });
  out.method = MethodUsed::kTwoShot;
  out.eps2 = phase2.upper;
  out.eps_lower = phase2.lower;
  out.eps_upper = phase2.upper;
  out.epsilon = 0.5 * (out.eps1 + out.eps2);
  out.phase2_checks = phase2.checks;
  out.collision_checks = out.phase1_checks + out.phase2_checks;
  out.elapsed = std::chrono::steady_clock::now() - start;
  return out;
}

inline CertifiedBound certify_two_shot(std::span<const ConvexBody> links,
                                       const UncertainObstacle& obstacle,
                                       double eps_tol) {
  CertifyOptions opt;
  opt.eps_tol = eps_tol;
  return certify_two_shot(links, obstacle, opt);
}

inline CertifiedBound certify(Method method, std::span<const ConvexBody> links,
                              const UncertainObstacle& obstacle,
                              const CertifyOptions& opt = {}) {
  return method == Method::kOneShot ? certify_one_shot(links, obstacle, opt)
                                    : certify_two_shot(links, obstacle, opt);
}

/// Certifies every obstacle independently and sums the bounds. With
/// `threads > 1` obstacles are distributed over worker threads; results are
/// merged by obstacle index and match the sequential run.
inline RiskReport certify_scene(const Scene& scene, Method method,
                                const CertifyOptions& opt = {},
                                unsigned threads = 1) {
  validate_scene(scene, opt.tolerances);
  const std::vector<ConvexBody> links = scene.link_bodies();
  const std::size_t n = scene.obstacles.size();
  std::vector<CertifiedBound> bounds(n);
  std::vector<std::exception_ptr> errors(n);

  auto run = [&](std::size_t i) {
    if (links.empty()) {
      // Nothing to hit.
      CertifiedBound& b = bounds[i];
      b.method = method == Method::kOneShot ? MethodUsed::kOneShot
                                            : MethodUsed::kTwoShot;
      b.epsilon = b.eps_lower = b.eps_upper = b.eps1 = b.eps2 = 0.0;
      b.saturated_low = true;
      return;
    }
    try {
      bounds[i] = certify(method, links, scene.obstacles[i].obstacle, opt);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    const std::size_t workers = std::min<std::size_t>(threads, n);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        for (std::size_t i = w; i < n; i += workers) run(i);
      });
    }
    for (std::thread& t : pool) t.join();
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    const std::string& name = scene.obstacles[i].name;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error& e) {
      throw Error(e.code(), "obstacle '" + name + "': " + e.message());
    }
  }
  RiskReport report = aggregate(std::move(bounds));
  for (const SceneObstacle& obs : scene.obstacles) {
    report.obstacle_names.push_back(obs.name);
  }
  return report;
}

}  // namespace riskcert
