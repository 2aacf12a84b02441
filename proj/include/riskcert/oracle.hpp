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

// Plain Monte Carlo ground truth for collision probabilities and shadow mass.
//
// Sample i is a pure function of (seed, i): a counter-based generator feeds a
// Box-Muller transform, so any split of [0, N) across threads reproduces the
// sequential tallies exactly.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <numbers>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "riskcert/convex.hpp"
#include "riskcert/error.hpp"
#include "riskcert/geometry.hpp"
#include "riskcert/gjk.hpp"
#include "riskcert/shadow.hpp"

namespace riskcert {

struct McEstimate {
  double estimate = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t hits = 0;
  /// 3 * sqrt(p (1 - p) / N), floored at 3 / N.
  double ci_half_width_3sigma = 0.0;
  std::uint64_t seed = 0;
};

inline McEstimate make_estimate(std::uint64_t hits, std::uint64_t samples,
                                std::uint64_t seed) {
  McEstimate out;
  out.hits = hits;
  out.samples = samples;
  out.seed = seed;
  const double n = static_cast<double>(samples);
  out.estimate = static_cast<double>(hits) / n;
  out.ci_half_width_3sigma =
      std::max(3.0 * std::sqrt(out.estimate * (1.0 - out.estimate) / n), 3.0 / n);
  return out;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Draws d ~ N(0, Sigma) as a pure function of the sample index.
class GaussianSampler {
 public:
  GaussianSampler(const Mat3& sigma, std::uint64_t seed)
      : key_(splitmix64(seed)) {
    // Eigen factor handles singular Sigma; tiny negative eigenvalues clip.
    Eigen::SelfAdjointEigenSolver<Mat3> solver(0.5 * (sigma + sigma.transpose()));
    const Vec3 root = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    factor_ = solver.eigenvectors() * root.asDiagonal();
  }

  /// Standard normal triple for sample `index`.
  Vec3 standard(std::uint64_t index) const {
    const std::uint64_t base = splitmix64(key_ ^ (index * 0xD1B54A32D192ED03ull));
    double u[4];
    for (int j = 0; j < 4; ++j) {
      // 53 random bits mapped to (0, 1].
      const std::uint64_t bits = splitmix64(base + static_cast<std::uint64_t>(j));
      u[j] = (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
    }
    const double r0 = std::sqrt(-2.0 * std::log(u[0]));
    const double r1 = std::sqrt(-2.0 * std::log(u[2]));
    const double two_pi = 2.0 * std::numbers::pi;
    return {r0 * std::cos(two_pi * u[1]), r0 * std::sin(two_pi * u[1]),
            r1 * std::cos(two_pi * u[3])};
  }

  Vec3 operator()(std::uint64_t index) const { return factor_ * standard(index); }

  const Mat3& factor() const { return factor_; }

 private:
  std::uint64_t key_;
  Mat3 factor_;
};

namespace detail {

inline void check_samples(std::uint64_t samples) {
  if (samples < 1) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one sample");
  }
}

// Counts predicate hits over [0, samples), sharded over `threads` contiguous
// ranges. `count(begin, end)` must be thread-safe.
template <class CountFn>
std::uint64_t sharded_count(std::uint64_t samples, unsigned threads,
                            CountFn&& count) {
  if (threads <= 1) return count(0, samples);
  const std::uint64_t shards = std::min<std::uint64_t>(threads, samples);
  std::vector<std::uint64_t> tallies(shards, 0);
  std::vector<std::exception_ptr> errors(shards);
  std::vector<std::thread> pool;
  for (std::uint64_t s = 0; s < shards; ++s) {
    pool.emplace_back([&, s]() {
      const std::uint64_t begin = samples * s / shards;
      const std::uint64_t end = samples * (s + 1) / shards;
      try {
        tallies[s] = count(begin, end);
      } catch (...) {
        errors[s] = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::uint64_t total = 0;
  for (std::uint64_t t : tallies) total += t;
  return total;
}

}  // namespace detail

/// Fraction of sampled obstacle displacements for which the displaced
/// nominal body intersects any link.
inline McEstimate mc_collision_probability(std::span<const ConvexBody> links,
                                           const UncertainObstacle& obstacle,
                                           std::uint64_t samples,
                                           std::uint64_t seed,
                                           unsigned threads = 1,
                                           const GjkSettings& gjk = {}) {
  detail::check_samples(samples);
  validate_obstacle(obstacle);
  const GaussianSampler sampler(sigma_world(obstacle), seed);
  std::vector<AxisBounds> link_bounds;
  for (const ConvexBody& link : links) link_bounds.push_back(probe_axes(link));
  const Posed<ConvexBody> nominal{obstacle.nominal, obstacle.pose};
  const AxisBounds nominal_bounds = probe_axes(nominal);

  auto count = [&](std::uint64_t begin, std::uint64_t end) {
    std::uint64_t hits = 0;
    for (std::uint64_t i = begin; i < end; ++i) {
      const Vec3 d = sampler(i);
      const Posed<ConvexBody> moved{
          obstacle.nominal,
          Pose{obstacle.pose.rotation, obstacle.pose.translation + d}};
      const AxisBounds moved_bounds{nominal_bounds.lower + d,
                                    nominal_bounds.upper + d};
      try {
        for (std::size_t k = 0; k < links.size(); ++k) {
          if (intersects(moved, moved_bounds, links[k], link_bounds[k], gjk)) {
            ++hits;
            break;
          }
        }
      } catch (const Error& e) {
        throw Error(ErrorCode::kSampleFailure,
                    "sample " + std::to_string(i) + ": " + e.what());
      }
    }
    return hits;
  };
  return make_estimate(detail::sharded_count(samples, threads, count), samples,
                       seed);
}

/// Fraction of sampled displacements inside the shadow's displacement set:
/// the covariance ellipsoid (full) or its half toward `spec.normal` (half).
inline McEstimate mc_shadow_mass(const UncertainObstacle& obstacle,
                                 const ShadowSpec& spec, std::uint64_t samples,
                                 std::uint64_t seed, unsigned threads = 1) {
  detail::check_samples(samples);
  validate_obstacle(obstacle);
  const Mat3 sigma = sigma_world(obstacle);
  const double level = shadow_level(spec.epsilon);
  const GaussianSampler sampler(sigma, seed);

  // Mahalanobis form via the pseudo-inverse so flat ellipsoids work.
  Eigen::SelfAdjointEigenSolver<Mat3> solver(sigma);
  const Vec3 eig = solver.eigenvalues();
  const double cutoff = 1e-12 * std::max(eig.maxCoeff(), 1e-300);
  Vec3 inv = Vec3::Zero();
  for (int i = 0; i < 3; ++i) inv[i] = eig[i] > cutoff ? 1.0 / eig[i] : 0.0;
  const Mat3 pinv =
      solver.eigenvectors() * inv.asDiagonal() * solver.eigenvectors().transpose();

  auto count = [&](std::uint64_t begin, std::uint64_t end) {
    std::uint64_t hits = 0;
    for (std::uint64_t i = begin; i < end; ++i) {
      const Vec3 d = sampler(i);
      if (d.dot(pinv * d) > level) continue;
      if (spec.kind == ShadowKind::kHalf && spec.normal.dot(d) < 0.0) continue;
      ++hits;
    }
    return hits;
  };
  return make_estimate(detail::sharded_count(samples, threads, count), samples,
                       seed);
}

}  // namespace riskcert
