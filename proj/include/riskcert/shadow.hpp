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

// Risk shadows of obstacles with Gaussian position uncertainty.
//
// An obstacle whose nominal geometry O is displaced by d ~ N(0, Sigma) lies
// inside O + D whenever d lies in D. With D the covariance ellipsoid at level
// chi2_isf(eps, 3) the full shadow contains the obstacle with probability
// exactly 1 - eps. Cutting D with the half-space {n . d >= 0} gives the half
// shadow, which by symmetry of the Gaussian captures (1 - eps) / 2.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "riskcert/chi2.hpp"
#include "riskcert/convex.hpp"
#include "riskcert/error.hpp"
#include "riskcert/geometry.hpp"

namespace riskcert {

/// Smallest risk level a shadow is ever built at; keeps the ellipsoid level
/// finite (chi2_isf(1e-9, 3) is about 44).
inline constexpr double kEpsilonFloor = 1e-9;

inline double epsilon_min(double eps_tol) {
  return std::min(eps_tol, kEpsilonFloor);
}

struct UncertainObstacle {
  ConvexBody nominal;
  /// Places the nominal geometry in the world.
  Pose pose;
  /// Position covariance expressed in the obstacle frame.
  Mat3 sigma_local = Mat3::Zero();
};

inline void validate_obstacle(const UncertainObstacle& obstacle,
                              const Tolerances& tol = Tolerances{}) {
  validate_pose(obstacle.pose, tol);
  validate_covariance(obstacle.sigma_local, tol);
}

/// World-frame covariance R Sigma_local R^T, where R is the pose rotation
/// (local to world); equivalently the inverse of Sigma_local = R' Sigma R'^T
/// with R' the global-to-local rotation.
inline Mat3 sigma_world(const UncertainObstacle& obstacle) {
  const Mat3& r = obstacle.pose.rotation;
  const Mat3 s = r * obstacle.sigma_local * r.transpose();
  return 0.5 * (s + s.transpose());
}

/// Ellipsoid level capturing probability 1 - eps of a 3D Gaussian.
inline double shadow_level(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "shadow risk level must lie in (0, 1), got " +
                    std::to_string(eps));
  }
  return chi2_isf(eps, kWorkspaceDof);
}

enum class ShadowKind { kFull, kHalf };

struct ShadowSpec {
  ShadowKind kind = ShadowKind::kFull;
  double epsilon = 0.5;
  /// Half-space normal (world frame); only used for kHalf.
  Vec3 normal = Vec3::UnitZ();

  static ShadowSpec full(double eps) { return {ShadowKind::kFull, eps, Vec3::UnitZ()}; }
  static ShadowSpec half(double eps, const Vec3& n) {
    return {ShadowKind::kHalf, eps, n};
  }

  /// Probability that the displacement lands in the shadow's ellipsoid part.
  double captured_mass() const {
    return kind == ShadowKind::kFull ? 1.0 - epsilon : 0.5 * (1.0 - epsilon);
  }
};

using FullShadow = MinkowskiSum<Posed<ConvexBody>, CovarianceEllipsoid>;
using HalfShadow = MinkowskiSum<Posed<ConvexBody>, HalfEllipsoid>;

/// Builds shadows of one obstacle. The obstacle is validated once here; the
/// per-call cost is a chi-squared quantile.
class ShadowBuilder {
 public:
  explicit ShadowBuilder(const UncertainObstacle& obstacle,
                         const Tolerances& tol = Tolerances{})
      : nominal_{obstacle.nominal, obstacle.pose},
        sigma_(sigma_world(obstacle)),
        tol_(tol) {
    validate_obstacle(obstacle, tol);
  }

  const Posed<ConvexBody>& nominal() const { return nominal_; }
  const Mat3& sigma() const { return sigma_; }

  FullShadow full(double eps) const {
    return {nominal_, CovarianceEllipsoid(sigma_, shadow_level(eps))};
  }

  HalfShadow half(double eps, const Vec3& normal) const {
    require_finite(normal, "half-space normal");
    if (std::abs(normal.norm() - 1.0) > tol_.membership) {
      throw Error(ErrorCode::kInvalidArgument,
                  "half-space normal must be unit length");
    }
    return {nominal_,
            HalfEllipsoid{CovarianceEllipsoid(sigma_, shadow_level(eps)), normal}};
  }

 private:
  Posed<ConvexBody> nominal_;
  Mat3 sigma_;
  Tolerances tol_;
};

/// Convex shadow O + D containing the obstacle with probability 1 - eps.
inline FullShadow full_shadow(const UncertainObstacle& obstacle, double eps) {
  return ShadowBuilder(obstacle).full(eps);
}

/// O + (D cut by {normal . d >= 0}); captures probability (1 - eps) / 2.
inline HalfShadow half_shadow(const UncertainObstacle& obstacle, double eps,
                              const Vec3& normal) {
  return ShadowBuilder(obstacle).half(eps, normal);
}

}  // namespace riskcert
