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

// Convex bodies represented only through their support mapping
//
//   support(u) = argmax_{p in body} u . p
//
// Primitive shapes, rigid placement and Minkowski sums are all expressed this
// way, so a sum is a constant-time node that is never expanded into vertices.
// The templates `Posed` and `MinkowskiSum` compose statically (no allocation);
// `ConvexBody` is the type-erased runtime counterpart used by scenes.

#pragma once

#include <cmath>
#include <concepts>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "riskcert/error.hpp"
#include "riskcert/geometry.hpp"

namespace riskcert {

template <class T>
concept SupportMapped = requires(const T& body, const Vec3& u) {
  { body.support(u) } -> std::convertible_to<Vec3>;
};

// ---------------------------------------------------------------------------
// Primitives. Member `support` does not validate its argument; the free
// function `support()` below does.

struct Point {
  Vec3 position = Vec3::Zero();

  Vec3 support(const Vec3&) const { return position; }
  bool operator==(const Point&) const = default;
};

struct Sphere {
  double radius = 0.0;

  Vec3 support(const Vec3& u) const { return u * (radius / u.norm()); }
  bool operator==(const Sphere&) const = default;
};

/// Axis-aligned box centered at the origin. Zero direction components pick
/// the positive face.
struct Box {
  Vec3 half_extents = Vec3::Zero();

  Vec3 support(const Vec3& u) const {
    return {u.x() >= 0.0 ? half_extents.x() : -half_extents.x(),
            u.y() >= 0.0 ? half_extents.y() : -half_extents.y(),
            u.z() >= 0.0 ? half_extents.z() : -half_extents.z()};
  }
  bool operator==(const Box&) const = default;
};

/// Cylinder centered at the origin with its axis along z.
struct Cylinder {
  double radius = 0.0;
  double half_height = 0.0;

  Vec3 support(const Vec3& u) const {
    const double radial = std::hypot(u.x(), u.y());
    const double z = u.z() >= 0.0 ? half_height : -half_height;
    if (radial == 0.0) return {0.0, 0.0, z};
    const double s = radius / radial;
    return {u.x() * s, u.y() * s, z};
  }
  bool operator==(const Cylinder&) const = default;
};

/// Convex hull of a vertex list. Ties go to the lowest vertex index.
struct Polytope {
  std::vector<Vec3> vertices;

  Vec3 support(const Vec3& u) const {
    std::size_t best = 0;
    double best_dot = vertices[0].dot(u);
    for (std::size_t i = 1; i < vertices.size(); ++i) {
      const double d = vertices[i].dot(u);
      if (d > best_dot) {
        best_dot = d;
        best = i;
      }
    }
    return vertices[best];
  }
  bool operator==(const Polytope&) const = default;
};

/// The level set { d : d^T Sigma^-1 d <= level } of a zero-mean Gaussian.
/// Support is evaluated as sqrt(level) * Sigma u / sqrt(u^T Sigma u), so Sigma
/// is never inverted and singular (flat) ellipsoids need no special casing.
struct CovarianceEllipsoid {
  Mat3 sigma = Mat3::Zero();
  double level = 0.0;

  CovarianceEllipsoid() = default;
  CovarianceEllipsoid(const Mat3& sigma_in, double level_in)
      : sigma(sigma_in), level(level_in), sqrt_level_(std::sqrt(level_in)) {}

  Vec3 support(const Vec3& u) const {
    const Vec3 su = sigma * u;
    const double quad = u.dot(su);
    if (sqrt_level_ == 0.0 || !(quad > 0.0)) return Vec3::Zero();
    return su * (sqrt_level_ / std::sqrt(quad));
  }

  double sqrt_level() const { return sqrt_level_; }

  bool operator==(const CovarianceEllipsoid& o) const {
    return sigma == o.sigma && level == o.level;
  }

 private:
  double sqrt_level_ = 0.0;
};

/// Ellipsoid cut by the half-space { d : normal . d >= 0 }.
///
/// If the unconstrained maximizer already lies in the half-space it is the
/// answer. Otherwise the cut plane is active and the maximizer of u . d over
/// the ellipse { normal . d = 0 } is sqrt(c) Sigma w / sqrt(w^T Sigma w) with
/// w = u - normal (normal^T Sigma u) / (normal^T Sigma normal).
struct HalfEllipsoid {
  CovarianceEllipsoid ellipsoid;
  Vec3 normal = Vec3::UnitZ();

  Vec3 support(const Vec3& u) const {
    const Vec3 p = ellipsoid.support(u);
    if (normal.dot(p) >= 0.0) return p;
    const Vec3 sn = ellipsoid.sigma * normal;
    const double nsn = normal.dot(sn);
    // Sigma n = 0: the flat ellipsoid lies inside the cut plane already.
    if (!(nsn > 0.0)) return p;
    const Vec3 w = u - normal * (sn.dot(u) / nsn);
    return ellipsoid.support(w);
  }

  bool operator==(const HalfEllipsoid&) const = default;
};

// ---------------------------------------------------------------------------
// Static composition.

template <SupportMapped B>
struct Posed {
  B body;
  Pose pose;

  Vec3 support(const Vec3& u) const {
    return pose.rotation * body.support(pose.rotation.transpose() * u) +
           pose.translation;
  }
};

template <SupportMapped A, SupportMapped B>
struct MinkowskiSum {
  A a;
  B b;

  Vec3 support(const Vec3& u) const { return a.support(u) + b.support(u); }
};

template <SupportMapped B>
Posed<B> posed(B body, const Pose& pose) {
  return Posed<B>{std::move(body), pose};
}

template <SupportMapped A, SupportMapped B>
MinkowskiSum<A, B> minkowski_sum(A a, B b) {
  return MinkowskiSum<A, B>{std::move(a), std::move(b)};
}

// ---------------------------------------------------------------------------
// Runtime body.

class ConvexBody;

struct PosedNode;
struct SumNode;

class ConvexBody {
 public:
  using Node = std::variant<Point, Sphere, Box, Cylinder, Polytope,
                            CovarianceEllipsoid, HalfEllipsoid, PosedNode,
                            SumNode>;

  template <class T>
  static constexpr bool is_alternative =
      std::is_same_v<T, Point> || std::is_same_v<T, Sphere> ||
      std::is_same_v<T, Box> || std::is_same_v<T, Cylinder> ||
      std::is_same_v<T, Polytope> || std::is_same_v<T, CovarianceEllipsoid> ||
      std::is_same_v<T, HalfEllipsoid> || std::is_same_v<T, PosedNode> ||
      std::is_same_v<T, SumNode>;

  ConvexBody();

  template <class Primitive>
    requires is_alternative<std::remove_cvref_t<Primitive>>
  ConvexBody(Primitive primitive)  // NOLINT(google-explicit-constructor)
      : node_(std::make_shared<const Node>(std::move(primitive))) {}

  Vec3 support(const Vec3& u) const;

  const Node& node() const;

  template <class T>
  const T* get_if() const;

  bool operator==(const ConvexBody& other) const;

 private:
  std::shared_ptr<const Node> node_;
};

struct PosedNode {
  ConvexBody body;
  Pose pose;
  bool operator==(const PosedNode&) const = default;
};

struct SumNode {
  ConvexBody a;
  ConvexBody b;
  bool operator==(const SumNode&) const = default;
};

inline ConvexBody::ConvexBody() : ConvexBody(Point{}) {}

inline const ConvexBody::Node& ConvexBody::node() const { return *node_; }

template <class T>
const T* ConvexBody::get_if() const {
  return std::get_if<T>(node_.get());
}

inline Vec3 ConvexBody::support(const Vec3& u) const {
  return std::visit(
      [&u](const auto& n) -> Vec3 {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PosedNode>) {
          return n.pose.rotation * n.body.support(n.pose.rotation.transpose() * u) +
                 n.pose.translation;
        } else if constexpr (std::is_same_v<T, SumNode>) {
          return n.a.support(u) + n.b.support(u);
        } else {
          return n.support(u);
        }
      },
      *node_);
}

inline bool ConvexBody::operator==(const ConvexBody& other) const {
  return node_ == other.node_ || *node_ == *other.node_;
}

// ---------------------------------------------------------------------------
// Checked construction and queries.

/// Support point of `body` in direction `u` (any positive length).
template <SupportMapped B>
Vec3 support(const B& body, const Vec3& u) {
  require_finite(u, "support direction");
  if (u.squaredNorm() == 0.0) {
    throw Error(ErrorCode::kZeroDirection, "support direction is zero");
  }
  return body.support(u);
}

inline ConvexBody make_point(const Vec3& p) {
  require_finite(p, "point");
  return Point{p};
}

inline ConvexBody make_sphere(double radius) {
  if (!std::isfinite(radius) || radius < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "sphere radius must be >= 0");
  }
  return Sphere{radius};
}

inline ConvexBody make_box(const Vec3& half_extents) {
  if (!half_extents.allFinite() || (half_extents.array() <= 0.0).any()) {
    throw Error(ErrorCode::kInvalidArgument, "box half extents must be > 0");
  }
  return Box{half_extents};
}

inline ConvexBody make_cylinder(double radius, double half_height) {
  if (!std::isfinite(radius) || !std::isfinite(half_height) || radius < 0.0 ||
      half_height < 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "cylinder radius and half height must be >= 0");
  }
  return Cylinder{radius, half_height};
}

inline ConvexBody make_polytope(std::vector<Vec3> vertices) {
  if (vertices.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "polytope needs a vertex");
  }
  for (const Vec3& v : vertices) require_finite(v, "polytope vertex");
  return Polytope{std::move(vertices)};
}

/// The ellipsoid { d : d^T Sigma^-1 d <= level }; Sigma must be symmetric PSD.
inline CovarianceEllipsoid covariance_ellipsoid(
    const Mat3& sigma, double level, const Tolerances& tol = Tolerances{}) {
  validate_covariance(sigma, tol);
  if (!std::isfinite(level) || level < 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "ellipsoid level must be finite and >= 0");
  }
  return CovarianceEllipsoid(sigma, level);
}

inline HalfEllipsoid half_ellipsoid(const Mat3& sigma, double level,
                                    const Vec3& normal,
                                    const Tolerances& tol = Tolerances{}) {
  require_finite(normal, "half-space normal");
  if (std::abs(normal.norm() - 1.0) > tol.membership) {
    throw Error(ErrorCode::kInvalidArgument, "half-space normal must be unit");
  }
  return HalfEllipsoid{covariance_ellipsoid(sigma, level, tol), normal};
}

inline ConvexBody make_posed(ConvexBody body, const Pose& pose,
                             const Tolerances& tol = Tolerances{}) {
  validate_pose(pose, tol);
  return PosedNode{std::move(body), pose};
}

inline ConvexBody make_minkowski_sum(ConvexBody a, ConvexBody b) {
  return SumNode{std::move(a), std::move(b)};
}

// ---------------------------------------------------------------------------
// Axis probes: six support queries along +-x, +-y, +-z.

struct AxisBounds {
  Vec3 lower;
  Vec3 upper;

  Vec3 center() const { return 0.5 * (lower + upper); }
  /// Radius of the sphere about center() enclosing the box.
  double radius() const { return 0.5 * (upper - lower).norm(); }
};

template <SupportMapped B>
AxisBounds probe_axes(const B& body) {
  AxisBounds out;
  for (int i = 0; i < 3; ++i) {
    const Vec3 e = Vec3::Unit(i);
    out.upper[i] = body.support(e)[i];
    out.lower[i] = body.support(-e)[i];
  }
  return out;
}

/// Average of the six axis support points.
template <SupportMapped B>
Vec3 probe_centroid(const B& body) {
  Vec3 sum = Vec3::Zero();
  for (int i = 0; i < 3; ++i) {
    const Vec3 e = Vec3::Unit(i);
    sum += body.support(e) + body.support(-e);
  }
  return sum / 6.0;
}

}  // namespace riskcert
