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

// Gilbert-Johnson-Keerthi proximity queries on support-mapped bodies.
//
// The iteration works on the Minkowski difference A - B, whose support in
// direction d is support_A(d) - support_B(-d). Each step finds the point v of
// the current simplex closest to the origin, then queries the difference
// support in -v. The simplex sub-problem is solved by enumerating the faces
// of the (at most 4-point) simplex and keeping the closest affine projection
// whose barycentric weights are all non-negative.
//
// Configurations closer than about 1e-6 m to touching may be classified
// either way; callers that bisect on a size parameter only lose a step.

#pragma once

#include <array>
#include <cmath>
#include <limits>

#include "riskcert/convex.hpp"
#include "riskcert/error.hpp"
#include "riskcert/geometry.hpp"

namespace riskcert {

struct GjkSettings {
  int max_iterations = 128;
  /// Absolute tolerance (m) on |v| for the intersecting verdict and on the
  /// distance error bound used for termination.
  double tolerance = 1e-9;
  /// Relative distance error at which a distance query stops refining.
  double relative_tolerance = 1e-9;
  /// Cheap bounding-sphere reject before running GJK in intersects().
  bool bounding_reject = true;
};

struct ProximityResult {
  bool intersecting = false;
  double distance = 0.0;
  /// Closest points, meaningful only when separated.
  Vec3 witness_a = Vec3::Zero();
  Vec3 witness_b = Vec3::Zero();
  /// Last closest-point estimate in A - B; seeds a later query on nearby bodies.
  Vec3 axis = Vec3::Zero();
  int iterations = 0;
};

namespace detail {

struct SimplexVertex {
  Vec3 w;  // a - b
  Vec3 a;
  Vec3 b;
};

struct Simplex {
  std::array<SimplexVertex, 4> v;
  int size = 0;
};

struct SimplexSolution {
  Vec3 point = Vec3::Zero();
  std::array<double, 4> weights{};
};

// Affine projection of the origin onto the points selected by `idx`.
// Returns false for degenerate subsets or projections outside the face.
inline bool project_face(const Simplex& s, const int* idx, int count,
                         SimplexSolution& out) {
  const Vec3& y0 = s.v[idx[0]].w;
  if (count == 1) {
    out.point = y0;
    out.weights = {1.0, 0.0, 0.0, 0.0};
    return true;
  }
  if (count == 2) {
    const Vec3 e = s.v[idx[1]].w - y0;
    const double ee = e.squaredNorm();
    if (!(ee > 1e-30 * (y0.squaredNorm() + 1.0))) return false;
    const double t = -y0.dot(e) / ee;
    if (t < 0.0 || t > 1.0) return false;
    out.point = y0 + t * e;
    out.weights = {1.0 - t, t, 0.0, 0.0};
    return true;
  }
  if (count == 3) {
    const Vec3 e1 = s.v[idx[1]].w - y0;
    const Vec3 e2 = s.v[idx[2]].w - y0;
    const double g11 = e1.squaredNorm();
    const double g22 = e2.squaredNorm();
    const double g12 = e1.dot(e2);
    const double det = g11 * g22 - g12 * g12;
    if (!(det > 1e-24 * g11 * g22)) return false;
    const double r1 = -y0.dot(e1);
    const double r2 = -y0.dot(e2);
    const double t1 = (r1 * g22 - r2 * g12) / det;
    const double t2 = (g11 * r2 - g12 * r1) / det;
    const double t0 = 1.0 - t1 - t2;
    if (t0 < 0.0 || t1 < 0.0 || t2 < 0.0) return false;
    out.point = y0 + t1 * e1 + t2 * e2;
    out.weights = {t0, t1, t2, 0.0};
    return true;
  }
  Mat3 e;
  e.col(0) = s.v[idx[1]].w - y0;
  e.col(1) = s.v[idx[2]].w - y0;
  e.col(2) = s.v[idx[3]].w - y0;
  const double det = e.determinant();
  const double scale = e.col(0).norm() * e.col(1).norm() * e.col(2).norm();
  if (!(std::abs(det) > 1e-12 * scale)) return false;
  const Vec3 t = e.inverse() * (-y0);
  const double t0 = 1.0 - t.sum();
  if (t0 < 0.0 || (t.array() < 0.0).any()) return false;
  out.point = Vec3::Zero();
  out.weights = {t0, t[0], t[1], t[2]};
  return true;
}

// Replaces `s` with the smallest face containing the point closest to the
// origin and returns that point with its barycentric weights.
inline SimplexSolution reduce_simplex(Simplex& s) {
  // Subsets ordered by size so ties keep the smaller face.
  static constexpr std::array<int, 15> kMasks = {
      0b0001, 0b0010, 0b0100, 0b1000, 0b0011, 0b0101, 0b1001, 0b0110,
      0b1010, 0b1100, 0b0111, 0b1011, 0b1101, 0b1110, 0b1111};
  SimplexSolution best;
  int best_mask = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  const int full = (1 << s.size) - 1;
  auto search = [&]() {
    for (int mask : kMasks) {
      if ((mask & ~full) != 0) continue;
      int idx[4];
      int count = 0;
      for (int i = 0; i < s.size; ++i) {
        if (mask & (1 << i)) idx[count++] = i;
      }
      SimplexSolution candidate;
      if (!project_face(s, idx, count, candidate)) continue;
      const double dist = candidate.point.squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best_mask = mask;
        // Scatter weights back to simplex slots.
        best.point = candidate.point;
        best.weights = {0.0, 0.0, 0.0, 0.0};
        for (int k = 0; k < count; ++k) best.weights[idx[k]] = candidate.weights[k];
      }
    }
  };
  search();
  Simplex reduced;
  SimplexSolution compact;
  compact.point = best.point;
  for (int i = 0; i < s.size; ++i) {
    if (best_mask & (1 << i)) {
      compact.weights[reduced.size] = best.weights[i];
      reduced.v[reduced.size++] = s.v[i];
    }
  }
  s = reduced;
  return compact;
}

enum class GjkMode { kBoolean, kDistance };

template <SupportMapped A, SupportMapped B>
ProximityResult run_gjk(const A& a, const B& b, const Vec3& initial_direction,
                        GjkMode mode, const GjkSettings& settings) {
  auto support_diff = [&](const Vec3& d) {
    SimplexVertex sv;
    sv.a = a.support(d);
    sv.b = b.support(-d);
    sv.w = sv.a - sv.b;
    return sv;
  };

  ProximityResult result;
  Vec3 dir = initial_direction;
  if (!(dir.squaredNorm() > 0.0) || !dir.allFinite()) dir = Vec3::UnitX();

  Simplex simplex;
  simplex.v[0] = support_diff(-dir);
  simplex.size = 1;
  SimplexSolution sol{simplex.v[0].w, {1.0, 0.0, 0.0, 0.0}};
  double v2 = sol.point.squaredNorm();
  const double tol = settings.tolerance;

  auto finish_separated = [&]() {
    result.intersecting = false;
    result.distance = std::sqrt(v2);
    result.axis = sol.point;
    Vec3 wa = Vec3::Zero();
    Vec3 wb = Vec3::Zero();
    for (int i = 0; i < simplex.size; ++i) {
      wa += sol.weights[i] * simplex.v[i].a;
      wb += sol.weights[i] * simplex.v[i].b;
    }
    result.witness_a = wa;
    result.witness_b = wb;
    return result;
  };
  auto finish_intersecting = [&]() {
    result.intersecting = true;
    result.distance = 0.0;
    result.axis = sol.point;
    return result;
  };

  for (int iter = 1; iter <= settings.max_iterations; ++iter) {
    result.iterations = iter;
    if (v2 <= tol * tol) return finish_intersecting();

    const Vec3 v = sol.point;
    const SimplexVertex w = support_diff(-v);
    const double vw = v.dot(w.w);
    // The plane through w with normal v separates A - B from the origin.
    if (mode == GjkMode::kBoolean && vw > 0.0) return finish_separated();

    // |v| - dist <= (|v|^2 - v.w) / |v|.
    const double gap = v2 - vw;
    const double vnorm = std::sqrt(v2);
    if (gap <= std::max(tol * vnorm, settings.relative_tolerance * v2)) {
      return vw > 0.0 || mode == GjkMode::kDistance ? finish_separated()
                                                    : finish_intersecting();
    }
    bool duplicate = false;
    for (int i = 0; i < simplex.size; ++i) {
      if (simplex.v[i].w == w.w) duplicate = true;
    }
    if (duplicate) return finish_separated();

    simplex.v[simplex.size++] = w;
    const SimplexSolution next = reduce_simplex(simplex);
    const double next_v2 = next.point.squaredNorm();
    if (simplex.size == 4) {
      sol = next;
      v2 = 0.0;
      return finish_intersecting();
    }
    if (!(next_v2 < v2)) {
      // No progress: v is already the closest point up to rounding.
      return vw > 0.0 || mode == GjkMode::kDistance || vnorm > tol
                 ? finish_separated()
                 : finish_intersecting();
    }
    sol = next;
    v2 = next_v2;
  }
  const double vnorm = std::sqrt(v2);
  throw GjkError(settings.max_iterations, vnorm);
}

}  // namespace detail

/// True iff the bodies overlap, given precomputed axis probes of both.
template <SupportMapped A, SupportMapped B>
bool intersects(const A& a, const AxisBounds& bounds_a, const B& b,
                const AxisBounds& bounds_b,
                const GjkSettings& settings = GjkSettings{}) {
  const Vec3 offset = bounds_a.center() - bounds_b.center();
  if (settings.bounding_reject &&
      offset.norm() > bounds_a.radius() + bounds_b.radius()) {
    return false;
  }
  return detail::run_gjk(a, b, offset, detail::GjkMode::kBoolean, settings)
      .intersecting;
}

/// As above, starting GJK from `warm` when it is nonzero and storing the
/// final search direction back into it. Across a sequence of slowly growing
/// shadows this usually settles each query in one or two iterations.
template <SupportMapped A, SupportMapped B>
bool intersects(const A& a, const AxisBounds& bounds_a, const B& b,
                const AxisBounds& bounds_b, const GjkSettings& settings,
                Vec3& warm) {
  const Vec3 offset = bounds_a.center() - bounds_b.center();
  if (settings.bounding_reject &&
      offset.norm() > bounds_a.radius() + bounds_b.radius()) {
    return false;
  }
  const Vec3 start = warm.squaredNorm() > 0.0 ? warm : offset;
  const ProximityResult r =
      detail::run_gjk(a, b, start, detail::GjkMode::kBoolean, settings);
  if (r.axis.squaredNorm() > 0.0) warm = r.axis;
  return r.intersecting;
}

template <SupportMapped A, SupportMapped B>
bool intersects(const A& a, const B& b,
                const GjkSettings& settings = GjkSettings{}) {
  return intersects(a, probe_axes(a), b, probe_axes(b), settings);
}

/// Separation distance and closest points; distance is 0 when overlapping.
template <SupportMapped A, SupportMapped B>
ProximityResult distance(const A& a, const B& b,
                         const GjkSettings& settings = GjkSettings{}) {
  const Vec3 offset = probe_centroid(a) - probe_centroid(b);
  return detail::run_gjk(a, b, offset, detail::GjkMode::kDistance, settings);
}

struct ContactNormal {
  Vec3 normal = Vec3::Zero();
  /// Witness points coincided; `normal` came from the centroid fallback.
  bool degenerate = false;
  /// False when even the fallback direction vanished.
  bool valid = false;
};

/// Unit normal at the closest approach of a separated shadow and a link,
/// pointing from the link into the shadow.
///
/// When the witnesses coincide (distance < 1e-9) the direction from the
/// link's axis-probe centroid to the shadow's axis-probe centroid is used
/// instead. For a shadow built from a symmetric ellipsoid the latter equals
/// the nominal obstacle's centroid probe.
template <SupportMapped Shadow, SupportMapped Link>
ContactNormal contact_normal_into(const Shadow& shadow, const Link& link,
                                  const GjkSettings& settings = GjkSettings{}) {
  ContactNormal out;
  const ProximityResult prox = distance(shadow, link, settings);
  if (!prox.intersecting && prox.distance >= 1e-9) {
    const Vec3 d = prox.witness_a - prox.witness_b;
    const double n = d.norm();
    if (n > 0.0) {
      out.normal = d / n;
      out.valid = true;
      return out;
    }
  }
  out.degenerate = true;
  const Vec3 d = probe_centroid(shadow) - probe_centroid(link);
  const double n = d.norm();
  if (n > 1e-12) {
    out.normal = d / n;
    out.valid = true;
  }
  return out;
}

}  // namespace riskcert
