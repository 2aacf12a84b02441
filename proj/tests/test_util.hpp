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

// Test-side oracles and random scene generation. The oracles use only Eigen
// and <cmath>, never the library's geometry or statistics code.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "riskcert/riskcert.hpp"

namespace riskcert::testing {

inline std::string fixture(const std::string& name) {
  return std::string(RISKCERT_FIXTURE_DIR) + "/" + name;
}

// ---------------------------------------------------------------------------
// Random inputs.

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v;
  do {
    v = {n(rng), n(rng), n(rng)};
  } while (v.norm() < 1e-6);
  return v.normalized();
}

inline Vec3 random_in_box(std::mt19937_64& rng, double half) {
  std::uniform_real_distribution<double> u(-half, half);
  return {u(rng), u(rng), u(rng)};
}

inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

/// R diag(s^2) R^T with standard deviations drawn from [lo, hi].
inline Mat3 random_covariance(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  const Vec3 sd(u(rng), u(rng), u(rng));
  const Mat3 r = random_rotation(rng);
  Mat3 s = r * sd.cwiseProduct(sd).asDiagonal() * r.transpose();
  return 0.5 * (s + s.transpose());
}

inline std::vector<Vec3> random_cloud(std::mt19937_64& rng, int n, double half,
                                      const Vec3& center) {
  std::vector<Vec3> out;
  for (int i = 0; i < n; ++i) out.push_back(center + random_in_box(rng, half));
  return out;
}

inline ConvexBody random_shape(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_real_distribution<double> size(0.05, 0.3);
  switch (kind(rng)) {
    case 0: return Box{Vec3(size(rng), size(rng), size(rng))};
    case 1: return Sphere{size(rng)};
    case 2: return Cylinder{size(rng), size(rng)};
    default: {
      std::uniform_int_distribution<int> count(4, 10);
      return Polytope{random_cloud(rng, count(rng), size(rng), Vec3::Zero())};
    }
  }
}

/// 1-6 links and 1-3 obstacles in a ~2 m cube with covariance standard
/// deviations between 0.02 and 0.25 m. Geometry is arranged so risks span
/// many orders of magnitude, including nominal collisions.
inline Scene random_scene(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_links(1, 6);
  std::uniform_int_distribution<int> n_obs(1, 3);
  Scene scene;
  const int m = n_links(rng);
  for (int i = 0; i < m; ++i) {
    SceneLink link;
    link.name = "link" + std::to_string(i);
    link.shape = random_shape(rng);
    link.pose.rotation = random_rotation(rng);
    link.pose.translation = random_in_box(rng, 0.6);
    scene.links.push_back(std::move(link));
  }
  const int k = n_obs(rng);
  std::uniform_real_distribution<double> dist(0.3, 1.4);
  for (int j = 0; j < k; ++j) {
    SceneObstacle obs;
    obs.name = "obstacle" + std::to_string(j);
    obs.obstacle.nominal = random_shape(rng);
    obs.obstacle.pose.rotation = random_rotation(rng);
    obs.obstacle.pose.translation = random_unit(rng) * dist(rng);
    obs.obstacle.sigma_local = random_covariance(rng, 0.02, 0.25);
    scene.obstacles.push_back(std::move(obs));
  }
  return scene;
}

// ---------------------------------------------------------------------------
// Closed forms.

/// P(chi^2_3 <= x) = erf(sqrt(x/2)) - sqrt(2/pi) sqrt(x) exp(-x/2).
inline double chi2_3_cdf_closed(double x) {
  return std::erf(std::sqrt(0.5 * x)) -
         std::sqrt(2.0 / std::numbers::pi) * std::sqrt(x) * std::exp(-0.5 * x);
}

/// Upper tail of the same; erfc keeps it accurate for large x.
inline double chi2_3_sf_closed(double x) {
  return std::erfc(std::sqrt(0.5 * x)) +
         std::sqrt(2.0 / std::numbers::pi) * std::sqrt(x) * std::exp(-0.5 * x);
}

/// Probability that a point at distance L from a ball of radius r, displaced
/// by N(0, sigma^2 I), ends up inside it.
inline double point_sphere_risk(double L, double r, double sigma) {
  const double s = (L - r) / sigma;
  return chi2_3_sf_closed(s * s);
}

// Exact P(|x - c| <= r) for x ~ N(0, sigma^2 I) in 3D, |c| = L: the
// probability that a point at distance L lies inside the displaced ball.
// The radius of N(c, I) has density (t / m) (phi(t - m) - phi(t + m)).
inline double point_ball_hit_probability(double L, double r, double sigma) {
  const double m = L / sigma;
  const double rho = r / sigma;
  auto Phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  auto phi = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); };
  return Phi(rho - m) - Phi(-rho - m) - (phi(rho - m) - phi(rho + m)) / m;
}

// ---------------------------------------------------------------------------
// Numerical integration of the chi-squared density.

inline double chi2_density(double x, int k) {
  if (x <= 0.0) return 0.0;
  const double a = 0.5 * k;
  return std::pow(x, a - 1.0) * std::exp(-0.5 * x) /
         (std::pow(2.0, a) * std::tgamma(a));
}

inline double simpson(const std::function<double(double)>& f, double a,
                      double b, double fa, double fm, double fb, double whole,
                      double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

/// Adaptive Simpson integral of f over [a, b].
inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-12) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(f, a, b, fa, fm, fb, whole, tol, 50);
}

inline double chi2_cdf_by_integration(double x, int k) {
  return integrate([k](double t) { return chi2_density(t, k); }, 0.0, x);
}

/// Quantile by bisection on the integrated CDF.
inline double chi2_quantile_by_integration(double p, int k) {
  double lo = 0.0;
  double hi = 100.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (chi2_cdf_by_integration(mid, k) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Exact polytope oracles.

/// Phase-one simplex: is { x >= 0 : A x = b } nonempty? Dense tableau with
/// Bland's rule; fine for the handful of rows used here.
inline bool lp_feasible(Eigen::MatrixXd a, Eigen::VectorXd b, double tol = 1e-10) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  for (int i = 0; i < m; ++i) {
    if (b[i] < 0.0) {
      a.row(i) *= -1.0;
      b[i] = -b[i];
    }
  }
  // Columns: n originals, m artificials, then the right-hand side.
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  t.block(0, 0, m, n) = a;
  t.block(0, n, m, m) = Eigen::MatrixXd::Identity(m, m);
  t.col(n + m).head(m) = b;
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;
  // Objective row: minimize the sum of artificials, reduced costs.
  for (int i = 0; i < m; ++i) t.row(m) -= t.row(i);
  for (int i = 0; i < m; ++i) t(m, n + i) = 0.0;

  for (int iter = 0; iter < 10000; ++iter) {
    int enter = -1;
    for (int j = 0; j < n + m; ++j) {
      if (t(m, j) < -tol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      if (t(i, enter) > tol) {
        const double ratio = t(i, n + m) / t(i, enter);
        if (ratio < best - 1e-15 ||
            (ratio <= best + 1e-15 && leave >= 0 && basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) break;  // unbounded cannot happen in phase one
    t.row(leave) /= t(leave, enter);
    for (int i = 0; i <= m; ++i) {
      if (i != leave && t(i, enter) != 0.0) t.row(i) -= t(i, enter) * t.row(leave);
    }
    basis[leave] = enter;
  }
  return -t(m, n + m) <= 1e-9;
}

/// conv(P) and conv(Q) share a point: lambda, mu >= 0, sum 1 each,
/// sum lambda_i p_i = sum mu_j q_j.
inline bool hulls_intersect_lp(const std::vector<Vec3>& p,
                               const std::vector<Vec3>& q) {
  const int np = static_cast<int>(p.size());
  const int nq = static_cast<int>(q.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(5, np + nq);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(5);
  for (int i = 0; i < np; ++i) {
    a.block<3, 1>(0, i) = p[i];
    a(3, i) = 1.0;
  }
  for (int j = 0; j < nq; ++j) {
    a.block<3, 1>(0, np + j) = -q[j];
    a(4, np + j) = 1.0;
  }
  b[3] = 1.0;
  b[4] = 1.0;
  return lp_feasible(a, b);
}

inline double point_segment_distance(const Vec3& x, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (x - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - x).norm();
}

inline double point_triangle_distance(const Vec3& x, const Vec3& a,
                                      const Vec3& b, const Vec3& c) {
  const Vec3 n = (b - a).cross(c - a);
  const double n2 = n.squaredNorm();
  double best = std::min({point_segment_distance(x, a, b),
                          point_segment_distance(x, b, c),
                          point_segment_distance(x, c, a)});
  if (n2 > 1e-24) {
    const Vec3 proj = x - n * ((x - a).dot(n) / n2);
    // Barycentric inside test.
    const double u = (b - a).cross(proj - a).dot(n);
    const double v = (c - b).cross(proj - b).dot(n);
    const double w = (a - c).cross(proj - c).dot(n);
    if (u >= 0.0 && v >= 0.0 && w >= 0.0) best = std::min(best, (proj - x).norm());
  }
  return best;
}

inline double segment_segment_distance(const Vec3& p1, const Vec3& q1,
                                       const Vec3& p2, const Vec3& q2) {
  const Vec3 d1 = q1 - p1;
  const Vec3 d2 = q2 - p2;
  const Vec3 r = p1 - p2;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  double s = 0.0;
  double t = 0.0;
  if (a <= 1e-24 && e <= 1e-24) return r.norm();
  if (a <= 1e-24) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= 1e-24) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > 1e-24 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return (p1 + d1 * s - (p2 + d2 * t)).norm();
}

/// Distance between disjoint convex hulls by enumerating vertex-triangle and
/// edge-edge pairs over all vertex subsets. Exact for separated hulls.
inline double hull_distance_brute(const std::vector<Vec3>& p,
                                  const std::vector<Vec3>& q) {
  double best = std::numeric_limits<double>::infinity();
  auto vertex_vs_triangles = [&best](const std::vector<Vec3>& pts,
                                     const std::vector<Vec3>& tri) {
    const std::size_t n = tri.size();
    for (const Vec3& x : pts) {
      for (std::size_t i = 0; i < n; ++i) {
        best = std::min(best, (x - tri[i]).norm());
        for (std::size_t j = i + 1; j < n; ++j) {
          best = std::min(best, point_segment_distance(x, tri[i], tri[j]));
          for (std::size_t k = j + 1; k < n; ++k) {
            best = std::min(best, point_triangle_distance(x, tri[i], tri[j], tri[k]));
          }
        }
      }
    }
  };
  vertex_vs_triangles(p, q);
  vertex_vs_triangles(q, p);
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      for (std::size_t k = 0; k < q.size(); ++k) {
        for (std::size_t l = k + 1; l < q.size(); ++l) {
          best = std::min(best, segment_segment_distance(p[i], p[j], q[k], q[l]));
        }
      }
    }
  }
  return best;
}

}  // namespace riskcert::testing
