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

// Scene files (JSON, "riskcert-scene/1") and scenario generators.
//
//   {
//     "version": "riskcert-scene/1",
//     "links": [
//       {"name": "upper_arm",
//        "shape": {"kind": "box", "half_extents": [0.1, 0.1, 0.4]},
//        "pose": {"rotation": [[1,0,0],[0,1,0],[0,0,1]],
//                 "translation": [0, 0, 0.5]}}
//     ],
//     "obstacles": [
//       {"name": "crate",
//        "shape": {"kind": "sphere", "radius": 0.2},
//        "pose": {"translation": [1, 0, 0.5]},
//        "covariance": [[0.01,0,0],[0,0.01,0],[0,0,0.01]],
//        "frame": "local"}
//     ]
//   }
//
// Shape kinds: box (half_extents), sphere (radius), cylinder (radius,
// half_height; axis along local z), polytope (vertices). Pose fields default
// to identity. Covariances are row-major 3x3 in m^2; "frame" says whether
// they are expressed in the obstacle frame ("local", the default) or the
// world frame ("world"). World-frame input is stored in the local frame.
//
// Rotations within 1e-9 of SO(3) are taken as-is; within 1e-6 they are
// projected onto SO(3) (so six-digit decimals are accepted); anything else
// is rejected.

#pragma once

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/SVD>

#include "json.hpp"
#include "riskcert/convex.hpp"
#include "riskcert/error.hpp"
#include "riskcert/geometry.hpp"
#include "riskcert/scene.hpp"
#include "riskcert/shadow.hpp"

namespace riskcert {

inline constexpr std::string_view kSceneVersion = "riskcert-scene/1";

/// Malformed JSON; line and column are 1-based.
class SyntaxError : public Error {
 public:
  SyntaxError(int line, int column, const std::string& detail)
      : Error(ErrorCode::kSyntaxError, "line " + std::to_string(line) +
                                           ", column " + std::to_string(column) +
                                           ": " + detail),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

namespace detail {

using nlohmann::json;

[[noreturn]] inline void field_error(const std::string& path,
                                     const std::string& what) {
  throw Error(ErrorCode::kInvalidField, path + ": " + what);
}

inline double read_number(const json& j, const std::string& path) {
  if (!j.is_number()) field_error(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) field_error(path, "must be finite");
  return v;
}

inline Vec3 read_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) field_error(path, "expected [x, y, z]");
  return {read_number(j[0], path + "[0]"), read_number(j[1], path + "[1]"),
          read_number(j[2], path + "[2]")};
}

inline Mat3 read_mat3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) field_error(path, "expected 3x3 rows");
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    const Vec3 row = read_vec3(j[r], path + "[" + std::to_string(r) + "]");
    m.row(r) = row.transpose();
  }
  return m;
}

inline const json& require(const json& obj, const char* key,
                           const std::string& path) {
  if (!obj.is_object()) field_error(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) field_error(path, std::string("missing \"") + key + "\"");
  return *it;
}

inline Mat3 read_rotation(const json& j, const std::string& path,
                          const Tolerances& tol) {
  Mat3 r = read_mat3(j, path);
  const double ortho =
      (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  const double det = r.determinant();
  if (ortho <= tol.orthonormality && std::abs(det - 1.0) <= tol.orthonormality) {
    return r;
  }
  if (ortho <= 1e-6 && std::abs(det - 1.0) <= 1e-6) {
    Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
  }
  throw Error(ErrorCode::kNonOrthonormalRotation,
              path + ": not a rotation (|R^T R - I| = " + std::to_string(ortho) +
                  ", det = " + std::to_string(det) + ")");
}

inline Pose read_pose(const json& parent, const std::string& path,
                      const Tolerances& tol) {
  Pose pose;
  auto it = parent.find("pose");
  if (it == parent.end()) return pose;
  const json& j = *it;
  if (!j.is_object()) field_error(path, "expected an object");
  if (auto r = j.find("rotation"); r != j.end()) {
    pose.rotation = read_rotation(*r, path + ".rotation", tol);
  }
  if (auto t = j.find("translation"); t != j.end()) {
    pose.translation = read_vec3(*t, path + ".translation");
  }
  return pose;
}

inline ConvexBody read_shape(const json& j, const std::string& path) {
  const json& kind_j = require(j, "kind", path);
  if (!kind_j.is_string()) field_error(path + ".kind", "expected a string");
  const std::string kind = kind_j.get<std::string>();
  try {
    if (kind == "box") {
      return make_box(read_vec3(require(j, "half_extents", path),
                                path + ".half_extents"));
    }
    if (kind == "sphere") {
      return make_sphere(read_number(require(j, "radius", path), path + ".radius"));
    }
    if (kind == "cylinder") {
      return make_cylinder(
          read_number(require(j, "radius", path), path + ".radius"),
          read_number(require(j, "half_height", path), path + ".half_height"));
    }
    if (kind == "polytope") {
      const json& verts = require(j, "vertices", path);
      if (!verts.is_array()) field_error(path + ".vertices", "expected a list");
      std::vector<Vec3> out;
      for (std::size_t i = 0; i < verts.size(); ++i) {
        out.push_back(
            read_vec3(verts[i], path + ".vertices[" + std::to_string(i) + "]"));
      }
      return make_polytope(std::move(out));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidArgument) field_error(path, e.message());
    throw;
  }
  throw Error(ErrorCode::kUnknownShape, path + ": unknown shape kind \"" + kind + "\"");
}

inline std::string read_name(const json& j, const std::string& path) {
  const json& n = require(j, "name", path);
  if (!n.is_string() || n.get<std::string>().empty()) {
    field_error(path + ".name", "expected a non-empty string");
  }
  return n.get<std::string>();
}

inline std::pair<int, int> line_column(std::string_view text, std::size_t byte) {
  int line = 1;
  int column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

inline json shape_to_json(const ConvexBody& body) {
  if (const auto* b = body.get_if<Box>()) {
    return {{"kind", "box"},
            {"half_extents", {b->half_extents.x(), b->half_extents.y(), b->half_extents.z()}}};
  }
  if (const auto* s = body.get_if<Sphere>()) {
    return {{"kind", "sphere"}, {"radius", s->radius}};
  }
  if (const auto* c = body.get_if<Cylinder>()) {
    return {{"kind", "cylinder"}, {"radius", c->radius}, {"half_height", c->half_height}};
  }
  if (const auto* p = body.get_if<Polytope>()) {
    json verts = json::array();
    for (const Vec3& v : p->vertices) verts.push_back({v.x(), v.y(), v.z()});
    return {{"kind", "polytope"}, {"vertices", verts}};
  }
  throw Error(ErrorCode::kInvalidArgument,
              "only box, sphere, cylinder and polytope shapes are serializable");
}

inline json mat3_to_json(const Mat3& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return rows;
}

inline json pose_to_json(const Pose& p) {
  return {{"rotation", mat3_to_json(p.rotation)},
          {"translation", {p.translation.x(), p.translation.y(), p.translation.z()}}};
}

}  // namespace detail

/// Parses and validates a scene document.
inline Scene parse_scene(std::string_view text,
                         const Tolerances& tol = Tolerances{}) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, column] =
        detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw SyntaxError(line, column, e.what());
  }
  if (!doc.is_object()) detail::field_error("$", "expected an object");
  if (auto v = doc.find("version"); v != doc.end()) {
    if (!v->is_string() || v->get<std::string>() != kSceneVersion) {
      throw Error(ErrorCode::kUnsupportedVersion,
                  "expected version \"" + std::string(kSceneVersion) + "\"");
    }
  }

  Scene scene;
  if (auto links = doc.find("links"); links != doc.end()) {
    if (!links->is_array()) detail::field_error("links", "expected a list");
    for (std::size_t i = 0; i < links->size(); ++i) {
      const json& j = (*links)[i];
      const std::string path = "links[" + std::to_string(i) + "]";
      SceneLink link;
      link.name = detail::read_name(j, path);
      link.shape = detail::read_shape(detail::require(j, "shape", path), path + ".shape");
      link.pose = detail::read_pose(j, path + ".pose", tol);
      scene.links.push_back(std::move(link));
    }
  }
  if (auto obstacles = doc.find("obstacles"); obstacles != doc.end()) {
    if (!obstacles->is_array()) detail::field_error("obstacles", "expected a list");
    for (std::size_t i = 0; i < obstacles->size(); ++i) {
      const json& j = (*obstacles)[i];
      const std::string path = "obstacles[" + std::to_string(i) + "]";
      SceneObstacle obs;
      obs.name = detail::read_name(j, path);
      obs.obstacle.nominal =
          detail::read_shape(detail::require(j, "shape", path), path + ".shape");
      obs.obstacle.pose = detail::read_pose(j, path + ".pose", tol);
      const Mat3 cov = detail::read_mat3(detail::require(j, "covariance", path),
                                         path + ".covariance");
      try {
        validate_covariance(cov, tol);
      } catch (const Error& e) {
        throw Error(e.code(), path + ".covariance: " + e.message());
      }
      std::string frame = "local";
      if (auto f = j.find("frame"); f != j.end()) {
        if (!f->is_string()) detail::field_error(path + ".frame", "expected a string");
        frame = f->get<std::string>();
      }
      const Mat3& r = obs.obstacle.pose.rotation;
      if (frame == "local") {
        obs.obstacle.sigma_local = cov;
      } else if (frame == "world") {
        const Mat3 local = r.transpose() * cov * r;
        obs.obstacle.sigma_local = 0.5 * (local + local.transpose());
      } else {
        detail::field_error(path + ".frame", "expected \"local\" or \"world\"");
      }
      scene.obstacles.push_back(std::move(obs));
    }
  }
  validate_scene(scene, tol);
  return scene;
}

inline Scene load_scene(const std::string& path,
                        const Tolerances& tol = Tolerances{}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scene(buf.str(), tol);
}

/// Writes the scene document; covariances are emitted in the local frame.
inline std::string serialize_scene(const Scene& scene) {
  using detail::json;
  json doc;
  doc["version"] = std::string(kSceneVersion);
  doc["links"] = json::array();
  for (const SceneLink& link : scene.links) {
    doc["links"].push_back({{"name", link.name},
                            {"shape", detail::shape_to_json(link.shape)},
                            {"pose", detail::pose_to_json(link.pose)}});
  }
  doc["obstacles"] = json::array();
  for (const SceneObstacle& obs : scene.obstacles) {
    doc["obstacles"].push_back(
        {{"name", obs.name},
         {"shape", detail::shape_to_json(obs.obstacle.nominal)},
         {"pose", detail::pose_to_json(obs.obstacle.pose)},
         {"covariance", detail::mat3_to_json(obs.obstacle.sigma_local)},
         {"frame", "local"}});
  }
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Generators.

struct RingOptions {
  ConvexBody link_shape = Box{Vec3(0.1, 0.1, 0.1)};
  Mat3 sigma = 0.01 * Mat3::Identity();
};

/// `n_links` copies of the link shape at equal angles on a circle of
/// `radius` in the xy-plane, each turned to face the obstacle at the origin.
inline Scene gen_ring_scene(const ConvexBody& center_obstacle, int n_links,
                            double radius, const RingOptions& options = {}) {
  if (n_links < 1) {
    throw Error(ErrorCode::kInvalidArgument, "ring needs at least one link");
  }
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorCode::kInvalidArgument, "ring radius must be > 0");
  }
  Scene scene;
  for (int i = 0; i < n_links; ++i) {
    const double angle = 2.0 * std::numbers::pi * i / n_links;
    SceneLink link;
    link.name = "link" + std::to_string(i);
    link.shape = options.link_shape;
    link.pose.rotation = axis_angle(Vec3::UnitZ(), angle);
    link.pose.translation = {radius * std::cos(angle), radius * std::sin(angle), 0.0};
    scene.links.push_back(std::move(link));
  }
  SceneObstacle obs;
  obs.name = "obstacle";
  obs.obstacle.nominal = center_obstacle;
  obs.obstacle.sigma_local = options.sigma;
  scene.obstacles.push_back(std::move(obs));
  return scene;
}

/// Appends copies of the first obstacle turned about z by 2 pi j / count, so
/// the scene holds `count` obstacles of equal difficulty.
inline Scene replicate_obstacle(Scene scene, int count) {
  if (scene.obstacles.empty() || count < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "replicate_obstacle needs an obstacle and count >= 1");
  }
  const SceneObstacle base = scene.obstacles.front();
  scene.obstacles.resize(1);
  for (int j = 1; j < count; ++j) {
    SceneObstacle copy = base;
    copy.name = base.name + "_" + std::to_string(j);
    copy.obstacle.pose.rotation =
        axis_angle(Vec3::UnitZ(), 2.0 * std::numbers::pi * j / count) *
        base.obstacle.pose.rotation;
    scene.obstacles.push_back(std::move(copy));
  }
  return scene;
}

/// Multiplies every obstacle covariance by `alpha`; geometry is untouched.
inline Scene scale_covariances(Scene scene, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::kInvalidArgument, "covariance scale must be > 0");
  }
  for (SceneObstacle& obs : scene.obstacles) obs.obstacle.sigma_local *= alpha;
  return scene;
}

}  // namespace riskcert
