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

#pragma once

#include <set>
#include <string>
#include <vector>

#include "riskcert/convex.hpp"
#include "riskcert/error.hpp"
#include "riskcert/geometry.hpp"
#include "riskcert/shadow.hpp"

namespace riskcert {

/// A rigid robot link: local convex shape placed by `pose`.
struct SceneLink {
  std::string name;
  ConvexBody shape;
  Pose pose;

  ConvexBody body() const { return PosedNode{shape, pose}; }
  bool operator==(const SceneLink&) const = default;
};

struct SceneObstacle {
  std::string name;
  UncertainObstacle obstacle;

  bool operator==(const SceneObstacle& o) const {
    return name == o.name && obstacle.nominal == o.obstacle.nominal &&
           obstacle.pose == o.obstacle.pose &&
           obstacle.sigma_local == o.obstacle.sigma_local;
  }
};

struct Scene {
  std::vector<SceneLink> links;
  std::vector<SceneObstacle> obstacles;

  /// World-placed link bodies, in scene order.
  std::vector<ConvexBody> link_bodies() const {
    std::vector<ConvexBody> out;
    out.reserve(links.size());
    for (const SceneLink& link : links) out.push_back(link.body());
    return out;
  }

  bool operator==(const Scene&) const = default;
};

/// Checks unique names, valid poses and PSD covariances.
inline void validate_scene(const Scene& scene,
                           const Tolerances& tol = Tolerances{}) {
  std::set<std::string> names;
  auto claim = [&names](const std::string& name) {
    if (!names.insert(name).second) {
      throw Error(ErrorCode::kDuplicateName, "duplicate name '" + name + "'");
    }
  };
  auto named = [](const char* what, const std::string& name, auto&& check) {
    try {
      check();
    } catch (const Error& e) {
      throw Error(e.code(), std::string(what) + " '" + name + "': " + e.message());
    }
  };
  for (const SceneLink& link : scene.links) {
    claim(link.name);
    named("link", link.name, [&] { validate_pose(link.pose, tol); });
  }
  for (const SceneObstacle& obs : scene.obstacles) {
    claim(obs.name);
    named("obstacle", obs.name, [&] { validate_obstacle(obs.obstacle, tol); });
  }
}

}  // namespace riskcert
