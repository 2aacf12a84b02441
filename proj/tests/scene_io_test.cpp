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

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"
#include "riskcert/certify.hpp"
#include "riskcert/scene_io.hpp"
#include "test_util.hpp"

namespace riskcert {
namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ErrorCode code_of(const std::string& text) {
  try {
    parse_scene(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "parsed without error: " << text.substr(0, 200);
  return ErrorCode::kInvalidArgument;
}

TEST(Parse, MinimalFixture) {
  const Scene s = load_scene(testing::fixture("minimal.json"));
  ASSERT_EQ(s.links.size(), 1u);
  ASSERT_EQ(s.obstacles.size(), 1u);
  EXPECT_EQ(s.links[0].name, "link");
  EXPECT_EQ(s.obstacles[0].obstacle.pose.translation, Vec3(1.5, 0, 0));
  EXPECT_EQ(s.obstacles[0].obstacle.sigma_local, 0.01 * Mat3::Identity());
}

TEST(Parse, AllFixturesLoad) {
  for (const char* name : {"minimal.json", "remote_obstacle.json",
                           "nominal_collision.json", "one_sided.json",
                           "three_obstacles.json"}) {
    EXPECT_NO_THROW(load_scene(testing::fixture(name))) << name;
  }
}

TEST(Parse, ReconstructedSceneCovariances) {
  const Scene s = load_scene(testing::fixture("three_obstacles.json"));
  ASSERT_EQ(s.obstacles.size(), 3u);
  EXPECT_EQ(s.obstacles[0].obstacle.sigma_local, 0.01 * Mat3::Identity());
  const Mat3& yellow = s.obstacles[1].obstacle.sigma_local;
  EXPECT_NEAR(yellow(0, 0) * yellow(1, 1) - yellow(0, 1) * yellow(1, 0), 1e-4, 1e-15);
  EXPECT_GT(yellow.determinant(), 0.0);
  EXPECT_EQ(s.obstacles[2].obstacle.sigma_local,
            Mat3(Vec3(0.001, 0.001, 0.05).asDiagonal()));
}

TEST(Parse, WorldFrameCovarianceIsStoredLocally) {
  const std::string text = R"({"obstacles": [{"name": "o",
      "shape": {"kind": "sphere", "radius": 0.1},
      "pose": {"rotation": [[0,-1,0],[1,0,0],[0,0,1]]},
      "covariance": [[1,0,0],[0,2,0],[0,0,3]], "frame": "world"}]})";
  const Scene s = parse_scene(text);
  EXPECT_LT((s.obstacles[0].obstacle.sigma_local - Mat3(Vec3(2, 1, 3).asDiagonal()))
                .cwiseAbs()
                .maxCoeff(),
            1e-15);
  EXPECT_LT((sigma_world(s.obstacles[0].obstacle) - Mat3(Vec3(1, 2, 3).asDiagonal()))
                .cwiseAbs()
                .maxCoeff(),
            1e-15);
}

TEST(Parse, SixDigitRotationsAreProjected) {
  const Scene s = load_scene(testing::fixture("three_obstacles.json"));
  const Mat3& r = s.links[2].pose.rotation;
  EXPECT_LT((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(r(0, 2), 0.258819, 1e-6);
}

TEST(Parse, EmptyDocumentIsAnEmptyScene) {
  const Scene s = parse_scene("{}");
  EXPECT_TRUE(s.links.empty());
  EXPECT_TRUE(s.obstacles.empty());
}

TEST(Errors, DistinctCodes) {
  const json golden = json::parse(read_file(testing::fixture("minimal.json")));
  auto mutate = [&](auto&& edit) {
    json j = golden;
    edit(j);
    return j.dump();
  };
  EXPECT_EQ(code_of(mutate([](json& j) {
              j["obstacles"][0]["covariance"] = {{1, 2, 0}, {2, 1, 0}, {0, 0, 1}};
            })),
            ErrorCode::kNonPsdCovariance);
  EXPECT_EQ(code_of(mutate([](json& j) {
              j["obstacles"][0]["covariance"] = {{1, 0.5, 0}, {0, 1, 0}, {0, 0, 1}};
            })),
            ErrorCode::kAsymmetricMatrix);
  EXPECT_EQ(code_of(mutate([](json& j) { j["links"][0]["shape"]["kind"] = "torus"; })),
            ErrorCode::kUnknownShape);
  EXPECT_EQ(code_of(mutate([](json& j) { j["obstacles"][0]["name"] = "link"; })),
            ErrorCode::kDuplicateName);
  EXPECT_EQ(code_of(mutate([](json& j) {
              j["links"][0]["pose"] = {{"rotation", {{1, 0, 0}, {0, 1, 0}, {0, 0, 2}}}};
            })),
            ErrorCode::kNonOrthonormalRotation);
  EXPECT_EQ(code_of(mutate([](json& j) {
              j["links"][0]["pose"] = {{"rotation", {{1, 0, 0}, {0, 1, 0}, {0, 0, -1}}}};
            })),
            ErrorCode::kNonOrthonormalRotation);
  EXPECT_EQ(code_of(mutate([](json& j) { j["version"] = "riskcert-scene/2"; })),
            ErrorCode::kUnsupportedVersion);
  EXPECT_EQ(code_of(mutate([](json& j) { j["obstacles"][0].erase("covariance"); })),
            ErrorCode::kInvalidField);
  EXPECT_EQ(code_of(mutate([](json& j) { j["obstacles"][0]["shape"]["radius"] = -1; })),
            ErrorCode::kInvalidField);
  EXPECT_EQ(code_of(mutate([](json& j) { j["obstacles"][0]["frame"] = "body"; })),
            ErrorCode::kInvalidField);
  EXPECT_EQ(code_of(mutate([](json& j) {
              j["links"][0]["pose"]["translation"] = {1, "x", 0};
            })),
            ErrorCode::kInvalidField);
}

TEST(Errors, SyntaxErrorCarriesPosition) {
  try {
    parse_scene("{\n  \"links\": [\n    {\"name\": }\n  ]\n}");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSyntaxError);
    EXPECT_EQ(e.line(), 3);
    EXPECT_EQ(e.column(), 14);
  }
}

TEST(Errors, MissingFileIsIoError) {
  try {
    load_scene("/nonexistent/scene.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
  }
}

TEST(RoundTrip, SerializeThenParseIsIdentity) {
  for (const char* name : {"minimal.json", "one_sided.json", "three_obstacles.json"}) {
    const Scene s = load_scene(testing::fixture(name));
    EXPECT_EQ(parse_scene(serialize_scene(s)), s) << name;
  }
  std::mt19937_64 rng(61);
  for (int t = 0; t < 50; ++t) {
    const Scene s = testing::random_scene(rng);
    const std::string text = serialize_scene(s);
    EXPECT_EQ(parse_scene(text), s);
    EXPECT_EQ(serialize_scene(parse_scene(text)), text);
  }
}

// Every single-point corruption of the golden file either still describes a
// valid scene or is rejected with a library error; nothing else escapes.
TEST(Fuzz, MutationsAreRejectedCleanly) {
  const json golden = json::parse(read_file(testing::fixture("three_obstacles.json")));
  std::vector<json::json_pointer> leaves;
  std::function<void(const json&, const json::json_pointer&)> walk =
      [&](const json& j, const json::json_pointer& at) {
        if (j.is_object()) {
          for (auto it = j.begin(); it != j.end(); ++it) walk(it.value(), at / it.key());
        } else if (j.is_array()) {
          for (std::size_t i = 0; i < j.size(); ++i) walk(j[i], at / i);
        }
        leaves.push_back(at);
      };
  walk(golden, json::json_pointer());
  const std::vector<json> replacements{json(-1.0), json(0.0), json("x"), json(nullptr),
                                       json::array(), json::object(), json(1e308),
                                       json(true)};
  int rejected = 0;
  for (const auto& ptr : leaves) {
    if (ptr.empty()) continue;
    for (const json& rep : replacements) {
      json j = golden;
      j[ptr] = rep;
      try {
        parse_scene(j.dump());
      } catch (const Error&) {
        ++rejected;
      }
    }
    json erased = golden;
    json& parent = erased[ptr.parent_pointer()];
    if (parent.is_object()) {
      parent.erase(ptr.back());
    } else {
      parent.erase(std::stoul(ptr.back()));
    }
    try {
      parse_scene(erased.dump());
    } catch (const Error&) {
      ++rejected;
    }
  }
  EXPECT_GT(rejected, 500);

  const std::string text = read_file(testing::fixture("three_obstacles.json"));
  for (std::size_t cut = 0; cut + 1 < text.size(); cut += 7) {
    EXPECT_EQ(code_of(text.substr(0, cut)), ErrorCode::kSyntaxError);
  }
}

TEST(Fuzz, InvariantBreakingMutationsAlwaysFail) {
  const json golden = json::parse(read_file(testing::fixture("three_obstacles.json")));
  std::mt19937_64 rng(62);
  for (int t = 0; t < 200; ++t) {
    json j = golden;
    const std::size_t o = rng() % j["obstacles"].size();
    const std::size_t l = rng() % j["links"].size();
    switch (t % 5) {
      case 0: {
        auto& cov = j["obstacles"][o]["covariance"];
        cov[2][2] = -0.5 - static_cast<double>(rng() % 100) / 100.0;
        EXPECT_EQ(code_of(j.dump()), ErrorCode::kNonPsdCovariance);
        break;
      }
      case 1:
        j["obstacles"][o]["covariance"][0][1] = 0.3;
        EXPECT_EQ(code_of(j.dump()), ErrorCode::kAsymmetricMatrix);
        break;
      case 2:
        j["links"][l]["name"] = j["obstacles"][o]["name"];
        EXPECT_EQ(code_of(j.dump()), ErrorCode::kDuplicateName);
        break;
      case 3:
        j["links"][l]["pose"]["rotation"] = {{1.0, 0.01, 0}, {0, 1, 0}, {0, 0, 1}};
        EXPECT_EQ(code_of(j.dump()), ErrorCode::kNonOrthonormalRotation);
        break;
      default:
        j["obstacles"][o]["shape"]["kind"] = "cone";
        EXPECT_EQ(code_of(j.dump()), ErrorCode::kUnknownShape);
        break;
    }
  }
}

TEST(Ring, LinksOnTheCircleFacingInward) {
  const Scene s = gen_ring_scene(make_box(Vec3(0.5, 0.5, 0.5)), 4, 2.0);
  ASSERT_EQ(s.links.size(), 4u);
  const Vec3 want[4] = {{2, 0, 0}, {0, 2, 0}, {-2, 0, 0}, {0, -2, 0}};
  for (int i = 0; i < 4; ++i) {
    EXPECT_LT((s.links[i].pose.translation - want[i]).norm(), 1e-12);
    EXPECT_LT((s.links[i].pose.rotation * Vec3::UnitX() - want[i] / 2.0).norm(), 1e-12);
  }
  const Scene one = gen_ring_scene(make_sphere(0.5), 1, 1.0);
  ASSERT_EQ(one.links.size(), 1u);
  EXPECT_LT((one.links[0].pose.translation - Vec3(1, 0, 0)).norm(), 1e-15);
  EXPECT_THROW(gen_ring_scene(make_sphere(0.5), 0, 1.0), Error);
  EXPECT_THROW(gen_ring_scene(make_sphere(0.5), 3, 0.0), Error);
}

TEST(Ring, RiskFallsAsRadiusGrows) {
  double prev = 2.0;
  for (double radius : {1.0, 2.0, 4.0}) {
    RingOptions opt;
    opt.sigma = 0.25 * Mat3::Identity();
    const Scene s = gen_ring_scene(make_box(Vec3(0.5, 0.5, 0.5)), 4, radius, opt);
    const double eps = certify_scene(s, Method::kOneShot).scene_bound;
    EXPECT_LT(eps, prev) << radius;
    prev = eps;
  }
}

TEST(Replicate, CopiesAreRotatedAndNamed) {
  const Scene s = replicate_obstacle(
      gen_ring_scene(make_box(Vec3(0.5, 0.5, 0.5)), 4, 2.0), 3);
  ASSERT_EQ(s.obstacles.size(), 3u);
  EXPECT_EQ(s.obstacles[1].name, "obstacle_1");
  EXPECT_NO_THROW(validate_scene(s));
}

TEST(ScaleCovariances, ScalesEveryObstacle) {
  const Scene s = load_scene(testing::fixture("three_obstacles.json"));
  EXPECT_EQ(scale_covariances(s, 1.0), s);
  const Scene x4 = scale_covariances(s, 4.0);
  for (std::size_t i = 0; i < s.obstacles.size(); ++i) {
    Eigen::SelfAdjointEigenSolver<Mat3> a(s.obstacles[i].obstacle.sigma_local);
    Eigen::SelfAdjointEigenSolver<Mat3> b(x4.obstacles[i].obstacle.sigma_local);
    EXPECT_LT((b.eigenvalues().cwiseSqrt() - 2.0 * a.eigenvalues().cwiseSqrt())
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);
    EXPECT_EQ(x4.obstacles[i].obstacle.nominal, s.obstacles[i].obstacle.nominal);
    EXPECT_EQ(x4.obstacles[i].obstacle.pose, s.obstacles[i].obstacle.pose);
  }
  EXPECT_THROW(scale_covariances(s, 0.0), Error);
}

TEST(ScaleCovariances, BoundsGrowWithAlpha) {
  const Scene s = load_scene(testing::fixture("three_obstacles.json"));
  std::vector<double> prev(s.obstacles.size(), 0.0);
  for (double alpha : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    const RiskReport r = certify_scene(scale_covariances(s, alpha), Method::kOneShot);
    for (std::size_t i = 0; i < prev.size(); ++i) {
      EXPECT_GE(r.per_obstacle[i].epsilon, prev[i]);
      prev[i] = r.per_obstacle[i].epsilon;
    }
  }
}

}  // namespace
}  // namespace riskcert
