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

#include <cmath>
#include <string>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include "riskcert/error.hpp"

namespace riskcert {

// All lengths are meters, all covariances m^2.
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Validation thresholds for matrices entering the library.
struct Tolerances {
  double symmetry = 1e-9;
  double orthonormality = 1e-9;
  double min_eigenvalue = -1e-12;
  double membership = 1e-9;
};

inline bool all_finite(const Vec3& v) { return v.allFinite(); }

inline void require_finite(const Vec3& v, const char* what) {
  if (!v.allFinite()) {
    throw Error(ErrorCode::kNonFinite, std::string(what) + " is not finite");
  }
}

/// Throws unless `sigma` is finite, symmetric and positive semi-definite.
inline void validate_covariance(const Mat3& sigma,
                                const Tolerances& tol = Tolerances{}) {
  if (!sigma.allFinite()) {
    throw Error(ErrorCode::kNonFinite, "covariance has non-finite entries");
  }
  const double asym = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol.symmetry) {
    throw Error(ErrorCode::kAsymmetricMatrix,
                "covariance asymmetry " + std::to_string(asym));
  }
  const Mat3 sym = 0.5 * (sigma + sigma.transpose());
  Eigen::SelfAdjointEigenSolver<Mat3> solver(sym, Eigen::EigenvaluesOnly);
  const double min_eig = solver.eigenvalues().minCoeff();
  if (min_eig < tol.min_eigenvalue) {
    throw Error(ErrorCode::kNonPsdCovariance,
                "covariance has eigenvalue " + std::to_string(min_eig));
  }
}

/// Throws unless `rotation` is a proper rotation (R^T R = I, det R = +1).
inline void validate_rotation(const Mat3& rotation,
                              const Tolerances& tol = Tolerances{}) {
  if (!rotation.allFinite()) {
    throw Error(ErrorCode::kNonFinite, "rotation has non-finite entries");
  }
  const double ortho =
      (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  const double det = rotation.determinant();
  if (ortho > tol.orthonormality || std::abs(det - 1.0) > tol.orthonormality) {
    throw Error(ErrorCode::kNonOrthonormalRotation,
                "rotation deviates from SO(3) (|R^T R - I| = " +
                    std::to_string(ortho) + ", det = " + std::to_string(det) +
                    ")");
  }
}

/// Rigid placement: world = rotation * local + translation.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return Pose{}; }
  static Pose translated(const Vec3& t) { return Pose{Mat3::Identity(), t}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  bool operator==(const Pose& other) const {
    return rotation == other.rotation && translation == other.translation;
  }
};

inline void validate_pose(const Pose& pose,
                          const Tolerances& tol = Tolerances{}) {
  validate_rotation(pose.rotation, tol);
  require_finite(pose.translation, "pose translation");
}

/// Right-handed rotation by `angle` radians about `axis` (need not be unit).
inline Mat3 axis_angle(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

}  // namespace riskcert
