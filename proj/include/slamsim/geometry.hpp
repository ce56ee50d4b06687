#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <array>

#include "slamsim/rng.hpp"

namespace slamsim {

using Vector3 = Eigen::Vector3d;
using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix3 = Eigen::Matrix3d;
using Matrix6 = Eigen::Matrix<double, 6, 6>;

// Unit-quaternion rotation. Renormalized after every construction and
// composition so long simulation chains never drift off the manifold.
class Rotation {
 public:
  Rotation() : q_(1.0, 0.0, 0.0, 0.0) {}
  explicit Rotation(const Eigen::Quaterniond& q) : q_(q.normalized()) {}

  static Rotation identity() { return Rotation(); }
  static Rotation from_matrix(const Matrix3& m) { return Rotation(Eigen::Quaterniond(m)); }
  // Axis-angle exponential.
  static Rotation exp(const Vector3& rotvec);
  static Rotation yaw(double angle) { return exp(Vector3(0.0, 0.0, angle)); }

  Matrix3 matrix() const { return q_.toRotationMatrix(); }
  Rotation inverse() const { return Rotation(q_.conjugate()); }
  Rotation operator*(const Rotation& other) const { return Rotation(q_ * other.q_); }
  Vector3 operator*(const Vector3& v) const { return q_ * v; }

  // Principal-branch rotation vector; angle() is guaranteed in [0, pi].
  Vector3 log() const;
  double angle() const;

  // Quaternion with the sign convention qw >= 0 used by all serialization.
  Eigen::Quaterniond canonical_quaternion() const {
    return q_.w() < 0.0 ? Eigen::Quaterniond(-q_.w(), -q_.x(), -q_.y(), -q_.z()) : q_;
  }

 private:
  Eigen::Quaterniond q_;
};

// Rigid transform in SE(3).
struct Pose3 {
  Rotation rotation;
  Vector3 translation = Vector3::Zero();

  Pose3() = default;
  Pose3(const Rotation& r, const Vector3& t) : rotation(r), translation(t) {}

  static Pose3 identity() { return Pose3(); }

  Vector3 operator*(const Vector3& p) const { return rotation * p + translation; }

  // Log serialization order: qw qx qy qz tx ty tz, quaternion canonical.
  std::array<double, 7> to_array() const;
  static Pose3 from_array(const std::array<double, 7>& a);
};

// Tangent-space coordinates of SE(3), ordered (rotation, translation).
// The same ordering is used by residuals, Jacobians and information matrices.
struct Twist {
  Vector3 rotvec = Vector3::Zero();
  Vector3 transvec = Vector3::Zero();

  Twist() = default;
  Twist(const Vector3& r, const Vector3& t) : rotvec(r), transvec(t) {}

  Vector6 vector() const {
    Vector6 v;
    v << rotvec, transvec;
    return v;
  }
  static Twist from_vector(const Vector6& v) { return Twist(v.head<3>(), v.tail<3>()); }
  double norm() const { return vector().norm(); }
};

// 6x6 symmetric positive-definite weight in twist coordinates
// (rad^-2 on the rotation block, m^-2 on the translation block).
class InformationMatrix {
 public:
  // Validates symmetry and positive-definiteness (via Cholesky), then
  // stores the symmetrized matrix.
  explicit InformationMatrix(const Matrix6& m);

  static InformationMatrix identity(double scale = 1.0);
  // diag(rot_info x3, trans_info x3)
  static InformationMatrix diagonal(double rot_info, double trans_info);
  // Isotropic information from scalar standard deviations.
  static InformationMatrix from_stddevs(double rot_std, double trans_std);

  const Matrix6& matrix() const { return m_; }
  // Lower-triangular Cholesky factor L with m = L * L^T.
  const Matrix6& cholesky_lower() const { return llt_; }

 private:
  Matrix6 m_;
  Matrix6 llt_;
};

Pose3 compose(const Pose3& a, const Pose3& b);
Pose3 inverse(const Pose3& p);
// Relative pose a^-1 * b; compose(a, between(a, b)) == b.
Pose3 between(const Pose3& a, const Pose3& b);

// SE(3) exponential: rotation by Rodrigues, translation through the left
// Jacobian of SO(3), matching the 4x4 matrix exponential of the twist.
Pose3 exp(const Twist& xi);
// Principal-branch inverse of exp. Throws std::domain_error
// ("log branch singularity") when the rotation angle is within 1e-6 of pi.
Twist log(const Pose3& p);

double rotation_angle(const Pose3& p);
double translation_norm(const Pose3& p);

// Zero-mean Gaussian twist with covariance info^-1; deterministic given the
// generator state. Throws std::invalid_argument via InformationMatrix if the
// matrix is not SPD.
Twist sample_twist_noise(const InformationMatrix& info, Rng& rng);

// [v]x cross-product matrix.
Matrix3 skew(const Vector3& v);

}  // namespace slamsim
