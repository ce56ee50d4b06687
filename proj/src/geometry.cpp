#include "slamsim/geometry.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

namespace slamsim {

namespace {

constexpr double kSmallAngle = 1e-8;

// Below this the closed forms lose more to 1-cos(theta) cancellation than the
// truncated series loses to its O(theta^6) tail.
constexpr double kSeriesAngle = 1e-2;

// Left Jacobian of SO(3): exp(w) translation coupling, V in t = V * v.
Matrix3 so3_left_jacobian(const Vector3& w) {
  const double theta = w.norm();
  const double t2 = theta * theta;
  const Matrix3 W = skew(w);
  double a, b;
  if (theta < kSeriesAngle) {
    a = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
    b = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0;
  } else {
    a = (1.0 - std::cos(theta)) / t2;
    b = (theta - std::sin(theta)) / (t2 * theta);
  }
  return Matrix3::Identity() + a * W + b * W * W;
}

Matrix3 so3_left_jacobian_inverse(const Vector3& w) {
  const double theta = w.norm();
  const double t2 = theta * theta;
  const Matrix3 W = skew(w);
  double c;
  if (theta < kSeriesAngle) {
    c = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
  } else {
    const double half = 0.5 * theta;
    c = (1.0 - half * std::cos(half) / std::sin(half)) / t2;
  }
  return Matrix3::Identity() - 0.5 * W + c * W * W;
}

}  // namespace

Matrix3 skew(const Vector3& v) {
  Matrix3 m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

Rotation Rotation::exp(const Vector3& rotvec) {
  const double theta = rotvec.norm();
  double scale;  // sin(theta/2) / theta
  if (theta < kSmallAngle) {
    scale = 0.5 - theta * theta / 48.0;  // sin has no cancellation; guard 0/0 only
  } else {
    scale = std::sin(0.5 * theta) / theta;
  }
  const Vector3 v = scale * rotvec;
  return Rotation(Eigen::Quaterniond(std::cos(0.5 * theta), v.x(), v.y(), v.z()));
}

Vector3 Rotation::log() const {
  const Eigen::Quaterniond q = canonical_quaternion();
  const Vector3 vec(q.x(), q.y(), q.z());
  const double nv = vec.norm();
  const double theta = 2.0 * std::atan2(nv, q.w());
  if (nv < kSmallAngle) {
    return (2.0 / q.w()) * vec;
  }
  return (theta / nv) * vec;
}

double Rotation::angle() const {
  const Eigen::Quaterniond q = canonical_quaternion();
  return 2.0 * std::atan2(Vector3(q.x(), q.y(), q.z()).norm(), q.w());
}

std::array<double, 7> Pose3::to_array() const {
  const Eigen::Quaterniond q = rotation.canonical_quaternion();
  return {q.w(), q.x(), q.y(), q.z(), translation.x(), translation.y(), translation.z()};
}

Pose3 Pose3::from_array(const std::array<double, 7>& a) {
  return Pose3(Rotation(Eigen::Quaterniond(a[0], a[1], a[2], a[3])), Vector3(a[4], a[5], a[6]));
}

InformationMatrix::InformationMatrix(const Matrix6& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (((m - m.transpose()).cwiseAbs().maxCoeff()) > 1e-12 * scale) {
    throw std::invalid_argument("information matrix not symmetric");
  }
  m_ = 0.5 * (m + m.transpose());
  Eigen::LLT<Matrix6> llt(m_);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("non-SPD information");
  }
  llt_ = llt.matrixL();
}

InformationMatrix InformationMatrix::identity(double scale) {
  return InformationMatrix(scale * Matrix6::Identity());
}

InformationMatrix InformationMatrix::diagonal(double rot_info, double trans_info) {
  Vector6 d;
  d << rot_info, rot_info, rot_info, trans_info, trans_info, trans_info;
  return InformationMatrix(d.asDiagonal());
}

InformationMatrix InformationMatrix::from_stddevs(double rot_std, double trans_std) {
  return diagonal(1.0 / (rot_std * rot_std), 1.0 / (trans_std * trans_std));
}

Pose3 compose(const Pose3& a, const Pose3& b) {
  return Pose3(a.rotation * b.rotation, a.rotation * b.translation + a.translation);
}

Pose3 inverse(const Pose3& p) {
  const Rotation rinv = p.rotation.inverse();
  return Pose3(rinv, -(rinv * p.translation));
}

Pose3 between(const Pose3& a, const Pose3& b) { return compose(inverse(a), b); }

Pose3 exp(const Twist& xi) {
  return Pose3(Rotation::exp(xi.rotvec), so3_left_jacobian(xi.rotvec) * xi.transvec);
}

Twist log(const Pose3& p) {
  if (p.rotation.angle() >= M_PI - 1e-6) {
    throw std::domain_error("log branch singularity");
  }
  const Vector3 w = p.rotation.log();
  return Twist(w, so3_left_jacobian_inverse(w) * p.translation);
}

double rotation_angle(const Pose3& p) { return p.rotation.angle(); }

double translation_norm(const Pose3& p) { return p.translation.norm(); }

Twist sample_twist_noise(const InformationMatrix& info, Rng& rng) {
  Vector6 z;
  for (int i = 0; i < 6; ++i) z[i] = rng.normal();
  // x = L^-T z has covariance (L L^T)^-1 = info^-1.
  const Vector6 x = info.cholesky_lower().transpose().triangularView<Eigen::Upper>().solve(z);
  return Twist::from_vector(x);
}

}  // namespace slamsim
