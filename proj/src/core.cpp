#include "baseplace/core.hpp"

#include <cmath>

namespace baseplace {

double wrap_angle(double a) {
  if (a > -kPi && a <= kPi) return a;
  double w = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

Quat canonicalize(const Quat& q) {
  Quat n = q.normalized();
  if (n.w() < 0.0) n.coeffs() = -n.coeffs();
  return n;
}

Transform Pose::transform() const {
  Transform t = Transform::Identity();
  t.linear() = r_.toRotationMatrix();
  t.translation() = p_;
  return t;
}

Pose Pose::from_transform(const Transform& t) {
  return Pose(t.translation(), Quat(t.rotation()));
}

RotVec quat_to_rotvec(const Quat& r) {
  const Quat q = canonicalize(r);
  const Vec3 v = q.vec();
  const double s = v.norm();
  if (s < 1e-12) {
    // angle ~ 2s, first order is exact to machine precision here
    return RotVec(v * (2.0 / q.w()));
  }
  const double angle = 2.0 * std::atan2(s, q.w());
  return RotVec(v * (angle / s));
}

Quat rotvec_to_quat(const RotVec& w) {
  const double angle = w.angle();
  Quat q;
  if (angle < 1e-8) {
    q.w() = 1.0 - angle * angle / 8.0;
    q.vec() = w.value * (0.5 - angle * angle / 48.0);
  } else {
    q.w() = std::cos(0.5 * angle);
    q.vec() = w.value * (std::sin(0.5 * angle) / angle);
  }
  return canonicalize(q);
}

Transform base_to_world(const BasePose& b, double base_height) {
  Transform t = Transform::Identity();
  t.linear() = Eigen::AngleAxisd(b.theta, Vec3::UnitZ()).toRotationMatrix();
  t.translation() = Vec3(b.x, b.y, base_height);
  return t;
}

Pose express_in_base(const BasePose& b, double base_height, const Pose& target) {
  const Transform world_from_base = base_to_world(b, base_height);
  const Mat3 rt = world_from_base.linear().transpose();
  const Vec3 p = rt * (target.position() - world_from_base.translation());
  const Quat yaw(Eigen::AngleAxisd(-b.theta, Vec3::UnitZ()));
  return Pose(p, yaw * target.orientation());
}

double rotation_distance(const Quat& a, const Quat& b) {
  const Quat d = a.normalized().conjugate() * b.normalized();
  return 2.0 * std::atan2(d.vec().norm(), std::abs(d.w()));
}

Vec3 rotation_error(const Mat3& r_to, const Mat3& r_from) {
  const Eigen::AngleAxisd aa(r_to * r_from.transpose());
  return aa.axis() * aa.angle();
}

}  // namespace baseplace
