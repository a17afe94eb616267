#pragma once
// Rigid-body primitives shared by the whole pipeline: end-effector poses,
// rotation vectors, planar base poses and the conversions between them.

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace baseplace {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;
using Transform = Eigen::Isometry3d;
using JointConfig = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// Unit quaternion with non-negative scalar part. Renormalizes its input.
Quat canonicalize(const Quat& q);

/// Axis-angle product. The angle |value| lives in [0, pi].
struct RotVec {
  Vec3 value = Vec3::Zero();

  RotVec() = default;
  explicit RotVec(const Vec3& v) : value(v) {}
  RotVec(double x, double y, double z) : value(x, y, z) {}

  double angle() const { return value.norm(); }
  double operator[](int i) const { return value[i]; }
};

/// Position plus canonical unit-quaternion orientation.
class Pose {
 public:
  Pose() = default;
  Pose(const Vec3& position, const Quat& orientation)
      : p_(position), r_(canonicalize(orientation)) {}

  const Vec3& position() const { return p_; }
  const Quat& orientation() const { return r_; }

  Transform transform() const;
  static Pose from_transform(const Transform& t);

 private:
  Vec3 p_ = Vec3::Zero();
  Quat r_ = Quat::Identity();
};

/// Planar base placement: translation in the world XY plane and yaw about Z.
/// Height is a configuration scalar passed separately.
struct BasePose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  BasePose() = default;
  BasePose(double x_, double y_, double theta_)
      : x(x_), y(y_), theta(wrap_angle(theta_)) {}
};

RotVec quat_to_rotvec(const Quat& r);
Quat rotvec_to_quat(const RotVec& w);

/// Translation (X, Y, base_height) composed with yaw Theta about world Z.
Transform base_to_world(const BasePose& b, double base_height);

/// Re-expresses a world-frame target in the frame of the base.
Pose express_in_base(const BasePose& b, double base_height, const Pose& target);

/// Geodesic angle between two orientations, in [0, pi].
double rotation_distance(const Quat& a, const Quat& b);

/// Rotation vector of R_to * R_from^T expressed in the outer frame.
Vec3 rotation_error(const Mat3& r_to, const Mat3& r_from);

}  // namespace baseplace
