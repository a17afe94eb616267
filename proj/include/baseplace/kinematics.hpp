#pragma once
// Serial-arm kinematics on standard (distal) Denavit-Hartenberg parameters.
//
// Link transform i: Rz(theta_i + theta_offset_i) * Tz(d_i) * Tx(a_i) * Rx(alpha_i)
// for revolute joints; prismatic joints add the joint value to d_i instead.
//
// Arms of the "elbow manipulator with spherical wrist" family are solved in
// closed form (up to 8 branches). Every other model falls back to damped
// least squares from a fixed set of seeds.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "baseplace/core.hpp"

namespace baseplace {

enum class JointKind { Revolute, Prismatic };

struct JointSpec {
  JointKind kind = JointKind::Revolute;
  double a = 0.0;
  double alpha = 0.0;
  double d = 0.0;
  double theta_offset = 0.0;
  double q_min = -kPi;
  double q_max = kPi;

  double mid() const { return 0.5 * (q_min + q_max); }
  double half_range() const { return 0.5 * (q_max - q_min); }
};

using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

class KinematicModel {
 public:
  KinematicModel(std::string name, std::vector<JointSpec> joints,
                 double base_height = 0.0);

  const std::string& name() const { return name_; }
  const std::vector<JointSpec>& joints() const { return joints_; }
  int dof() const { return static_cast<int>(joints_.size()); }
  double base_height() const { return base_height_; }
  KinematicModel with_base_height(double h) const;

  JointConfig q_mid() const;
  bool within_limits(const JointConfig& q) const;
  /// True when the arm matches the elbow + spherical-wrist layout.
  bool has_closed_form() const { return closed_form_; }

 private:
  std::string name_;
  std::vector<JointSpec> joints_;
  double base_height_ = 0.0;
  bool closed_form_ = false;
};

struct IkSolution {
  JointConfig q;
  int branch_id = 0;
};

enum class IkMethod { Auto, ClosedForm, Numeric };

/// Frame origins and z-axes of frames 0..n, plus the end-effector transform.
struct FrameChain {
  std::vector<Eigen::Matrix4d> frames;  // frames[0] = identity, frames[n] = EE
};

FrameChain frame_chain(const KinematicModel& m, const JointConfig& q);
Pose forward_kinematics(const KinematicModel& m, const JointConfig& q);
Eigen::Matrix4d forward_transform(const KinematicModel& m, const JointConfig& q);

/// Geometric Jacobian at the end-effector origin, base frame.
/// Rows 0-2 linear velocity, rows 3-5 angular velocity.
Jacobian jacobian(const KinematicModel& m, const JointConfig& q);

/// All distinct in-limit solutions, ordered by branch id. Empty when the
/// target is unreachable. The target is expressed in the robot base frame.
std::vector<IkSolution> inverse_kinematics(const KinematicModel& m, const Pose& target,
                                           IkMethod method = IkMethod::Auto);

/// Position error [m] and orientation error [rad] of FK(q) against a target.
std::pair<double, double> pose_error(const KinematicModel& m, const JointConfig& q,
                                     const Pose& target);

// Shipped reference arm: 6R elbow manipulator with a spherical wrist.
KinematicModel reference_arm();
/// FK of the reference arm at q = 0.
Pose reference_home_pose();

// Model document: {name, convention: "dh-standard", base_height, joints[]}.
nlohmann::json model_to_json(const KinematicModel& m);
KinematicModel model_from_json(const nlohmann::json& j);
KinematicModel load_model(const std::filesystem::path& path);

}  // namespace baseplace
