#pragma once
// Base-pose scores: joint margin, manipulability, and their weighted sum
// over the representative set.

#include <cstddef>
#include <vector>

#include "baseplace/kinematics.hpp"
#include "baseplace/pattern.hpp"

namespace baseplace {

/// Non-negative per-joint weights, normalized to sum 1.
class JointWeights {
 public:
  static JointWeights uniform(int n);
  explicit JointWeights(std::vector<double> w);

  const std::vector<double>& values() const { return w_; }
  int size() const { return static_cast<int>(w_.size()); }
  double operator[](int i) const { return w_[i]; }

 private:
  std::vector<double> w_;
};

struct ManipulabilityScore {
  double linear = 0.0;
  double angular = 0.0;
  double total() const { return linear + angular; }
};

struct PoseScore {
  double jm = 0.0;
  double lm = 0.0;
  double am = 0.0;
  bool feasible = false;
  int branch_id = -1;

  double m() const { return lm + am; }
  double total() const { return jm + m(); }
};

struct EntryScore {
  std::size_t entry = 0;
  PoseScore score;
  double weight = 0.0;
};

struct FinalScore {
  double value = 0.0;
  std::vector<EntryScore> per_entry;
};

struct JointMarginResult {
  double score = 0.0;
  bool clamped = false;  // some joint sat outside its limits
};

/// Weighted mean of 1 - |q - q_mid| / half_range over the joints.
JointMarginResult joint_margin(const JointConfig& q, const KinematicModel& m,
                               const JointWeights& w);
double joint_margin_score(const JointConfig& q, const KinematicModel& m, const JointWeights& w);

/// Inverse square-root eigenvalue ratio of J_v J_v^T and J_w J_w^T.
/// A block with smallest eigenvalue below 1e-12 scores 0.
ManipulabilityScore manipulability_score(const Jacobian& j);

/// Scores a single representative pose from a base placement using the IK
/// branch with the highest jm + m (lowest branch id on ties).
PoseScore pose_score(const KinematicModel& m, const BasePose& base, const Pose& entry,
                     const JointWeights& w);

/// Sum of w_voxel * (jm + m) over the set; w_voxel = 1 for visited voxels
/// and alpha otherwise. alpha = 0 skips unvisited entries.
FinalScore final_score(const KinematicModel& m, const BasePose& base,
                       const RepresentativeSet& set, double alpha, const JointWeights& w);
double final_score_value(const KinematicModel& m, const BasePose& base,
                         const RepresentativeSet& set, double alpha, const JointWeights& w);

}  // namespace baseplace
