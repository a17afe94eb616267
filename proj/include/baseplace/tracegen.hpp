#pragma once
// Synthetic operators: end-effector pose streams with planted working
// patterns (preferred voxels and per-voxel orientation modes).

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "baseplace/pattern.hpp"

namespace baseplace {

struct OrientationMode {
  RotVec mean;
  double sigma = 0.05;  // per-axis std-dev of the rotation-vector perturbation [rad]
  double weight = 1.0;
};

struct PreferredVoxel {
  Vec3 center = Vec3::Zero();
  double weight = 1.0;  // relative visit weight
  std::vector<OrientationMode> modes;
};

struct OperatorProfile {
  std::string name = "operator";
  std::string arm = "R";
  std::vector<PreferredVoxel> voxels;
  double dwell = 10.0;           // mean samples per visit (geometric, >= 1)
  double transit_noise = 0.002;  // positional jitter std-dev [m], truncated at 3 sigma
  double sample_period = 0.01;   // seconds between trace records

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Visits voxels with probability proportional to their weight and dwells
/// for a geometric number of samples. Each sample draws its orientation
/// from the voxel's mode mixture. Positions are clamped into the workspace.
std::vector<Pose> generate_traces(const OperatorProfile& profile, const Workspace& w,
                                  std::size_t n_samples, std::uint64_t seed);

/// Profile over `modes_per_voxel.size()` distinct random grid voxels, voxel
/// i carrying modes_per_voxel[i] modes with pairwise separation of at least
/// `separation` radians and angles at most `max_angle`.
OperatorProfile planted_profile(const Workspace& w, const std::vector<int>& modes_per_voxel,
                                double sigma, std::uint64_t seed, double separation = 0.8,
                                double max_angle = 2.0);

/// Two operators sharing one voxel with disjoint orientation habits
/// (two modes versus three).
std::pair<OperatorProfile, OperatorProfile> shared_voxel_volunteers(const Workspace& w);

nlohmann::json profile_to_json(const OperatorProfile& p);
OperatorProfile profile_from_json(const nlohmann::json& j);

}  // namespace baseplace
