#pragma once
// Working-pattern analysis: voxel occupancy of the end-effector and
// mean-shift clustering of the orientations adopted inside each voxel.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "baseplace/core.hpp"

namespace baseplace {

/// Axis-aligned box split into cubic voxels. Dimensions that are not an
/// integer multiple of the voxel size are padded up to the next multiple.
class Workspace {
 public:
  Workspace(const Vec3& origin, const Vec3& dims, double voxel_size);

  const Vec3& origin() const { return origin_; }
  const Vec3& dims() const { return dims_; }
  double voxel_size() const { return voxel_; }
  bool padded() const { return padded_; }
  /// Voxel counts along x, y, z.
  const std::array<int, 3>& counts() const { return counts_; }
  int voxel_count() const { return counts_[0] * counts_[1] * counts_[2]; }

  /// Row-major id, x slowest. -1 when outside.
  int voxel_of(const Vec3& p) const;
  Vec3 center(int id) const;
  std::array<int, 3> index(int id) const;

 private:
  Vec3 origin_;
  Vec3 dims_;
  double voxel_;
  std::array<int, 3> counts_{};
  bool padded_ = false;
};

struct VoxelStats {
  int id = 0;
  Vec3 center = Vec3::Zero();
  std::size_t visit_count = 0;
  std::vector<RotVec> orientation_samples;
};

struct VoxelGrid {
  std::vector<VoxelStats> voxels;  // one per voxel, indexed by id
  std::size_t total_samples = 0;
  std::size_t out_of_workspace = 0;
  std::size_t filtered = 0;  // dropped by the minimum-displacement filter

  std::size_t voxels_visited() const;
};

/// Bins every sample into the half-open voxel grid. A sample on a shared
/// face goes to the higher-index voxel. With min_displacement > 0,
/// consecutive samples that moved less than that distance are skipped.
VoxelGrid voxelize(std::span<const Pose> traces, const Workspace& w,
                   double min_displacement = 0.0);

struct OrientationCluster {
  RotVec mode;
  std::size_t member_count = 0;
  std::vector<std::size_t> members;  // indices into the input samples
};

/// Flat-kernel mean-shift. Modes within bandwidth/2 of a stronger mode are
/// merged into it. Clusters come sorted by size (descending), then by mode
/// in lexicographic order. Independent of input order.
std::vector<OrientationCluster> mean_shift(std::span<const RotVec> samples, double bandwidth);

/// Mean silhouette coefficient of a labeling with Euclidean distances.
/// Members of singleton clusters contribute 0. Returns -1 for fewer than
/// two clusters.
double silhouette_score(std::span<const RotVec> samples, std::span<const int> labels);

/// Candidate bandwidth with the best silhouette of its mean-shift labeling.
double select_bandwidth(std::span<const RotVec> samples, std::span<const double> candidates);

struct PatternConfig {
  std::vector<double> bandwidths = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  double min_cluster_fraction = 0.01;
  std::size_t min_cluster_floor = 3;
  std::size_t min_visits = 1;
  /// Emit entries for unvisited voxels (needed when the unvisited weight > 0).
  bool include_unvisited = false;
};

struct RepresentativeEntry {
  int voxel_id = 0;
  Vec3 center = Vec3::Zero();
  RotVec rotvec;
  bool visited = true;
  std::size_t visit_count = 0;
  double bandwidth = 0.0;  // selected bandwidth, 0 for unvisited entries

  Pose pose() const { return Pose(center, rotvec_to_quat(rotvec)); }
};

struct RepresentativeSet {
  std::vector<RepresentativeEntry> entries;
  std::size_t total_samples = 0;
  std::size_t out_of_workspace = 0;
  std::size_t voxels_visited = 0;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

/// Cluster size floor for a voxel holding n samples.
std::size_t min_cluster_size(std::size_t n, const PatternConfig& cfg);

RepresentativeSet representative_poses(const VoxelGrid& grid, const Workspace& w,
                                       const PatternConfig& cfg);

}  // namespace baseplace
