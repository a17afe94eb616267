#include "baseplace/pattern.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "baseplace/parallel.hpp"

namespace baseplace {
namespace {

bool lex_less(const Vec3& a, const Vec3& b) {
  return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
}

}  // namespace

Workspace::Workspace(const Vec3& origin, const Vec3& dims, double voxel_size)
    : origin_(origin), dims_(dims), voxel_(voxel_size) {
  if (!(voxel_ > 0.0)) throw std::invalid_argument("workspace.voxel_size must be > 0");
  for (int i = 0; i < 3; ++i) {
    if (!(dims_[i] > 0.0)) throw std::invalid_argument("workspace.dims must be > 0 on every axis");
    const double ratio = dims_[i] / voxel_;
    int n = static_cast<int>(std::ceil(ratio - 1e-9));
    n = std::max(n, 1);
    if (std::abs(n * voxel_ - dims_[i]) > 1e-9) {
      padded_ = true;
      dims_[i] = n * voxel_;
    }
    counts_[i] = n;
  }
}

int Workspace::voxel_of(const Vec3& p) const {
  std::array<int, 3> idx{};
  for (int i = 0; i < 3; ++i) {
    double t = (p[i] - origin_[i]) / voxel_;
    // snap onto a face when rounding noise is all that separates us from it
    const double r = std::nearbyint(t);
    if (std::abs(t - r) < 1e-9) t = r;
    const double f = std::floor(t);
    if (!(f >= 0.0) || f >= counts_[i]) return -1;
    idx[i] = static_cast<int>(f);
  }
  return (idx[0] * counts_[1] + idx[1]) * counts_[2] + idx[2];
}

std::array<int, 3> Workspace::index(int id) const {
  return {id / (counts_[1] * counts_[2]), (id / counts_[2]) % counts_[1], id % counts_[2]};
}

Vec3 Workspace::center(int id) const {
  const auto idx = index(id);
  return origin_ + voxel_ * Vec3(idx[0] + 0.5, idx[1] + 0.5, idx[2] + 0.5);
}

std::size_t VoxelGrid::voxels_visited() const {
  return static_cast<std::size_t>(std::count_if(
      voxels.begin(), voxels.end(), [](const VoxelStats& v) { return v.visit_count > 0; }));
}

VoxelGrid voxelize(std::span<const Pose> traces, const Workspace& w, double min_displacement) {
  VoxelGrid g;
  g.voxels.resize(w.voxel_count());
  for (int id = 0; id < w.voxel_count(); ++id) {
    g.voxels[id].id = id;
    g.voxels[id].center = w.center(id);
  }
  g.total_samples = traces.size();
  const Vec3* last = nullptr;
  for (const Pose& pose : traces) {
    if (min_displacement > 0.0 && last &&
        (pose.position() - *last).norm() < min_displacement) {
      ++g.filtered;
      continue;
    }
    last = &pose.position();
    const int id = w.voxel_of(pose.position());
    if (id < 0) {
      ++g.out_of_workspace;
      continue;
    }
    auto& v = g.voxels[id];
    ++v.visit_count;
    v.orientation_samples.push_back(quat_to_rotvec(pose.orientation()));
  }
  return g;
}

std::vector<OrientationCluster> mean_shift(std::span<const RotVec> samples, double bandwidth) {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("mean-shift bandwidth must be > 0");
  const std::size_t n = samples.size();
  if (n == 0) return {};

  // canonical order makes every sum (and hence the result) order-independent
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return lex_less(samples[a].value, samples[b].value);
  });
  std::vector<Vec3> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = samples[order[i]].value;

  const double bw2 = bandwidth * bandwidth;
  constexpr int kMaxIterations = 300;
  std::vector<Vec3> converged(n);
  std::vector<std::size_t> intensity(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 y = pts[i];
    std::size_t count = 0;
    for (int it = 0; it < kMaxIterations; ++it) {
      Vec3 sum = Vec3::Zero();
      count = 0;
      for (const Vec3& p : pts) {
        if ((p - y).squaredNorm() <= bw2) {
          sum += p;
          ++count;
        }
      }
      const Vec3 next = sum / static_cast<double>(count);
      const double shift = (next - y).norm();
      y = next;
      if (shift < 1e-6 * bandwidth) break;
    }
    converged[i] = y;
    intensity[i] = count;
  }

  // strongest modes claim weaker ones within half a bandwidth
  std::vector<std::size_t> rank(n);
  std::iota(rank.begin(), rank.end(), 0);
  std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
    if (intensity[a] != intensity[b]) return intensity[a] > intensity[b];
    return lex_less(converged[a], converged[b]);
  });
  const double merge2 = 0.25 * bw2;
  std::vector<Vec3> modes;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t r : rank) {
    int best = -1;
    double best_d2 = merge2;
    for (std::size_t m = 0; m < modes.size(); ++m) {
      const double d2 = (converged[r] - modes[m]).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = static_cast<int>(m);
      }
    }
    if (best < 0) {
      modes.push_back(converged[r]);
      members.emplace_back();
      best = static_cast<int>(modes.size()) - 1;
    }
    members[best].push_back(order[r]);
  }

  std::vector<OrientationCluster> out(modes.size());
  for (std::size_t m = 0; m < modes.size(); ++m) {
    std::sort(members[m].begin(), members[m].end());
    out[m].mode = RotVec(modes[m]);
    out[m].member_count = members[m].size();
    out[m].members = std::move(members[m]);
  }
  std::stable_sort(out.begin(), out.end(), [](const OrientationCluster& a,
                                              const OrientationCluster& b) {
    if (a.member_count != b.member_count) return a.member_count > b.member_count;
    return lex_less(a.mode.value, b.mode.value);
  });
  return out;
}

double silhouette_score(std::span<const RotVec> samples, std::span<const int> labels) {
  if (samples.size() != labels.size())
    throw std::invalid_argument("silhouette: samples and labels differ in length");
  const std::size_t n = samples.size();
  if (n == 0) return -1.0;
  const int k = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::size_t> size(k, 0);
  for (int l : labels) ++size[l];
  const auto nonempty = std::count_if(size.begin(), size.end(), [](std::size_t s) { return s > 0; });
  if (nonempty < 2) return -1.0;

  double total = 0.0;
  std::vector<double> dist_sum(k);
  for (std::size_t i = 0; i < n; ++i) {
    const int li = labels[i];
    if (size[li] == 1) continue;  // s(i) = 0 for singletons
    std::fill(dist_sum.begin(), dist_sum.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j)
      dist_sum[labels[j]] += (samples[i].value - samples[j].value).norm();
    const double a = dist_sum[li] / static_cast<double>(size[li] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c)
      if (c != li && size[c] > 0) b = std::min(b, dist_sum[c] / static_cast<double>(size[c]));
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

double select_bandwidth(std::span<const RotVec> samples, std::span<const double> candidates) {
  if (candidates.size() < 2) throw std::invalid_argument("select_bandwidth needs >= 2 candidates");
  for (double c : candidates)
    if (!(c > 0.0)) throw std::invalid_argument("bandwidth candidates must be > 0");
  if (samples.size() < 2) return *std::min_element(candidates.begin(), candidates.end());

  std::vector<double> sorted(candidates.begin(), candidates.end());
  std::sort(sorted.begin(), sorted.end());
  double best_bw = sorted.back();
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<int> labels(samples.size());
  // descending so that ties keep the larger bandwidth
  for (auto it = sorted.rbegin(); it != sorted.rend(); ++it) {
    const auto clusters = mean_shift(samples, *it);
    double score = -1.0;
    if (clusters.size() >= 2) {
      for (std::size_t c = 0; c < clusters.size(); ++c)
        for (std::size_t m : clusters[c].members) labels[m] = static_cast<int>(c);
      score = silhouette_score(samples, labels);
    }
    if (score > best_score) {
      best_score = score;
      best_bw = *it;
    }
  }
  return best_bw;
}

std::size_t min_cluster_size(std::size_t n, const PatternConfig& cfg) {
  const auto frac = static_cast<std::size_t>(std::ceil(cfg.min_cluster_fraction * static_cast<double>(n)));
  return std::max(cfg.min_cluster_floor, frac);
}

RepresentativeSet representative_poses(const VoxelGrid& grid, const Workspace& w,
                                       const PatternConfig& cfg) {
  RepresentativeSet out;
  out.total_samples = grid.total_samples;
  out.out_of_workspace = grid.out_of_workspace;
  out.voxels_visited = grid.voxels_visited();

  std::vector<const VoxelStats*> work;
  for (const auto& v : grid.voxels)
    if (v.visit_count > 0 && v.visit_count >= std::max<std::size_t>(cfg.min_visits, 1))
      work.push_back(&v);

  std::vector<std::vector<RepresentativeEntry>> per_voxel(work.size());
  parallel_for(work.size(), [&](std::size_t i) {
    const VoxelStats& v = *work[i];
    const std::span<const RotVec> samples(v.orientation_samples);
    const double bw = select_bandwidth(samples, cfg.bandwidths);
    const auto clusters = mean_shift(samples, bw);
    const std::size_t floor_size = min_cluster_size(samples.size(), cfg);
    for (const auto& c : clusters) {
      if (c.member_count < floor_size && !per_voxel[i].empty()) continue;
      per_voxel[i].push_back({v.id, v.center, c.mode, true, v.visit_count, bw});
    }
  });
  for (auto& entries : per_voxel)
    for (auto& e : entries) out.entries.push_back(std::move(e));

  if (cfg.include_unvisited && !out.entries.empty()) {
    std::vector<RotVec> pool;
    for (const auto& e : out.entries) {
      const bool seen = std::any_of(pool.begin(), pool.end(),
                                    [&](const RotVec& r) { return r.value == e.rotvec.value; });
      if (!seen) pool.push_back(e.rotvec);
    }
    std::vector<RepresentativeEntry> unvisited;
    for (const auto& v : grid.voxels) {
      if (v.visit_count > 0) continue;
      for (const auto& r : pool) unvisited.push_back({v.id, w.center(v.id), r, false, 0, 0.0});
    }
    out.entries.insert(out.entries.end(), unvisited.begin(), unvisited.end());
    std::stable_sort(out.entries.begin(), out.entries.end(),
                     [](const RepresentativeEntry& a, const RepresentativeEntry& b) {
                       return a.voxel_id < b.voxel_id;
                     });
  }
  return out;
}

}  // namespace baseplace
