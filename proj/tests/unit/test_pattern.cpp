#include <doctest.h>

#include <algorithm>
#include <random>

#include "baseplace/pattern.hpp"
#include "baseplace/tracegen.hpp"
#include "oracles.hpp"

using namespace baseplace;

namespace {

Workspace default_workspace() { return Workspace(Vec3(1.44, -0.50, 0.05), Vec3(0.2, 0.1, 0.1), 0.02); }

std::vector<RotVec> gaussian_blob(const Vec3& centre, double sigma, int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0, sigma);
  std::vector<RotVec> out;
  for (int i = 0; i < n; ++i) out.emplace_back(centre + Vec3(g(rng), g(rng), g(rng)));
  return out;
}

std::vector<Vec3> values(const std::vector<RotVec>& r) {
  std::vector<Vec3> v;
  for (const auto& x : r) v.push_back(x.value);
  return v;
}

}  // namespace

TEST_CASE("default workspace has 250 voxels") {
  const auto w = default_workspace();
  CHECK(w.voxel_count() == 250);
  CHECK(w.counts() == std::array<int, 3>{10, 5, 5});
  CHECK_FALSE(w.padded());
}

TEST_CASE("workspace dims are padded to whole voxels") {
  const Workspace w(Vec3::Zero(), Vec3(0.05, 0.02, 0.02), 0.02);
  CHECK(w.padded());
  CHECK(w.counts()[0] == 3);
  CHECK(w.dims().x() == doctest::Approx(0.06));
  CHECK_THROWS_AS(Workspace(Vec3::Zero(), Vec3(0.1, 0.0, 0.1), 0.02), std::invalid_argument);
  CHECK_THROWS_AS(Workspace(Vec3::Zero(), Vec3(0.1, 0.1, 0.1), 0.0), std::invalid_argument);
}

TEST_CASE("identical poses land in one voxel") {
  const auto w = default_workspace();
  const Vec3 c = w.center(37);
  std::vector<Pose> traces(100, Pose(c, Quat::Identity()));
  const auto g = voxelize(traces, w);
  for (const auto& v : g.voxels) CHECK(v.visit_count == (v.id == 37 ? 100u : 0u));
  CHECK(g.voxels[37].orientation_samples.size() == 100);
}

TEST_CASE("samples on a shared face go to the higher index") {
  const auto w = default_workspace();
  const Vec3 face = w.origin() + Vec3(0.02, 0.01, 0.01);
  CHECK(w.voxel_of(face) == w.voxel_of(face + Vec3(0.001, 0, 0)));
  CHECK(w.voxel_of(face) != w.voxel_of(face - Vec3(0.001, 0, 0)));
  // ids are x-slowest row-major
  CHECK(w.voxel_of(w.origin() + Vec3(0.021, 0.001, 0.001)) == 25);
  CHECK(w.voxel_of(w.origin() + w.dims()) == -1);
  CHECK(w.voxel_of(w.origin()) == 0);
}

TEST_CASE("visit counts plus outside samples equal the trace length") {
  const auto w = default_workspace();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.05, 0.25);
  std::vector<Pose> traces;
  for (int i = 0; i < 5000; ++i) traces.emplace_back(w.origin() + Vec3(u(rng), u(rng) / 2, u(rng) / 2), Quat::UnitRandom());
  const auto g = voxelize(traces, w);
  std::size_t sum = g.out_of_workspace;
  for (const auto& v : g.voxels) {
    sum += v.visit_count;
    CHECK(v.visit_count == v.orientation_samples.size());
  }
  CHECK(sum == traces.size());
  CHECK(g.out_of_workspace > 0);
}

TEST_CASE("minimum displacement filter skips idle samples") {
  const auto w = default_workspace();
  const Vec3 c = w.center(3);
  std::vector<Pose> traces(50, Pose(c, Quat::Identity()));
  traces.emplace_back(c + Vec3(0.005, 0, 0), Quat::Identity());
  const auto g = voxelize(traces, w, 1e-3);
  CHECK(g.voxels[3].visit_count == 2);
  CHECK(g.filtered == 49);
}

TEST_CASE("mean-shift on identical samples") {
  std::vector<RotVec> s(20, RotVec(0.1, 0.2, 0.3));
  const auto c = mean_shift(s, 0.2);
  REQUIRE(c.size() == 1);
  CHECK((c[0].mode.value - Vec3(0.1, 0.2, 0.3)).norm() <= 1e-15);
  CHECK(c[0].member_count == 20);
}

TEST_CASE("mean-shift on a single sample") {
  std::vector<RotVec> s = {RotVec(1, 2, 3)};
  const auto c = mean_shift(s, 0.5);
  REQUIRE(c.size() == 1);
  CHECK(c[0].members == std::vector<std::size_t>{0});
}

TEST_CASE("mean-shift separates two planted gaussians like the brute-force oracle") {
  std::mt19937_64 rng(21);
  auto s = gaussian_blob(Vec3(0, 0, 0), 0.05, 200, rng);
  const auto b = gaussian_blob(Vec3(0, 0, 1.2), 0.05, 200, rng);
  s.insert(s.end(), b.begin(), b.end());
  const auto c = mean_shift(s, 0.3);
  REQUIRE(c.size() == 2);
  const auto ref = oracle::mean_shift_modes(values(s), 0.3);
  REQUIRE(ref.size() == 2);
  for (const auto& cl : c) {
    const double to_planted = std::min(cl.mode.value.norm(), (cl.mode.value - Vec3(0, 0, 1.2)).norm());
    CHECK(to_planted < 0.05);
    const double to_ref = std::min((cl.mode.value - ref[0]).norm(), (cl.mode.value - ref[1]).norm());
    CHECK(to_ref < 1e-5);
    CHECK(cl.member_count == 200);
  }
}

TEST_CASE("mean-shift is independent of sample order") {
  std::mt19937_64 rng(22);
  auto s = gaussian_blob(Vec3(0.3, 0, 0), 0.1, 150, rng);
  const auto b = gaussian_blob(Vec3(0.3, 0.6, 0), 0.1, 90, rng);
  s.insert(s.end(), b.begin(), b.end());
  const auto c1 = mean_shift(s, 0.25);
  std::shuffle(s.begin(), s.end(), rng);
  const auto c2 = mean_shift(s, 0.25);
  REQUIRE(c1.size() == c2.size());
  for (std::size_t i = 0; i < c1.size(); ++i) {
    CHECK(c1[i].mode.value == c2[i].mode.value);
    CHECK(c1[i].member_count == c2[i].member_count);
  }
}

TEST_CASE("silhouette matches the direct formula") {
  std::mt19937_64 rng(23);
  auto s = gaussian_blob(Vec3(0, 0, 0), 0.2, 40, rng);
  const auto b = gaussian_blob(Vec3(0.5, 0, 0), 0.2, 30, rng);
  s.insert(s.end(), b.begin(), b.end());
  std::uniform_int_distribution<int> lab(0, 3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> labels(s.size());
    for (auto& l : labels) l = lab(rng);
    labels[0] = 3;
    labels[1] = 0;
    CHECK(silhouette_score(s, labels) == doctest::Approx(oracle::silhouette(values(s), labels)).epsilon(1e-12));
  }
  std::vector<int> one(s.size(), 0);
  CHECK(silhouette_score(s, one) == -1.0);
}

TEST_CASE("bandwidth selection on two well separated clusters") {
  std::mt19937_64 rng(24);
  auto s = gaussian_blob(Vec3(0, 0, 0), 0.05, 100, rng);
  const auto b = gaussian_blob(Vec3(1.2, 0, 0), 0.05, 100, rng);
  s.insert(s.end(), b.begin(), b.end());
  const std::vector<double> cands = {0.1, 0.3, 2.0};

  // oracle: silhouette per candidate from brute-force labels
  double best = -2, best_bw = 0;
  for (double bw : {2.0, 0.3, 0.1}) {
    const auto modes = oracle::mean_shift_modes(values(s), bw);
    std::vector<int> labels(s.size());
    const auto c = mean_shift(s, bw);
    for (std::size_t k = 0; k < c.size(); ++k)
      for (auto m : c[k].members) labels[m] = static_cast<int>(k);
    CHECK(c.size() == modes.size());
    const double sc = modes.size() < 2 ? -1.0 : oracle::silhouette(values(s), labels);
    if (sc > best) {
      best = sc;
      best_bw = bw;
    }
  }
  CHECK(best_bw == 0.3);
  CHECK(select_bandwidth(s, cands) == 0.3);
}

TEST_CASE("bandwidth selection degenerate rules") {
  std::vector<RotVec> same(10, RotVec(0.4, 0.4, 0.4));
  const std::vector<double> cands = {0.1, 0.5, 1.0};
  CHECK(select_bandwidth(same, cands) == 1.0);

  std::vector<RotVec> two = {RotVec(0, 0, 0), RotVec(2, 0, 0)};
  const std::vector<double> c2 = {0.1, 5.0};
  CHECK(select_bandwidth(two, c2) == 0.1);

  std::vector<RotVec> one = {RotVec(0, 0, 0)};
  CHECK(select_bandwidth(one, cands) == 0.1);
}

TEST_CASE("min cluster size floor") {
  PatternConfig cfg;
  CHECK(min_cluster_size(10, cfg) == 3);
  CHECK(min_cluster_size(1000, cfg) == 10);
  CHECK(min_cluster_size(1001, cfg) == 11);
}

TEST_CASE("representative poses: single tight cluster") {
  const auto w = default_workspace();
  std::mt19937_64 rng(25);
  std::vector<Pose> traces;
  for (const auto& r : gaussian_blob(Vec3(0.2, -0.3, 1.0), 0.01, 60, rng))
    traces.emplace_back(w.center(12), rotvec_to_quat(r));
  const auto set = representative_poses(voxelize(traces, w), w, PatternConfig{});
  REQUIRE(set.size() == 1);
  CHECK(set.entries[0].voxel_id == 12);
  CHECK((set.entries[0].center - w.center(12)).norm() <= 1e-15);
  CHECK((set.entries[0].rotvec.value - Vec3(0.2, -0.3, 1.0)).norm() < 0.01);
  CHECK(set.entries[0].visit_count == 60);
}

TEST_CASE("representative poses: empty trace and single-sample voxels") {
  const auto w = default_workspace();
  const auto empty = representative_poses(voxelize({}, w), w, PatternConfig{});
  CHECK(empty.empty());
  CHECK(empty.total_samples == 0);

  std::vector<Pose> lonely = {Pose(w.center(0), Quat::Identity()), Pose(w.center(9), rotvec_to_quat(RotVec(0, 1, 0)))};
  const auto set = representative_poses(voxelize(lonely, w), w, PatternConfig{});
  REQUIRE(set.size() == 2);
  CHECK(set.entries[0].visit_count == 1);
}

TEST_CASE("two volunteers at a shared voxel have different habits") {
  const auto w = default_workspace();
  const auto [a, b] = shared_voxel_volunteers(w);
  const int shared = w.voxel_of(a.voxels[0].center);
  const auto analyze = [&](const OperatorProfile& p, std::uint64_t seed) {
    const auto traces = generate_traces(p, w, 6000, seed);
    return representative_poses(voxelize(traces, w), w, PatternConfig{});
  };
  const auto sa = analyze(a, 1), sb = analyze(b, 2);
  const auto at = [&](const RepresentativeSet& s) {
    std::vector<Vec3> out;
    for (const auto& e : s.entries)
      if (e.voxel_id == shared) out.push_back(e.rotvec.value);
    return out;
  };
  const auto ra = at(sa), rb = at(sb);
  CHECK(ra.size() == 2);
  CHECK(rb.size() == 3);
  for (const auto& m : a.voxels[0].modes) {
    double best = 1e9;
    for (const auto& r : ra) best = std::min(best, (r - m.mean.value).norm());
    CHECK(best < 0.05);
  }
}

TEST_CASE("representatives lie within bandwidth of a sample and ignore trace order") {
  const auto w = default_workspace();
  const auto p = planted_profile(w, {1, 2, 3, 2}, 0.05, 5);
  auto traces = generate_traces(p, w, 4000, 8);
  const auto grid = voxelize(traces, w);
  const auto set = representative_poses(grid, w, PatternConfig{});
  for (const auto& e : set.entries) {
    const auto& samples = grid.voxels[e.voxel_id].orientation_samples;
    double best = 1e9;
    for (const auto& s : samples) best = std::min(best, (s.value - e.rotvec.value).norm());
    CHECK(best <= e.bandwidth);
  }
  std::mt19937_64 rng(9);
  std::shuffle(traces.begin(), traces.end(), rng);
  const auto again = representative_poses(voxelize(traces, w), w, PatternConfig{});
  REQUIRE(again.size() == set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    CHECK(again.entries[i].voxel_id == set.entries[i].voxel_id);
    CHECK(again.entries[i].rotvec.value == set.entries[i].rotvec.value);
  }
}

TEST_CASE("unvisited voxels receive the pooled orientations") {
  const auto w = default_workspace();
  const auto p = planted_profile(w, {1, 2}, 0.05, 6);
  const auto grid = voxelize(generate_traces(p, w, 2000, 3), w);
  PatternConfig cfg;
  cfg.include_unvisited = true;
  const auto set = representative_poses(grid, w, cfg);
  std::size_t visited = 0, unvisited = 0;
  for (const auto& e : set.entries) (e.visited ? visited : unvisited)++;
  CHECK(visited == 3);
  CHECK(unvisited == 3 * (250 - 2));
  for (std::size_t i = 1; i < set.size(); ++i) CHECK(set.entries[i - 1].voxel_id <= set.entries[i].voxel_id);
}
