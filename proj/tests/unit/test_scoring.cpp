#include <doctest.h>

#include <cmath>
#include <random>

#include "baseplace/kinematics.hpp"
#include "baseplace/scoring.hpp"
#include "oracles.hpp"

using namespace baseplace;

namespace {

KinematicModel two_joint_planar() {
  std::vector<JointSpec> j = {
      {JointKind::Revolute, 0.3, 0.0, 0.0, 0.0, -1.0, 1.0},
      {JointKind::Revolute, 0.2, 0.0, 0.0, 0.0, -2.0, 2.0},
      {JointKind::Revolute, 0.1, 0.0, 0.0, 0.0, -2.0, 2.0},
  };
  return KinematicModel("planar", j);
}

JointConfig random_config(const KinematicModel& m, std::mt19937_64& rng) {
  JointConfig q(m.dof());
  for (int i = 0; i < m.dof(); ++i) {
    std::uniform_real_distribution<double> u(m.joints()[i].q_min, m.joints()[i].q_max);
    q[i] = u(rng);
  }
  return q;
}

// Entry that the reference arm reaches at q from the given base.
Pose entry_from(const KinematicModel& m, const BasePose& b, const JointConfig& q) {
  return Pose::from_transform(base_to_world(b, m.base_height()) * forward_kinematics(m, q).transform());
}

RepresentativeSet reachable_set(const KinematicModel& m, const BasePose& b, int n, std::mt19937_64& rng,
                                bool visited = true) {
  RepresentativeSet s;
  for (int i = 0; i < n; ++i) {
    JointConfig q = random_config(m, rng);
    q = 0.5 * (q + m.q_mid());
    const Pose p = entry_from(m, b, q);
    s.entries.push_back({i, p.position(), quat_to_rotvec(p.orientation()), visited, visited ? 10u : 0u, 0.1});
  }
  return s;
}

}  // namespace

TEST_CASE("joint weights normalize") {
  const JointWeights w({1, 3});
  CHECK(w[0] == 0.25);
  CHECK(w[1] == 0.75);
  CHECK(JointWeights::uniform(4)[2] == 0.25);
  CHECK_THROWS_AS(JointWeights({-1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(JointWeights({0, 0}), std::invalid_argument);
}

TEST_CASE("joint margin examples") {
  const auto m = reference_arm();
  const auto w = JointWeights::uniform(6);
  CHECK(joint_margin_score(m.q_mid(), m, w) == doctest::Approx(1.0).epsilon(1e-14));
  JointConfig qmax(6);
  for (int i = 0; i < 6; ++i) qmax[i] = m.joints()[i].q_max;
  CHECK(joint_margin_score(qmax, m, w) == doctest::Approx(0.0).epsilon(1e-15));

  const auto p = two_joint_planar();
  JointConfig half(3);
  half << 0.5, -1.0, 1.0;
  CHECK(joint_margin_score(half, p, JointWeights::uniform(3)) == doctest::Approx(0.5));

  JointConfig outside = m.q_mid();
  outside[0] = m.joints()[0].q_max + 0.5;
  const auto r = joint_margin(outside, m, w);
  CHECK(r.clamped);
  CHECK(r.score == doctest::Approx(5.0 / 6.0));
}

TEST_CASE("joint margin is invariant under joint relabeling") {
  const auto m = reference_arm();
  std::mt19937_64 rng(3);
  const std::vector<double> wv = {1, 2, 3, 4, 5, 6};
  auto joints = m.joints();
  const std::vector<int> perm = {3, 0, 5, 1, 4, 2};
  std::vector<JointSpec> pj;
  std::vector<double> pw;
  for (int i : perm) {
    pj.push_back(joints[i]);
    pw.push_back(wv[i]);
  }
  const KinematicModel pm("permuted", pj);
  for (int k = 0; k < 100; ++k) {
    const JointConfig q = random_config(m, rng);
    JointConfig pq(6);
    for (int i = 0; i < 6; ++i) pq[i] = q[perm[i]];
    CHECK(joint_margin_score(q, m, JointWeights(wv)) ==
          doctest::Approx(joint_margin_score(pq, pm, JointWeights(pw))).epsilon(1e-14));
  }
}

TEST_CASE("manipulability closed forms") {
  Jacobian j = Jacobian::Zero(6, 6);
  j.topLeftCorner<3, 3>().setIdentity();
  j.block<3, 3>(3, 3).setIdentity();
  auto s = manipulability_score(j);
  CHECK(s.linear == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.angular == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(s.total() - 2.0) <= 1e-9);

  j.topLeftCorner<3, 3>() = Eigen::Vector3d(2, 1, 1).asDiagonal();
  s = manipulability_score(j);
  CHECK(std::abs(s.linear - 0.5) <= 1e-9);
  CHECK(std::abs(s.total() - 1.5) <= 1e-9);

  j.topLeftCorner<3, 3>() = Eigen::Vector3d(1, 1, 0).asDiagonal();
  CHECK(manipulability_score(j).linear == 0.0);
}

TEST_CASE("manipulability is invariant under a change of task basis") {
  const auto m = reference_arm();
  std::mt19937_64 rng(4);
  for (int k = 0; k < 200; ++k) {
    const Jacobian j = jacobian(m, random_config(m, rng));
    const Mat3 r = Quat::UnitRandom().toRotationMatrix();
    Jacobian rj = j;
    rj.topRows<3>() = r * j.topRows<3>();
    rj.bottomRows<3>() = r * j.bottomRows<3>();
    const auto a = manipulability_score(j), b = manipulability_score(rj);
    CHECK(std::abs(a.linear - b.linear) <= 1e-9);
    CHECK(std::abs(a.angular - b.angular) <= 1e-9);
  }
}

TEST_CASE("score bounds over random in-limit configs") {
  const auto m = reference_arm();
  const auto w = JointWeights::uniform(6);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 10000; ++k) {
    const JointConfig q = random_config(m, rng);
    const double jm = joint_margin_score(q, m, w);
    const auto s = manipulability_score(jacobian(m, q));
    CHECK((jm >= 0.0 && jm <= 1.0));
    CHECK((s.linear >= 0.0 && s.linear <= 1.0));
    CHECK((s.angular >= 0.0 && s.angular <= 1.0));
  }
}

TEST_CASE("pose_score round trip from the mid configuration") {
  const auto m = reference_arm().with_base_height(0.3);
  const BasePose b(1.2, -0.4, 0.7);
  const auto s = pose_score(m, b, entry_from(m, b, m.q_mid()), JointWeights::uniform(6));
  CHECK(s.feasible);
  CHECK(s.jm == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("pose_score of an unreachable entry is all zeros") {
  const auto m = reference_arm();
  const auto s = pose_score(m, BasePose(0, 0, 0), Pose(Vec3(10, 0, 0), Quat::Identity()), JointWeights::uniform(6));
  CHECK_FALSE(s.feasible);
  CHECK(s.jm == 0.0);
  CHECK(s.lm == 0.0);
  CHECK(s.am == 0.0);
  CHECK(s.total() == 0.0);
}

TEST_CASE("pose_score picks the best branch like the exhaustive oracle") {
  const auto m = reference_arm().with_base_height(0.1);
  std::mt19937_64 rng(6);
  const std::vector<double> wv = {1, 1, 2, 1, 1, 0.5};
  for (int k = 0; k < 100; ++k) {
    const BasePose b(0.3, -0.2, 0.9);
    const Pose e = entry_from(m, b, random_config(m, rng));
    const auto s = pose_score(m, b, e, JointWeights(wv));
    CHECK(s.total() == doctest::Approx(oracle::best_branch_score(m, b, e, wv)).epsilon(1e-6));
  }
}

TEST_CASE("final score arithmetic and alpha semantics") {
  const auto m = reference_arm();
  const auto w = JointWeights::uniform(6);
  const BasePose b(0.0, 0.0, 0.0);
  std::mt19937_64 rng(7);
  auto set = reachable_set(m, b, 6, rng);
  const auto fs = final_score(m, b, set, 0.0, w);
  double sum = 0.0;
  for (const auto& e : set.entries) sum += pose_score(m, b, e.pose(), w).total();
  CHECK(std::abs(fs.value - sum) <= 1e-9);

  // singleton set equals the pose score
  RepresentativeSet one;
  one.entries = {set.entries[0]};
  CHECK(final_score_value(m, b, one, 0.0, w) == pose_score(m, b, set.entries[0].pose(), w).total());

  // alpha = 0 equals the pruned set; monotone in alpha when unvisited entries are feasible
  auto extra = reachable_set(m, b, 4, rng, false);
  RepresentativeSet full = set;
  full.entries.insert(full.entries.end(), extra.entries.begin(), extra.entries.end());
  CHECK(final_score_value(m, b, full, 0.0, w) == final_score_value(m, b, set, 0.0, w));
  double prev = -1.0;
  for (double a : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    const double v = final_score_value(m, b, full, a, w);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK_THROWS_AS(final_score(m, b, set, 1.5, w), std::invalid_argument);
}

TEST_CASE("final score of an unreachable set is zero") {
  const auto m = reference_arm();
  RepresentativeSet far;
  for (int i = 0; i < 5; ++i) far.entries.push_back({i, Vec3(20.0 + i, 0, 0), RotVec(0, 0, 0), true, 1, 0.1});
  const auto fs = final_score(m, BasePose(0, 0, 0), far, 0.0, JointWeights::uniform(6));
  CHECK(fs.value == 0.0);
  for (const auto& e : fs.per_entry) CHECK_FALSE(e.score.feasible);
  CHECK(final_score_value(m, BasePose(0, 0, 0), RepresentativeSet{}, 0.0, JointWeights::uniform(6)) == 0.0);
}
