#include <doctest.h>

#include <cmath>
#include <random>

#include "baseplace/kinematics.hpp"
#include "oracles.hpp"

using namespace baseplace;

namespace {

JointConfig random_config(const KinematicModel& m, std::mt19937_64& rng, double margin = 0.0) {
  JointConfig q(m.dof());
  for (int i = 0; i < m.dof(); ++i) {
    const auto& j = m.joints()[i];
    std::uniform_real_distribution<double> u(j.q_min + margin, j.q_max - margin);
    q[i] = u(rng);
  }
  return q;
}

std::vector<double> as_vec(const JointConfig& q) { return {q.data(), q.data() + q.size()}; }

Transform oracle_transform(const oracle::Mat4& m) {
  Transform t = Transform::Identity();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) t.linear()(i, j) = m[4 * i + j];
    t.translation()[i] = m[4 * i + 3];
  }
  return t;
}

// Reference arm with a nonzero wrist offset: no longer closed-form.
KinematicModel offset_arm() {
  auto joints = reference_arm().joints();
  joints[3].a = 0.03;
  return KinematicModel("offset", joints);
}

}  // namespace

TEST_CASE("reference arm home pose matches the matrix-product oracle") {
  const auto m = reference_arm();
  const Pose home = forward_kinematics(m, JointConfig::Zero(6));
  const Pose documented = reference_home_pose();
  CHECK((home.position() - documented.position()).norm() <= 1e-12);
  CHECK(rotation_distance(home.orientation(), documented.orientation()) <= 1e-12);

  const auto t = oracle::dh_forward(m, std::vector<double>(6, 0.0));
  CHECK(t[3] == doctest::Approx(0.48).epsilon(1e-12));
  CHECK(std::abs(t[7]) <= 1e-12);
  CHECK(t[11] == doctest::Approx(-0.10).epsilon(1e-12));
  CHECK(documented.orientation().w() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(documented.orientation().x() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(documented.orientation().y() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(documented.orientation().z() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
}

TEST_CASE("forward kinematics agrees with the oracle on random configs") {
  const auto m = reference_arm();
  std::mt19937_64 rng(1);
  for (int k = 0; k < 500; ++k) {
    const JointConfig q = random_config(m, rng);
    const Eigen::Matrix4d lib = forward_transform(m, q);
    const auto ref = oracle::dh_forward(m, as_vec(q));
    for (int i = 0; i < 16; ++i) CHECK(std::abs(lib(i / 4, i % 4) - ref[i]) <= 1e-12);
    CHECK(std::abs(forward_kinematics(m, q).orientation().norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("rotating joint 1 by pi keeps the distance to the base axis") {
  const auto m = reference_arm();
  std::mt19937_64 rng(2);
  for (int k = 0; k < 50; ++k) {
    JointConfig q = random_config(m, rng);
    const Vec3 p0 = forward_kinematics(m, q).position();
    q[0] += kPi;
    const Vec3 p1 = forward_kinematics(m, q).position();
    CHECK(std::hypot(p0.x(), p0.y()) == doctest::Approx(std::hypot(p1.x(), p1.y())).epsilon(1e-12));
    CHECK(p0.z() == doctest::Approx(p1.z()).epsilon(1e-12));
  }
}

TEST_CASE("model validation") {
  auto joints = reference_arm().joints();
  CHECK_THROWS_AS(KinematicModel("short", {joints[0], joints[1]}), std::invalid_argument);
  joints[2].q_min = joints[2].q_max;
  CHECK_THROWS_AS(KinematicModel("bad", joints), std::invalid_argument);
  CHECK(reference_arm().has_closed_form());
  CHECK_FALSE(offset_arm().has_closed_form());
}

TEST_CASE("jacobian matches central differences") {
  const auto m = reference_arm();
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const JointConfig q = random_config(m, rng);
    const Jacobian j = jacobian(m, q);
    REQUIRE(j.cols() == 6);
    const auto ref = oracle::numeric_jacobian(m, as_vec(q), 1e-6);
    Eigen::Matrix<double, 6, 6> r;
    for (int c = 0; c < 6; ++c)
      for (int i = 0; i < 6; ++i) r(i, c) = ref[c][i];
    worst = std::max(worst, (j - r).norm() / std::max(1.0, r.norm()));
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("jacobian at home: column norms match the oracle") {
  const auto m = reference_arm();
  const Jacobian j = jacobian(m, JointConfig::Zero(6));
  const auto ref = oracle::numeric_jacobian(m, std::vector<double>(6, 0.0), 1e-6);
  for (int c = 0; c < 6; ++c) {
    double n = 0.0;
    for (double v : ref[c]) n += v * v;
    CHECK(j.col(c).norm() == doctest::Approx(std::sqrt(n)).epsilon(1e-6));
  }
}

TEST_CASE("jacobian first-order check with small perturbations") {
  const auto m = reference_arm();
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0, 1e-7);
  for (int k = 0; k < 100; ++k) {
    const JointConfig q = random_config(m, rng);
    JointConfig dq(6);
    for (int i = 0; i < 6; ++i) dq[i] = g(rng);
    const Pose a = forward_kinematics(m, q), b = forward_kinematics(m, q + dq);
    Eigen::Matrix<double, 6, 1> delta;
    delta.head<3>() = b.position() - a.position();
    delta.tail<3>() = rotation_error(b.orientation().toRotationMatrix(), a.orientation().toRotationMatrix());
    CHECK((jacobian(m, q) * dq - delta).norm() <= 1e-6);
  }
}

TEST_CASE("prismatic joints have no angular jacobian part") {
  std::vector<JointSpec> joints = {
      {JointKind::Revolute, 0.0, kPi / 2, 0.3, 0.0, -kPi, kPi},
      {JointKind::Prismatic, 0.0, -kPi / 2, 0.1, 0.0, 0.0, 0.4},
      {JointKind::Revolute, 0.2, 0.0, 0.0, 0.0, -kPi, kPi},
  };
  const KinematicModel m("rpr", joints);
  JointConfig q(3);
  q << 0.3, 0.2, -0.4;
  const Jacobian j = jacobian(m, q);
  CHECK(j.col(1).tail<3>().norm() == 0.0);
  const auto ref = oracle::numeric_jacobian(m, as_vec(q), 1e-6);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 6; ++i) CHECK(j(i, c) == doctest::Approx(ref[c][i]).epsilon(1e-6));
}

TEST_CASE("closed-form IK round trip and branch properties") {
  const auto m = reference_arm();
  std::mt19937_64 rng(5);
  for (int k = 0; k < 300; ++k) {
    const JointConfig q = random_config(m, rng);
    const Pose target = forward_kinematics(m, q);
    const auto sols = inverse_kinematics(m, target, IkMethod::ClosedForm);
    REQUIRE_FALSE(sols.empty());
    double nearest = 1e9;
    for (std::size_t a = 0; a < sols.size(); ++a) {
      CHECK(m.within_limits(sols[a].q));
      const auto [pe, oe] = pose_error(m, sols[a].q, target);
      CHECK(pe <= 1e-6);
      CHECK(oe <= 1e-6);
      nearest = std::min(nearest, (sols[a].q - q).cwiseAbs().maxCoeff());
      for (std::size_t b = a + 1; b < sols.size(); ++b) {
        CHECK((sols[a].q - sols[b].q).cwiseAbs().maxCoeff() > 1e-6);
        CHECK(sols[a].branch_id < sols[b].branch_id);
      }
    }
    CHECK(nearest <= 1e-6);
  }
}

TEST_CASE("unreachable targets give an empty result") {
  const auto m = reference_arm();
  CHECK(inverse_kinematics(m, Pose(Vec3(5.0, 0, 0), Quat::Identity())).empty());
  CHECK(inverse_kinematics(m, Pose(Vec3(0, 3.0, 1.0), Quat::Identity()), IkMethod::Numeric).empty());
}

TEST_CASE("branch count agrees with a dense numeric sweep") {
  const auto m = reference_arm();
  // Limits prune the first target to one branch; the second keeps all eight.
  JointConfig qs(6);
  std::size_t expected = 1;
  SUBCASE("single admissible branch") { qs << 0.3, 0.5, -0.6, 0.4, 0.8, -0.7; }
  SUBCASE("all eight branches admissible") {
    qs << 1.8, 1.2, -1.6, 0.3, 1.9, 0.2;
    expected = 8;
  }
  const Pose target = forward_kinematics(m, qs);
  const auto closed = inverse_kinematics(m, target, IkMethod::ClosedForm);
  const auto swept = oracle::ik_sweep(m, oracle::dh_forward(m, as_vec(qs)), 1000, 77);
  CHECK(closed.size() == swept.size());
  CHECK(closed.size() == expected);
  for (const auto& s : swept) {
    double best = 1e9;
    for (const auto& c : closed) {
      double d = 0.0;
      for (int i = 0; i < 6; ++i) d = std::max(d, std::abs(c.q[i] - s[i]));
      best = std::min(best, d);
    }
    CHECK(best <= 1e-6);
  }
}

TEST_CASE("numeric fallback round trip on a non-closed-form arm") {
  const auto m = offset_arm();
  std::mt19937_64 rng(6);
  int found = 0;
  for (int k = 0; k < 40; ++k) {
    const JointConfig q = random_config(m, rng, 0.3);
    const Pose target = forward_kinematics(m, q);
    const auto sols = inverse_kinematics(m, target);
    if (sols.empty()) continue;
    ++found;
    for (const auto& s : sols) {
      const auto [pe, oe] = pose_error(m, s.q, target);
      CHECK(pe <= 1e-6);
      CHECK(oe <= 1e-6);
      CHECK(m.within_limits(s.q));
    }
  }
  CHECK(found >= 30);
}

TEST_CASE("numeric method also solves the reference arm") {
  const auto m = reference_arm();
  std::mt19937_64 rng(7);
  const JointConfig q = random_config(m, rng, 0.2);
  const Pose target = forward_kinematics(m, q);
  const auto sols = inverse_kinematics(m, target, IkMethod::Numeric);
  REQUIRE_FALSE(sols.empty());
  for (const auto& s : sols) CHECK(pose_error(m, s.q, target).first <= 1e-6);
}

TEST_CASE("wrist singularity still returns valid solutions") {
  const auto m = reference_arm();
  JointConfig q(6);
  q << 0.2, 0.4, -0.3, 0.5, 0.0, 0.1;
  const Pose target = forward_kinematics(m, q);
  const auto sols = inverse_kinematics(m, target);
  REQUIRE_FALSE(sols.empty());
  for (const auto& s : sols) {
    const auto [pe, oe] = pose_error(m, s.q, target);
    CHECK(pe <= 1e-6);
    CHECK(oe <= 1e-6);
  }
}

TEST_CASE("model document round trip") {
  const auto m = reference_arm().with_base_height(0.42);
  const auto back = model_from_json(model_to_json(m));
  CHECK(back.name() == m.name());
  CHECK(back.base_height() == 0.42);
  REQUIRE(back.dof() == m.dof());
  for (int i = 0; i < m.dof(); ++i) {
    CHECK(back.joints()[i].a == m.joints()[i].a);
    CHECK(back.joints()[i].alpha == m.joints()[i].alpha);
    CHECK(back.joints()[i].d == m.joints()[i].d);
    CHECK(back.joints()[i].q_min == m.joints()[i].q_min);
  }
  auto doc = model_to_json(m);
  doc["convention"] = "dh-modified";
  CHECK_THROWS(model_from_json(doc));
}

TEST_CASE("oracle transform helper is consistent") {
  const auto m = reference_arm();
  const auto t = oracle_transform(oracle::dh_forward(m, std::vector<double>(6, 0.1)));
  CHECK(t.matrix().isApprox(forward_transform(m, JointConfig::Constant(6, 0.1)), 1e-12));
}
