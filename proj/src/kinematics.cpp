#include "baseplace/kinematics.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

namespace baseplace {
namespace {

constexpr double kDeg = kPi / 180.0;

Eigen::Matrix4d dh_matrix(double theta, double d, double a, double alpha) {
  const double ct = std::cos(theta), st = std::sin(theta);
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  Eigen::Matrix4d t;
  t << ct, -st * ca, st * sa, a * ct,
       st, ct * ca, -ct * sa, a * st,
       0.0, sa, ca, d,
       0.0, 0.0, 0.0, 1.0;
  return t;
}

Eigen::Matrix4d link_transform(const JointSpec& j, double q) {
  if (j.kind == JointKind::Prismatic) return dh_matrix(j.theta_offset, j.d + q, j.a, j.alpha);
  return dh_matrix(j.theta_offset + q, j.d, j.a, j.alpha);
}

bool near(double v, double target) { return std::abs(v - target) < 1e-12; }

bool matches_spherical_wrist_layout(const std::vector<JointSpec>& js) {
  if (js.size() != 6) return false;
  for (const auto& j : js)
    if (j.kind != JointKind::Revolute) return false;
  const double h = kPi / 2.0;
  return near(js[0].alpha, h) && near(js[1].alpha, 0.0) && near(js[2].alpha, h) &&
         near(js[3].alpha, -h) && near(js[4].alpha, h) && near(js[5].alpha, 0.0) &&
         near(js[1].d, 0.0) && near(js[2].d, 0.0) && near(js[4].d, 0.0) &&
         near(js[3].a, 0.0) && near(js[4].a, 0.0) && near(js[5].a, 0.0) &&
         js[1].a > 0.0 && std::hypot(js[2].a, js[3].d) > 0.0;
}

void check_dim(const KinematicModel& m, const JointConfig& q) {
  if (q.size() != m.dof())
    throw std::invalid_argument("joint vector has " + std::to_string(q.size()) +
                                " entries, model '" + m.name() + "' has " +
                                std::to_string(m.dof()) + " joints");
}

// 6-vector task error [dp; dtheta] in the base frame.
Eigen::Matrix<double, 6, 1> task_error(const Eigen::Matrix4d& current, const Transform& target) {
  Eigen::Matrix<double, 6, 1> e;
  e.head<3>() = target.translation() - current.block<3, 1>(0, 3);
  e.tail<3>() = rotation_error(target.linear(), current.block<3, 3>(0, 0));
  return e;
}

void clamp_to_limits(const KinematicModel& m, JointConfig& q) {
  for (int i = 0; i < m.dof(); ++i)
    q[i] = std::clamp(q[i], m.joints()[i].q_min, m.joints()[i].q_max);
}

struct DlsResult {
  JointConfig q;
  bool converged = false;
};

// Damped least squares with joint clamping.
DlsResult solve_dls(const KinematicModel& m, const Transform& target, JointConfig q,
                    int max_iterations) {
  constexpr double kDamping = 1e-3;
  constexpr double kTolerance = 1e-8;
  const Eigen::Matrix<double, 6, 6> damping =
      kDamping * kDamping * Eigen::Matrix<double, 6, 6>::Identity();
  for (int it = 0; it <= max_iterations; ++it) {
    const auto e = task_error(forward_transform(m, q), target);
    if (e.norm() < kTolerance) return {q, true};
    if (it == max_iterations) break;
    const Jacobian j = jacobian(m, q);
    const Eigen::Matrix<double, 6, 6> jjt = j * j.transpose() + damping;
    q += j.transpose() * jjt.ldlt().solve(e);
    clamp_to_limits(m, q);
  }
  return {q, false};
}

// Maps a raw joint angle onto the limits by 2*pi shifts; picks the copy
// nearest mid-range. Returns false if no copy fits.
bool fit_to_limits(const JointSpec& j, double raw, double& out) {
  constexpr double kSlack = 1e-12;
  bool found = false;
  for (int k = -3; k <= 3; ++k) {
    double v = raw + 2.0 * kPi * k;
    if (v < j.q_min - kSlack || v > j.q_max + kSlack) continue;
    v = std::clamp(v, j.q_min, j.q_max);
    if (!found || std::abs(v - j.mid()) < std::abs(out - j.mid())) out = v;
    found = true;
  }
  return found;
}

void push_distinct(std::vector<IkSolution>& out, IkSolution s, double tol) {
  for (const auto& o : out)
    if ((o.q - s.q).lpNorm<Eigen::Infinity>() <= tol) return;
  out.push_back(std::move(s));
}

bool accept(const KinematicModel& m, JointConfig& q, const Pose& target) {
  constexpr double kExact = 1e-10;
  constexpr double kAccept = 1e-7;
  auto [dp, dr] = pose_error(m, q, target);
  if (dp <= kExact && dr <= kExact) return true;
  // near-singular branches lose a few digits; polish with a short DLS run
  auto polished = solve_dls(m, target.transform(), q, 20);
  std::tie(dp, dr) = pose_error(m, polished.q, target);
  if (dp <= kAccept && dr <= kAccept) {
    q = polished.q;
    return true;
  }
  return false;
}

std::vector<IkSolution> closed_form_ik(const KinematicModel& m, const Pose& target) {
  const auto& js = m.joints();
  const Mat3 r = target.orientation().toRotationMatrix();
  const Vec3 wc = target.position() - js[5].d * r.col(2);
  const double a1 = js[0].a, d1 = js[0].d, a2 = js[1].a, a3 = js[2].a, d4 = js[3].d;
  const double l3 = std::hypot(a3, d4);
  const double phi = std::atan2(-d4, a3);
  const double radial = std::hypot(wc.x(), wc.y());

  std::vector<IkSolution> out;
  for (int shoulder = 0; shoulder < 2; ++shoulder) {
    const double th1 = shoulder == 0 ? std::atan2(wc.y(), wc.x()) : std::atan2(-wc.y(), -wc.x());
    const double x = (shoulder == 0 ? radial : -radial) - a1;
    const double y = wc.z() - d1;
    double cb = (x * x + y * y - a2 * a2 - l3 * l3) / (2.0 * a2 * l3);
    if (std::abs(cb) > 1.0 + 1e-9) continue;
    cb = std::clamp(cb, -1.0, 1.0);
    for (int elbow = 0; elbow < 2; ++elbow) {
      const double beta = elbow == 0 ? std::acos(cb) : -std::acos(cb);
      const double th2 = std::atan2(y, x) - std::atan2(l3 * std::sin(beta), a2 + l3 * std::cos(beta));
      const double th3 = beta - phi;

      const Eigen::Matrix4d t03 = dh_matrix(th1, js[0].d, js[0].a, js[0].alpha) *
                                  dh_matrix(th2, js[1].d, js[1].a, js[1].alpha) *
                                  dh_matrix(th3, js[2].d, js[2].a, js[2].alpha);
      const Mat3 r36 = t03.block<3, 3>(0, 0).transpose() * r;
      const double s5 = std::hypot(r36(0, 2), r36(1, 2));

      std::array<std::array<double, 3>, 2> wrists;
      int n_wrists = 2;
      if (s5 > 1e-9) {
        const double th4 = std::atan2(r36(1, 2), r36(0, 2));
        const double th5 = std::atan2(s5, r36(2, 2));
        const double th6 = std::atan2(r36(2, 1), -r36(2, 0));
        wrists[0] = {th4, th5, th6};
        wrists[1] = {th4 + kPi, -th5, th6 + kPi};
      } else {
        // wrist singularity: only theta4 + theta6 (or their difference) is
        // determined, so theta4 is pinned at mid-range
        const double th4 = js[3].mid() + js[3].theta_offset;
        const double th5 = r36(2, 2) > 0.0 ? 0.0 : kPi;
        const Eigen::Matrix4d t35 = dh_matrix(th4, js[3].d, js[3].a, js[3].alpha) *
                                    dh_matrix(th5, js[4].d, js[4].a, js[4].alpha);
        const Mat3 r56 = t35.block<3, 3>(0, 0).transpose() * r36;
        wrists[0] = {th4, th5, std::atan2(r56(1, 0), r56(0, 0))};
        n_wrists = 1;
      }

      for (int w = 0; w < n_wrists; ++w) {
        const std::array<double, 6> dh_theta = {th1, th2, th3, wrists[w][0], wrists[w][1],
                                                wrists[w][2]};
        JointConfig q(6);
        bool ok = true;
        for (int i = 0; i < 6 && ok; ++i)
          ok = fit_to_limits(js[i], dh_theta[i] - js[i].theta_offset, q[i]);
        if (!ok || !accept(m, q, target)) continue;
        push_distinct(out, {q, 4 * shoulder + 2 * elbow + w}, 1e-6);
      }
    }
  }
  return out;
}

std::vector<IkSolution> numeric_ik(const KinematicModel& m, const Pose& target) {
  constexpr int kSeeds = 8;
  constexpr int kMaxIterations = 200;
  std::mt19937_64 rng(0x5eedba5eULL);
  const Transform t = target.transform();
  std::vector<IkSolution> out;
  for (int s = 0; s < kSeeds; ++s) {
    JointConfig seed = m.q_mid();
    if (s > 0) {
      for (int i = 0; i < m.dof(); ++i) {
        std::uniform_real_distribution<double> u(m.joints()[i].q_min, m.joints()[i].q_max);
        seed[i] = u(rng);
      }
    }
    auto res = solve_dls(m, t, seed, kMaxIterations);
    if (res.converged && m.within_limits(res.q)) push_distinct(out, {res.q, s}, 1e-4);
  }
  return out;
}

JointKind parse_kind(const std::string& s) {
  if (s == "revolute") return JointKind::Revolute;
  if (s == "prismatic") return JointKind::Prismatic;
  throw std::invalid_argument("joints[].kind must be 'revolute' or 'prismatic', got '" + s + "'");
}

}  // namespace

KinematicModel::KinematicModel(std::string name, std::vector<JointSpec> joints,
                               double base_height)
    : name_(std::move(name)), joints_(std::move(joints)), base_height_(base_height) {
  if (joints_.size() < 3) throw std::invalid_argument("kinematic model needs at least 3 joints");
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    if (!(joints_[i].q_min < joints_[i].q_max))
      throw std::invalid_argument("joints[" + std::to_string(i) + "]: q_min must be < q_max");
  }
  closed_form_ = matches_spherical_wrist_layout(joints_);
}

KinematicModel KinematicModel::with_base_height(double h) const {
  KinematicModel m = *this;
  m.base_height_ = h;
  return m;
}

JointConfig KinematicModel::q_mid() const {
  JointConfig q(dof());
  for (int i = 0; i < dof(); ++i) q[i] = joints_[i].mid();
  return q;
}

bool KinematicModel::within_limits(const JointConfig& q) const {
  if (q.size() != dof()) return false;
  for (int i = 0; i < dof(); ++i)
    if (q[i] < joints_[i].q_min || q[i] > joints_[i].q_max) return false;
  return true;
}

FrameChain frame_chain(const KinematicModel& m, const JointConfig& q) {
  check_dim(m, q);
  FrameChain c;
  c.frames.reserve(m.dof() + 1);
  c.frames.push_back(Eigen::Matrix4d::Identity());
  for (int i = 0; i < m.dof(); ++i)
    c.frames.push_back(c.frames.back() * link_transform(m.joints()[i], q[i]));
  return c;
}

Eigen::Matrix4d forward_transform(const KinematicModel& m, const JointConfig& q) {
  check_dim(m, q);
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  for (int i = 0; i < m.dof(); ++i) t = t * link_transform(m.joints()[i], q[i]);
  return t;
}

Pose forward_kinematics(const KinematicModel& m, const JointConfig& q) {
  const Eigen::Matrix4d t = forward_transform(m, q);
  return Pose(t.block<3, 1>(0, 3), Quat(Mat3(t.block<3, 3>(0, 0))));
}

Jacobian jacobian(const KinematicModel& m, const JointConfig& q) {
  const FrameChain c = frame_chain(m, q);
  const Vec3 tip = c.frames.back().block<3, 1>(0, 3);
  Jacobian j(6, m.dof());
  for (int i = 0; i < m.dof(); ++i) {
    const Vec3 z = c.frames[i].block<3, 1>(0, 2);
    const Vec3 o = c.frames[i].block<3, 1>(0, 3);
    if (m.joints()[i].kind == JointKind::Revolute) {
      j.block<3, 1>(0, i) = z.cross(tip - o);
      j.block<3, 1>(3, i) = z;
    } else {
      j.block<3, 1>(0, i) = z;
      j.block<3, 1>(3, i).setZero();
    }
  }
  return j;
}

std::pair<double, double> pose_error(const KinematicModel& m, const JointConfig& q,
                                     const Pose& target) {
  const Pose p = forward_kinematics(m, q);
  return {(p.position() - target.position()).norm(),
          rotation_distance(p.orientation(), target.orientation())};
}

std::vector<IkSolution> inverse_kinematics(const KinematicModel& m, const Pose& target,
                                           IkMethod method) {
  if (method == IkMethod::ClosedForm && !m.has_closed_form())
    throw std::invalid_argument("model '" + m.name() + "' has no closed-form IK");
  if (method == IkMethod::Numeric || (method == IkMethod::Auto && !m.has_closed_form()))
    return numeric_ik(m, target);
  auto sols = closed_form_ik(m, target);
  std::sort(sols.begin(), sols.end(),
            [](const IkSolution& a, const IkSolution& b) { return a.branch_id < b.branch_id; });
  return sols;
}

KinematicModel reference_arm() {
  std::vector<JointSpec> js(6);
  js[0] = {JointKind::Revolute, 0.0, kPi / 2, 0.25, 0.0, -170 * kDeg, 170 * kDeg};
  js[1] = {JointKind::Revolute, 0.40, 0.0, 0.0, 0.0, -45 * kDeg, 135 * kDeg};
  js[2] = {JointKind::Revolute, 0.0, kPi / 2, 0.0, 0.0, -120 * kDeg, 80 * kDeg};
  js[3] = {JointKind::Revolute, 0.0, -kPi / 2, 0.35, 0.0, -170 * kDeg, 170 * kDeg};
  js[4] = {JointKind::Revolute, 0.0, kPi / 2, 0.0, kPi / 2, -120 * kDeg, 120 * kDeg};
  js[5] = {JointKind::Revolute, 0.0, 0.0, 0.08, 0.0, -175 * kDeg, 175 * kDeg};
  return KinematicModel("reference-6r-spherical-wrist", std::move(js), 0.0);
}

Pose reference_home_pose() {
  // Rotation by pi about (1, 0, 1)/sqrt(2): x -> z, y -> -y, z -> x.
  const double h = std::sqrt(0.5);
  return Pose(Vec3(0.48, 0.0, -0.10), Quat(0.0, h, 0.0, h));
}

nlohmann::json model_to_json(const KinematicModel& m) {
  nlohmann::json joints = nlohmann::json::array();
  for (const auto& j : m.joints()) {
    joints.push_back({{"kind", j.kind == JointKind::Revolute ? "revolute" : "prismatic"},
                      {"a", j.a},
                      {"alpha", j.alpha},
                      {"d", j.d},
                      {"theta_offset", j.theta_offset},
                      {"q_min", j.q_min},
                      {"q_max", j.q_max}});
  }
  return {{"name", m.name()},
          {"convention", "dh-standard"},
          {"base_height", m.base_height()},
          {"joints", joints}};
}

KinematicModel model_from_json(const nlohmann::json& j) {
  const std::string convention = j.value("convention", "dh-standard");
  if (convention != "dh-standard")
    throw std::invalid_argument("convention must be 'dh-standard', got '" + convention + "'");
  std::vector<JointSpec> joints;
  for (const auto& e : j.at("joints")) {
    JointSpec s;
    s.kind = parse_kind(e.value("kind", std::string("revolute")));
    s.a = e.value("a", 0.0);
    s.alpha = e.value("alpha", 0.0);
    s.d = e.value("d", 0.0);
    s.theta_offset = e.value("theta_offset", 0.0);
    s.q_min = e.at("q_min").get<double>();
    s.q_max = e.at("q_max").get<double>();
    joints.push_back(s);
  }
  return KinematicModel(j.at("name").get<std::string>(), std::move(joints),
                        j.value("base_height", 0.0));
}

KinematicModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open kinematic model file " + path.string());
  return model_from_json(nlohmann::json::parse(in));
}

}  // namespace baseplace
