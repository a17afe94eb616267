#include "baseplace/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace baseplace {
namespace {

double inverse_condition_ratio(const Mat3& a) {
  constexpr double kEps = 1e-12;
  const Eigen::SelfAdjointEigenSolver<Mat3> es(a, Eigen::EigenvaluesOnly);
  const double lo = std::max(0.0, es.eigenvalues()[0]);
  const double hi = std::max(0.0, es.eigenvalues()[2]);
  if (lo < kEps) return 0.0;
  return 1.0 / std::sqrt(hi / lo);
}

}  // namespace

JointWeights JointWeights::uniform(int n) {
  return JointWeights(std::vector<double>(static_cast<std::size_t>(n), 1.0));
}

JointWeights::JointWeights(std::vector<double> w) : w_(std::move(w)) {
  if (w_.empty()) throw std::invalid_argument("joint_weights must not be empty");
  double sum = 0.0;
  for (double v : w_) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("joint_weights must be finite and >= 0");
    sum += v;
  }
  if (!(sum > 0.0)) throw std::invalid_argument("joint_weights must not all be zero");
  for (double& v : w_) v /= sum;
}

JointMarginResult joint_margin(const JointConfig& q, const KinematicModel& m,
                               const JointWeights& w) {
  if (q.size() != m.dof() || w.size() != m.dof())
    throw std::invalid_argument("joint_margin: joint count mismatch");
  JointMarginResult r;
  for (int i = 0; i < m.dof(); ++i) {
    const auto& j = m.joints()[i];
    double mu = std::abs(q[i] - j.mid()) / j.half_range();
    if (mu > 1.0) {
      mu = 1.0;
      r.clamped = true;
    }
    r.score += w[i] * (1.0 - mu);
  }
  return r;
}

double joint_margin_score(const JointConfig& q, const KinematicModel& m, const JointWeights& w) {
  return joint_margin(q, m, w).score;
}

ManipulabilityScore manipulability_score(const Jacobian& j) {
  if (j.cols() < 3) throw std::invalid_argument("manipulability needs at least 3 joints");
  const auto jv = j.topRows<3>();
  const auto jw = j.bottomRows<3>();
  return {inverse_condition_ratio(jv * jv.transpose()), inverse_condition_ratio(jw * jw.transpose())};
}

PoseScore pose_score(const KinematicModel& m, const BasePose& base, const Pose& entry,
                     const JointWeights& w) {
  const Pose local = express_in_base(base, m.base_height(), entry);
  PoseScore best;
  for (const auto& sol : inverse_kinematics(m, local)) {
    PoseScore s;
    s.feasible = true;
    s.branch_id = sol.branch_id;
    s.jm = joint_margin_score(sol.q, m, w);
    const auto ms = manipulability_score(jacobian(m, sol.q));
    s.lm = ms.linear;
    s.am = ms.angular;
    if (!best.feasible || s.total() > best.total()) best = s;
  }
  return best;
}

FinalScore final_score(const KinematicModel& m, const BasePose& base,
                       const RepresentativeSet& set, double alpha, const JointWeights& w) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  FinalScore f;
  for (std::size_t i = 0; i < set.entries.size(); ++i) {
    const auto& e = set.entries[i];
    const double weight = e.visited ? 1.0 : alpha;
    if (weight == 0.0) continue;
    const PoseScore s = pose_score(m, base, e.pose(), w);
    f.per_entry.push_back({i, s, weight});
    f.value += weight * s.total();
  }
  return f;
}

double final_score_value(const KinematicModel& m, const BasePose& base,
                         const RepresentativeSet& set, double alpha, const JointWeights& w) {
  return final_score(m, base, set, alpha, w).value;
}

}  // namespace baseplace
