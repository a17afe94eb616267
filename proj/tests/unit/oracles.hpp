#pragma once
// Reference implementations used to cross-check the library. They share no
// code with it beyond the data types.

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "baseplace/dataset.hpp"
#include "baseplace/kinematics.hpp"
#include "baseplace/scoring.hpp"

namespace oracle {

using Mat4 = std::array<double, 16>;  // row-major

/// Product of the DH link matrices written out with plain arrays.
Mat4 dh_forward(const baseplace::KinematicModel& m, const std::vector<double>& q);

/// Central differences of the oracle FK: rows 0-2 dp/dq, rows 3-5 the vee of
/// dR/dq * R^T.
std::vector<std::array<double, 6>> numeric_jacobian(const baseplace::KinematicModel& m,
                                                    const std::vector<double>& q, double h);

/// Levenberg-Marquardt on the 12-entry residual [p - p*, vec(R - R*)] from
/// `seeds` random in-limit starts. Returns the distinct in-limit solutions
/// (angles wrapped to (-pi, pi], duplicates within `dedupe` merged).
std::vector<std::vector<double>> ik_sweep(const baseplace::KinematicModel& m, const Mat4& target,
                                          int seeds, std::uint64_t seed, double dedupe = 1e-5);

/// Mean silhouette with the usual definition; singleton members score 0.
double silhouette(const std::vector<baseplace::Vec3>& x, const std::vector<int>& labels);

/// Flat-kernel mode seeking from every sample, then greedy merge of modes
/// closer than bandwidth/2 in order of decreasing support.
std::vector<baseplace::Vec3> mean_shift_modes(const std::vector<baseplace::Vec3>& x, double bw);

/// Best jm + m over every IK branch, scored with the textbook formulas.
double best_branch_score(const baseplace::KinematicModel& m, const baseplace::BasePose& base,
                         const baseplace::Pose& entry, const std::vector<double>& weights);

/// Sum of three Gaussian bumps over the base box, peak heights near 100.
struct BumpField {
  struct Bump {
    double x, y, theta, sx, sy, stheta, height;
  };
  std::vector<Bump> bumps;
  double operator()(const baseplace::BasePose& b) const;
};
BumpField three_bumps(const baseplace::BaseRange& r);

baseplace::SampleSet field_dataset(const BumpField& f, const baseplace::BaseRange& r,
                                   std::size_t rows, std::uint64_t seed);

}  // namespace oracle
