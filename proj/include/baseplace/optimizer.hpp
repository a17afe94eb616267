#pragma once
// Exhaustive grid search over the regressed score map, score-map slices
// for contour plots, and the comparison against random placements.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "baseplace/regression.hpp"

namespace baseplace {

/// Regular grid over a base range. Built either from explicit steps
/// (floor(span/step)+1 points per axis) or from explicit point counts.
class GridSpec {
 public:
  static GridSpec from_steps(const BaseRange& r, double step_x, double step_y, double step_theta);
  static GridSpec from_counts(const BaseRange& r, int nx, int ny, int ntheta);

  const BaseRange& range() const { return range_; }
  const std::array<double, 3>& steps() const { return steps_; }
  const std::array<int, 3>& counts() const { return counts_; }
  std::size_t size() const;
  /// Value of grid coordinate k along axis (0 = X, 1 = Y, 2 = Theta).
  double coordinate(int axis, int k) const;
  /// X-major, then Y, then Theta.
  BasePose point(std::size_t index) const;

 private:
  BaseRange range_;
  std::array<double, 3> steps_{};
  std::array<int, 3> counts_{};
};

struct ScoredPose {
  BasePose pose;
  double score = 0.0;
};

struct OptimResult {
  BasePose best;
  double best_score = 0.0;
  std::size_t grid_points_evaluated = 0;
  std::vector<ScoredPose> runner_ups;  // next-best grid points, best first
};

struct BaselineReport {
  double optimal_score = 0.0;
  double random_mean = 0.0;
  double random_sd = 0.0;
  std::size_t n_random = 0;
  double improvement_pct = 0.0;
  double random_p99 = 0.0;
};

/// Argmax of the regressor over every grid point; ties go to the lowest
/// (X, Y, Theta).
OptimResult grid_search(const Regressor& r, const GridSpec& g, std::size_t top_k = 10);

struct ScoreMapRow {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double score = 0.0;
};

/// Fixed-Theta slice, rows ordered X-major then Y.
std::vector<ScoreMapRow> export_score_map(const Regressor& r, const GridSpec& g, double theta_fixed);

/// Ground-truth final score at `best` against seeded uniform placements.
BaselineReport evaluate_against_random(const KinematicModel& m, const RepresentativeSet& test_set,
                                       const BasePose& best, const BaseRange& range,
                                       std::size_t n_random, std::uint64_t seed, double alpha,
                                       const JointWeights& w);
BaselineReport evaluate_against_bases(const KinematicModel& m, const RepresentativeSet& test_set,
                                      const BasePose& best, std::span<const BasePose> others,
                                      double alpha, const JointWeights& w);

nlohmann::json optim_result_to_json(const OptimResult& r);
OptimResult optim_result_from_json(const nlohmann::json& j);
nlohmann::json baseline_to_json(const BaselineReport& r);
std::string score_map_csv(std::span<const ScoreMapRow> rows);

}  // namespace baseplace
