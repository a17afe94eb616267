#pragma once
// Single configuration document driving every CLI command.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "baseplace/kinematics.hpp"
#include "baseplace/optimizer.hpp"
#include "baseplace/pattern.hpp"
#include "baseplace/regression.hpp"
#include "baseplace/scoring.hpp"
#include "baseplace/tracegen.hpp"

namespace baseplace {

struct WorkspaceConfig {
  Vec3 origin = Vec3(1.44, -0.50, 0.05);
  Vec3 dims = Vec3(0.2, 0.1, 0.1);
  double voxel_size = 0.02;

  Workspace build() const { return Workspace(origin, dims, voxel_size); }
};

struct GridConfig {
  std::optional<std::array<double, 3>> step;  // X [m], Y [m], Theta [rad]
  std::optional<std::array<int, 3>> counts;

  GridSpec build(const BaseRange& r) const;
};

struct TrainConfig {
  MlpHyperParams mlp;  // mlp.seed is derived from the run seed
  std::string regressor = "mlp";
  bool compare_lasso = true;
  double lasso_alpha = 0.5;
};

/// Stage seeds derive from `seed`: traces +0, dataset +1, train +2, evaluate +3.
enum class Stage { Traces = 0, Dataset = 1, Train = 2, Evaluate = 3 };

struct RunConfig {
  std::uint64_t seed = 1;
  std::string arm = "R";
  WorkspaceConfig workspace;
  std::string model_path;  // empty = built-in reference arm
  std::optional<double> base_height;
  std::map<std::string, BaseRange> base_ranges;
  double alpha = 0.0;
  std::optional<std::vector<double>> joint_weights;
  PatternConfig pattern;
  double min_displacement = 0.0;
  std::size_t samples = 20000;
  GridConfig grid;
  TrainConfig train;
  std::size_t n_random = 1000;
  std::size_t n_samples = 18839;
  OperatorProfile profile;

  /// Directory relative paths are resolved against.
  std::filesystem::path base_dir = ".";

  std::uint64_t stage_seed(Stage s) const { return seed + static_cast<std::uint64_t>(s); }
  const BaseRange& base_range() const;
  KinematicModel load_kinematic_model() const;
  JointWeights weights_for(const KinematicModel& m) const;
  void validate() const;
};

/// Defaults: full-scale workspace and right/left base ranges, default
/// synthetic operator, 20,000 samples, 0.005 m / 0.5 deg grid.
RunConfig default_config();

nlohmann::json config_to_json(const RunConfig& c);
/// Missing fields keep their defaults.
RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

/// Sets the value at a dotted path ("train.mlp.epochs"). `value` is parsed as
/// JSON when possible, otherwise taken as a string.
void apply_override(nlohmann::json& doc, const std::string& dotted_path, const std::string& value);

std::string config_digest(const RunConfig& c);

}  // namespace baseplace
