#include "baseplace/config.hpp"

#include <stdexcept>

#include "baseplace/io.hpp"

namespace baseplace {
namespace {

constexpr double kDeg = kPi / 180.0;

nlohmann::json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

Vec3 vec_from(const nlohmann::json& j, const char* name) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw std::invalid_argument(std::string(name) + " needs 3 components");
  return Vec3(v[0], v[1], v[2]);
}

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

}  // namespace

GridSpec GridConfig::build(const BaseRange& r) const {
  if (counts) return GridSpec::from_counts(r, (*counts)[0], (*counts)[1], (*counts)[2]);
  const std::array<double, 3> s = step.value_or(std::array<double, 3>{0.005, 0.005, 0.5 * kDeg});
  return GridSpec::from_steps(r, s[0], s[1], s[2]);
}

const BaseRange& RunConfig::base_range() const {
  const auto it = base_ranges.find(arm);
  if (it == base_ranges.end()) throw std::invalid_argument("base_ranges has no entry for arm '" + arm + "'");
  return it->second;
}

KinematicModel RunConfig::load_kinematic_model() const {
  KinematicModel m = model_path.empty() ? reference_arm() : load_model(base_dir / model_path);
  return base_height ? m.with_base_height(*base_height) : m;
}

JointWeights RunConfig::weights_for(const KinematicModel& m) const {
  if (!joint_weights) return JointWeights::uniform(m.dof());
  if (static_cast<int>(joint_weights->size()) != m.dof())
    throw std::invalid_argument("joint_weights has " + std::to_string(joint_weights->size()) +
                                " entries but the model has " + std::to_string(m.dof()) + " joints");
  return JointWeights(*joint_weights);
}

void RunConfig::validate() const {
  if (arm != "L" && arm != "R") throw std::invalid_argument("arm must be \"L\" or \"R\"");
  for (const auto& [name, r] : base_ranges) r.validate();
  (void)base_range();
  (void)workspace.build();
  if (!model_path.empty() && !std::filesystem::exists(base_dir / model_path))
    throw std::invalid_argument("model_path does not exist: " + (base_dir / model_path).string());
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (joint_weights) (void)JointWeights(*joint_weights);
  if (pattern.bandwidths.size() < 2) throw std::invalid_argument("pattern.bandwidths needs >= 2 candidates");
  for (double b : pattern.bandwidths)
    if (!(b > 0.0)) throw std::invalid_argument("pattern.bandwidths must be > 0");
  if (!(pattern.min_cluster_fraction >= 0.0 && pattern.min_cluster_fraction <= 1.0))
    throw std::invalid_argument("pattern.min_cluster_fraction must lie in [0, 1]");
  if (!(min_displacement >= 0.0)) throw std::invalid_argument("min_displacement must be >= 0");
  if (samples < 10) throw std::invalid_argument("samples must be >= 10");
  if (n_random < 1) throw std::invalid_argument("n_random must be >= 1");
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  if (grid.step && grid.counts) throw std::invalid_argument("grid: give either step or counts, not both");
  (void)grid.build(base_range());
  if (train.mlp.epochs < 1) throw std::invalid_argument("train.epochs must be >= 1");
  if (train.mlp.batch_size < 1) throw std::invalid_argument("train.batch_size must be >= 1");
  if (!(train.mlp.learning_rate > 0.0)) throw std::invalid_argument("train.learning_rate must be > 0");
  if (!(train.mlp.holdout_fraction > 0.0 && train.mlp.holdout_fraction < 1.0))
    throw std::invalid_argument("train.holdout_fraction must lie in (0, 1)");
  if (train.regressor != "mlp" && train.regressor != "lasso")
    throw std::invalid_argument("train.regressor must be \"mlp\" or \"lasso\"");
  if (!(train.lasso_alpha >= 0.0)) throw std::invalid_argument("train.lasso_alpha must be >= 0");
  profile.validate();
}

RunConfig default_config() {
  RunConfig c;
  c.base_ranges["R"] = {{1.188, 1.888}, {-0.212, 0.488}, {-120 * kDeg, -60 * kDeg}};
  c.base_ranges["L"] = {{1.190, 1.890}, {-0.487, 0.213}, {-120 * kDeg, -60 * kDeg}};
  c.grid.step = std::array<double, 3>{0.005, 0.005, 0.5 * kDeg};
  c.profile = planted_profile(c.workspace.build(), {3, 2, 2, 1, 1, 1, 2, 1, 3, 1, 2, 1}, 0.05, 2024);
  c.profile.name = "default-operator";
  c.profile.dwell = 12.0;
  return c;
}

nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json ranges = nlohmann::json::object();
  for (const auto& [name, r] : c.base_ranges) ranges[name] = range_to_json(r);
  nlohmann::json grid = nlohmann::json::object();
  if (c.grid.step) grid["step"] = *c.grid.step;
  if (c.grid.counts) grid["counts"] = *c.grid.counts;
  return {
      {"format_version", kFormatVersion},
      {"seed", c.seed},
      {"arm", c.arm},
      {"workspace",
       {{"origin", vec_json(c.workspace.origin)},
        {"dims", vec_json(c.workspace.dims)},
        {"voxel_size", c.workspace.voxel_size}}},
      {"model_path", c.model_path},
      {"base_height", c.base_height ? nlohmann::json(*c.base_height) : nlohmann::json(nullptr)},
      {"base_ranges", ranges},
      {"alpha", c.alpha},
      {"joint_weights", c.joint_weights ? nlohmann::json(*c.joint_weights) : nlohmann::json(nullptr)},
      {"pattern",
       {{"bandwidths", c.pattern.bandwidths},
        {"min_cluster_fraction", c.pattern.min_cluster_fraction},
        {"min_cluster_floor", c.pattern.min_cluster_floor},
        {"min_visits", c.pattern.min_visits},
        {"min_displacement", c.min_displacement}}},
      {"samples", c.samples},
      {"grid", grid},
      {"train",
       {{"hidden", c.train.mlp.hidden},
        {"learning_rate", c.train.mlp.learning_rate},
        {"epochs", c.train.mlp.epochs},
        {"batch_size", c.train.mlp.batch_size},
        {"holdout_fraction", c.train.mlp.holdout_fraction},
        {"regressor", c.train.regressor},
        {"compare_lasso", c.train.compare_lasso},
        {"lasso_alpha", c.train.lasso_alpha}}},
      {"n_random", c.n_random},
      {"n_samples", c.n_samples},
      {"profile", profile_to_json(c.profile)},
  };
}

RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  RunConfig c = default_config();
  c.base_dir = base_dir;
  try {
    if (j.contains("format_version") && j["format_version"].get<int>() != kFormatVersion)
      throw std::invalid_argument("unsupported config format_version");
    read_opt(j, "seed", c.seed);
    read_opt(j, "arm", c.arm);
    if (j.contains("workspace")) {
      const auto& w = j["workspace"];
      if (w.contains("origin")) c.workspace.origin = vec_from(w["origin"], "workspace.origin");
      if (w.contains("dims")) c.workspace.dims = vec_from(w["dims"], "workspace.dims");
      read_opt(w, "voxel_size", c.workspace.voxel_size);
    }
    read_opt(j, "model_path", c.model_path);
    if (j.contains("base_height"))
      c.base_height = j["base_height"].is_null() ? std::nullopt
                                                 : std::optional<double>(j["base_height"].get<double>());
    if (j.contains("base_ranges")) {
      c.base_ranges.clear();
      for (auto it = j["base_ranges"].begin(); it != j["base_ranges"].end(); ++it)
        c.base_ranges[it.key()] = range_from_json(it.value());
    }
    read_opt(j, "alpha", c.alpha);
    if (j.contains("joint_weights"))
      c.joint_weights = j["joint_weights"].is_null()
                            ? std::nullopt
                            : std::optional<std::vector<double>>(j["joint_weights"].get<std::vector<double>>());
    if (j.contains("pattern")) {
      const auto& p = j["pattern"];
      read_opt(p, "bandwidths", c.pattern.bandwidths);
      read_opt(p, "min_cluster_fraction", c.pattern.min_cluster_fraction);
      read_opt(p, "min_cluster_floor", c.pattern.min_cluster_floor);
      read_opt(p, "min_visits", c.pattern.min_visits);
      read_opt(p, "min_displacement", c.min_displacement);
    }
    read_opt(j, "samples", c.samples);
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      c.grid = {};
      if (g.contains("step") && !g["step"].is_null()) c.grid.step = g["step"].get<std::array<double, 3>>();
      if (g.contains("counts") && !g["counts"].is_null()) c.grid.counts = g["counts"].get<std::array<int, 3>>();
    }
    if (j.contains("train")) {
      const auto& t = j["train"];
      read_opt(t, "hidden", c.train.mlp.hidden);
      read_opt(t, "learning_rate", c.train.mlp.learning_rate);
      read_opt(t, "epochs", c.train.mlp.epochs);
      read_opt(t, "batch_size", c.train.mlp.batch_size);
      read_opt(t, "holdout_fraction", c.train.mlp.holdout_fraction);
      read_opt(t, "regressor", c.train.regressor);
      read_opt(t, "compare_lasso", c.train.compare_lasso);
      read_opt(t, "lasso_alpha", c.train.lasso_alpha);
    }
    read_opt(j, "n_random", c.n_random);
    read_opt(j, "n_samples", c.n_samples);
    if (j.contains("profile")) c.profile = profile_from_json(j["profile"]);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.train.mlp.seed = c.stage_seed(Stage::Train);
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_json(path), path.parent_path().empty() ? "." : path.parent_path());
}

void apply_override(nlohmann::json& doc, const std::string& dotted_path, const std::string& value) {
  if (dotted_path.empty()) throw std::invalid_argument("--set needs a field path");
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(value);
  } catch (const nlohmann::json::parse_error&) {
    parsed = value;
  }
  nlohmann::json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const std::size_t dot = dotted_path.find('.', start);
    const std::string key = dotted_path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw std::invalid_argument("malformed field path '" + dotted_path + "'");
    nlohmann::json* next;
    if (node->is_array()) {
      const std::size_t idx = std::stoul(key);
      if (idx >= node->size()) throw std::invalid_argument("index out of range in '" + dotted_path + "'");
      next = &(*node)[idx];
    } else {
      if (!node->is_object() && !node->is_null())
        throw std::invalid_argument("'" + dotted_path + "' descends into a non-object field");
      next = &(*node)[key];
    }
    if (dot == std::string::npos) {
      *next = parsed;
      return;
    }
    node = next;
    start = dot + 1;
  }
}

std::string config_digest(const RunConfig& c) { return digest(config_to_json(c).dump()); }

}  // namespace baseplace
