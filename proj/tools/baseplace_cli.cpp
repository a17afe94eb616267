// baseplace: base placement from operator working patterns.
//
//   baseplace gen-traces --out traces.jsonl
//   baseplace analyze traces.jsonl --out repset.json
//   baseplace sample repset.json --out dataset.csv
//   baseplace train dataset.csv --out model.json
//   baseplace optimize model.json --out best.json
//   baseplace score-map model.json --theta -1.57 --out map.csv
//   baseplace evaluate best.json test_repset.json

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "baseplace/config.hpp"
#include "baseplace/dataset.hpp"
#include "baseplace/io.hpp"
#include "baseplace/optimizer.hpp"
#include "baseplace/pattern.hpp"
#include "baseplace/regression.hpp"
#include "baseplace/tracegen.hpp"

namespace bp = baseplace;
using nlohmann::json;

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> sets;
};

struct Context {
  bp::RunConfig cfg;
  std::string digest;
  json prov;
};

Context load_context(const CommonOptions& o) {
  json doc;
  std::filesystem::path base_dir = ".";
  if (!o.config_path.empty()) {
    doc = bp::read_json(o.config_path);
    const auto parent = std::filesystem::path(o.config_path).parent_path();
    if (!parent.empty()) base_dir = parent;
  } else {
    doc = bp::config_to_json(bp::default_config());
  }
  if (o.seed) doc["seed"] = *o.seed;
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects <dotted.path>=<value>, got '" + s + "'");
    bp::apply_override(doc, s.substr(0, eq), s.substr(eq + 1));
  }
  Context c{bp::config_from_json(doc, base_dir), {}, {}};
  c.digest = bp::config_digest(c.cfg);
  c.prov = bp::provenance(c.digest);
  return c;
}

void emit(const json& summary) { std::cout << summary.dump() << '\n'; }

void write_json(const std::string& path, json doc) {
  bp::write_text(path, doc.dump(2) + '\n');
}

std::string require_out(const CommonOptions& o, const char* cmd) {
  if (o.out.empty()) throw std::invalid_argument(std::string(cmd) + " needs --out <path>");
  return o.out;
}

void check_range(const bp::Regressor& r, const bp::BaseRange& cfg_range) {
  const auto a = bp::normalizer_of(r).range().axes();
  const auto b = cfg_range.axes();
  static const char* names[] = {"x", "y", "theta"};
  for (int i = 0; i < 3; ++i)
    if (std::abs(a[i].lo - b[i].lo) > 1e-9 || std::abs(a[i].hi - b[i].hi) > 1e-9)
      throw std::invalid_argument(std::string("range mismatch: model normalizer ") + names[i] + " [" +
                                  bp::format_g17(a[i].lo) + ", " + bp::format_g17(a[i].hi) +
                                  "] vs config [" + bp::format_g17(b[i].lo) + ", " +
                                  bp::format_g17(b[i].hi) + "]");
}

int cmd_gen_traces(const CommonOptions& o) {
  const auto out = require_out(o, "gen-traces");
  const auto ctx = load_context(o);
  const auto& cfg = ctx.cfg;
  const auto poses = bp::generate_traces(cfg.profile, cfg.workspace.build(), cfg.n_samples,
                                         cfg.stage_seed(bp::Stage::Traces));
  std::vector<bp::TraceRecord> records(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i)
    records[i] = {static_cast<double>(i) * cfg.profile.sample_period, cfg.profile.arm, poses[i]};
  bp::write_traces(out, records);
  emit({{"command", "gen-traces"}, {"samples", records.size()}, {"out", out}, {"provenance", ctx.prov}});
  return 0;
}

int cmd_analyze(const CommonOptions& o, const std::string& traces) {
  const auto out = require_out(o, "analyze");
  const auto ctx = load_context(o);
  const auto& cfg = ctx.cfg;
  std::vector<bp::Pose> poses;
  std::size_t other_arm = 0;
  bp::read_traces(traces, [&](const bp::TraceRecord& r) {
    if (r.arm == cfg.arm)
      poses.push_back(r.pose);
    else
      ++other_arm;
  });
  if (poses.empty()) throw std::invalid_argument("no samples in " + traces + " for arm " + cfg.arm);

  const auto ws = cfg.workspace.build();
  const auto grid = bp::voxelize(poses, ws, cfg.min_displacement);
  const auto set = bp::representative_poses(grid, ws, cfg.pattern);

  const double out_fraction = static_cast<double>(grid.out_of_workspace) / grid.total_samples;
  if (out_fraction > 0.5)
    std::cerr << json{{"warning", "more than half of the samples lie outside the workspace"},
                      {"out_of_workspace_fraction", out_fraction}}.dump()
              << '\n';

  std::vector<const bp::VoxelStats*> visited;
  for (const auto& v : grid.voxels)
    if (v.visit_count > 0) visited.push_back(&v);
  std::stable_sort(visited.begin(), visited.end(),
                   [](const auto* a, const auto* b) { return a->visit_count > b->visit_count; });
  json table = json::array();
  for (const auto* v : visited)
    table.push_back({{"voxel_id", v->id},
                     {"center", {v->center.x(), v->center.y(), v->center.z()}},
                     {"visits", v->visit_count}});

  json doc = bp::repset_to_json(set);
  doc["provenance"] = ctx.prov;
  doc["visit_counts"] = table;
  doc["other_arm_samples"] = other_arm;
  write_json(out, doc);
  emit({{"command", "analyze"},
        {"samples", grid.total_samples},
        {"out_of_workspace", grid.out_of_workspace},
        {"voxels_visited", set.voxels_visited},
        {"entries", set.size()},
        {"out", out}});
  return 0;
}

int cmd_sample(const CommonOptions& o, const std::string& repset) {
  const auto out = require_out(o, "sample");
  const auto ctx = load_context(o);
  const auto& cfg = ctx.cfg;
  const auto text = bp::read_text(repset);
  const auto set = bp::repset_from_json(json::parse(text));
  const auto model = cfg.load_kinematic_model();
  auto d = bp::build_dataset(model, set, cfg.base_range(), cfg.samples, cfg.stage_seed(bp::Stage::Dataset),
                             cfg.alpha, cfg.weights_for(model));
  d.repset_digest = bp::digest(text);
  bp::write_dataset(d, out, ctx.prov);
  emit({{"command", "sample"}, {"rows", d.size()}, {"out", out}});
  return 0;
}

json report_json(const bp::EvalReport& r) { return {{"rmse", r.rmse}, {"sd", r.sd}, {"rows", r.rows}}; }

int cmd_train(const CommonOptions& o, const std::string& dataset) {
  const auto out = require_out(o, "train");
  const auto ctx = load_context(o);
  const auto& cfg = ctx.cfg;
  const auto d = bp::read_dataset(dataset);
  const auto& hp = cfg.train.mlp;
  const auto split = bp::split_dataset(d.rows, hp.holdout_fraction, hp.seed);

  json summary = {{"command", "train"}, {"out", out}, {"holdout_rows", split.test.size()}};
  std::optional<bp::Regressor> chosen;
  if (cfg.train.regressor == "mlp") {
    auto mlp = bp::train_mlp(d, hp);
    summary["mlp"] = report_json(mlp.training.holdout);
    chosen = std::move(mlp);
  }
  if (cfg.train.regressor == "lasso" || cfg.train.compare_lasso) {
    bp::SampleSet train_part = d;
    train_part.rows = split.train;
    bp::Regressor lasso = bp::train_lasso(train_part, cfg.train.lasso_alpha);
    summary["lasso"] = report_json(bp::evaluate(lasso, split.test));
    if (!chosen) chosen = std::move(lasso);
  }
  bp::save_regressor(*chosen, out, ctx.prov);
  emit(summary);
  return 0;
}

int cmd_optimize(const CommonOptions& o, const std::string& model_path) {
  const auto out = require_out(o, "optimize");
  const auto ctx = load_context(o);
  const auto r = bp::load_regressor(model_path);
  check_range(r, ctx.cfg.base_range());
  const auto g = ctx.cfg.grid.build(ctx.cfg.base_range());
  const auto res = bp::grid_search(r, g);
  json doc = bp::optim_result_to_json(res);
  doc["provenance"] = ctx.prov;
  write_json(out, doc);
  emit({{"command", "optimize"},
        {"best", {res.best.x, res.best.y, res.best.theta}},
        {"best_score", res.best_score},
        {"grid_points_evaluated", res.grid_points_evaluated},
        {"out", out}});
  return 0;
}

int cmd_score_map(const CommonOptions& o, const std::string& model_path, double theta) {
  const auto out = require_out(o, "score-map");
  const auto ctx = load_context(o);
  const auto r = bp::load_regressor(model_path);
  check_range(r, ctx.cfg.base_range());
  const auto g = ctx.cfg.grid.build(ctx.cfg.base_range());
  const auto rows = bp::export_score_map(r, g, theta);
  bp::write_text(out, bp::score_map_csv(rows));
  write_json(out + ".meta.json", {{"provenance", ctx.prov}, {"theta", theta}, {"rows", rows.size()}});
  emit({{"command", "score-map"}, {"rows", rows.size()}, {"out", out}});
  return 0;
}

// Accepts an optimize result, a trained model (grid-searched here) or a
// literal "X,Y,Theta".
bp::BasePose resolve_pose(const std::string& arg, const Context& ctx) {
  if (!std::filesystem::exists(arg)) {
    const auto v = bp::parse_csv_doubles(arg);
    if (v.size() != 3) throw std::invalid_argument("'" + arg + "' is neither a file nor X,Y,Theta");
    return bp::BasePose(v[0], v[1], v[2]);
  }
  const auto doc = bp::read_json(arg);
  if (doc.contains("best")) return bp::optim_result_from_json(doc).best;
  const auto r = bp::regressor_from_json(doc);
  check_range(r, ctx.cfg.base_range());
  return bp::grid_search(r, ctx.cfg.grid.build(ctx.cfg.base_range())).best;
}

int cmd_evaluate(const CommonOptions& o, const std::string& model_or_pose, const std::string& test_repset) {
  const auto ctx = load_context(o);
  const auto& cfg = ctx.cfg;
  const auto best = resolve_pose(model_or_pose, ctx);
  const auto set = bp::repset_from_json(bp::read_json(test_repset));
  const auto model = cfg.load_kinematic_model();
  const auto rep = bp::evaluate_against_random(model, set, best, cfg.base_range(), cfg.n_random,
                                               cfg.stage_seed(bp::Stage::Evaluate), cfg.alpha,
                                               cfg.weights_for(model));
  json doc = bp::baseline_to_json(rep);
  doc["best"] = {best.x, best.y, best.theta};
  doc["provenance"] = ctx.prov;
  if (!o.out.empty()) write_json(o.out, doc);
  doc["command"] = "evaluate";
  emit(doc);
  return 0;
}

void add_common(CLI::App* sub, CommonOptions& o) {
  sub->add_option("--config", o.config_path, "Run configuration (JSON)")->check(CLI::ExistingFile);
  sub->add_option("--seed", o.seed, "Overrides the config seed");
  sub->add_option("--out", o.out, "Output path");
  sub->add_option("--set", o.sets, "Override a config field: <dotted.path>=<value>")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal base placement from an operator's working pattern"};
  app.set_version_flag("--version", BASEPLACE_VERSION);
  app.require_subcommand(1);

  CommonOptions o;
  std::string in1, in2;
  double theta = 0.0;

  auto* gen = app.add_subcommand("gen-traces", "Write synthetic operator traces");
  auto* analyze = app.add_subcommand("analyze", "Traces -> representative set");
  analyze->add_option("traces", in1)->required()->check(CLI::ExistingFile);
  auto* sample = app.add_subcommand("sample", "Representative set -> scored base dataset");
  sample->add_option("repset", in1)->required()->check(CLI::ExistingFile);
  auto* train = app.add_subcommand("train", "Dataset -> score regressor");
  train->add_option("dataset", in1)->required()->check(CLI::ExistingFile);
  auto* optimize = app.add_subcommand("optimize", "Grid-search the regressed score map");
  optimize->add_option("model", in1)->required()->check(CLI::ExistingFile);
  auto* score_map = app.add_subcommand("score-map", "Fixed-Theta slice of the score map");
  score_map->add_option("model", in1)->required()->check(CLI::ExistingFile);
  score_map->add_option("--theta", theta, "Theta [rad]")->required();
  auto* evaluate = app.add_subcommand("evaluate", "Optimal base vs random placements");
  evaluate->add_option("model_or_pose", in1)->required();
  evaluate->add_option("test_repset", in2)->required()->check(CLI::ExistingFile);
  for (auto* sub : {gen, analyze, sample, train, optimize, score_map, evaluate}) add_common(sub, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << json{{"error", "usage"}, {"message", e.what()}}.dump() << '\n';
    return 2;
  }

  try {
    if (*gen) return cmd_gen_traces(o);
    if (*analyze) return cmd_analyze(o, in1);
    if (*sample) return cmd_sample(o, in1);
    if (*train) return cmd_train(o, in1);
    if (*optimize) return cmd_optimize(o, in1);
    if (*score_map) return cmd_score_map(o, in1, theta);
    if (*evaluate) return cmd_evaluate(o, in1, in2);
  } catch (const bp::ParseError& e) {
    std::cerr << json{{"error", "parse"}, {"file", e.file()}, {"line", e.line()}, {"message", e.what()}}.dump()
              << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "failed"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
  return 1;
}
