// Python extension. Structured documents (configs, representative sets,
// regressors) cross the boundary as JSON text; the package wraps them as dicts.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "baseplace/config.hpp"
#include "baseplace/dataset.hpp"
#include "baseplace/io.hpp"

namespace py = pybind11;
using namespace baseplace;

namespace {

using Rows = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

KinematicModel model_arg(const std::string& model_json) {
  return model_json.empty() ? reference_arm() : model_from_json(nlohmann::json::parse(model_json));
}

RunConfig config_arg(const std::string& config_json) {
  return config_json.empty() ? default_config() : config_from_json(nlohmann::json::parse(config_json));
}

std::vector<Pose> poses_from(const Rows& p, const Rows& q) {
  if (p.cols() != 3 || q.cols() != 4 || p.rows() != q.rows())
    throw std::invalid_argument("expected positions (N, 3) and quaternions (N, 4) with w first");
  std::vector<Pose> out;
  out.reserve(p.rows());
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    out.emplace_back(Vec3(p(i, 0), p(i, 1), p(i, 2)), Quat(q(i, 0), q(i, 1), q(i, 2), q(i, 3)).normalized());
  return out;
}

std::vector<BasePose> bases_from(const Rows& b) {
  if (b.cols() != 3) throw std::invalid_argument("expected base poses (N, 3)");
  std::vector<BasePose> out;
  for (Eigen::Index i = 0; i < b.rows(); ++i) out.emplace_back(b(i, 0), b(i, 1), b(i, 2));
  return out;
}

Rows rows_of(const SampleSet& d) {
  Rows out(d.size(), 4);
  for (std::size_t i = 0; i < d.size(); ++i)
    out.row(i) << d.rows[i].base.x, d.rows[i].base.y, d.rows[i].base.theta, d.rows[i].score;
  return out;
}

SampleSet set_from(const Rows& rows, const RunConfig& c) {
  if (rows.cols() != 4) throw std::invalid_argument("expected dataset rows (N, 4): X, Y, Theta, score");
  SampleSet d;
  d.range = c.base_range();
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    d.rows.push_back({BasePose(rows(i, 0), rows(i, 1), rows(i, 2)), rows(i, 3)});
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Operator-aware robot base placement";
  m.attr("__version__") = BASEPLACE_VERSION;

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);

  m.def("default_config", [] { return config_to_json(default_config()).dump(); });
  m.def("normalize_config", [](const std::string& j) { return config_to_json(config_arg(j)).dump(); });
  m.def("reference_arm", [] { return model_to_json(reference_arm()).dump(); });

  m.def(
      "forward_kinematics",
      [](const Eigen::VectorXd& q, const std::string& model) {
        const Pose p = forward_kinematics(model_arg(model), q);
        const Quat& r = p.orientation();
        return py::make_tuple(Vec3(p.position()), Eigen::Vector4d(r.w(), r.x(), r.y(), r.z()));
      },
      py::arg("q"), py::arg("model") = "");

  m.def(
      "inverse_kinematics",
      [](const Vec3& p, const Eigen::Vector4d& q, const std::string& model) {
        const auto sols = inverse_kinematics(model_arg(model), Pose(p, Quat(q[0], q[1], q[2], q[3]).normalized()));
        std::vector<Eigen::VectorXd> out;
        for (const auto& s : sols) out.push_back(s.q);
        return out;
      },
      py::arg("position"), py::arg("quaternion"), py::arg("model") = "");

  m.def(
      "jacobian", [](const Eigen::VectorXd& q, const std::string& model) { return Eigen::MatrixXd(jacobian(model_arg(model), q)); },
      py::arg("q"), py::arg("model") = "");

  m.def(
      "joint_margin_score",
      [](const Eigen::VectorXd& q, const std::string& model) {
        const auto km = model_arg(model);
        return joint_margin_score(q, km, JointWeights::uniform(km.dof()));
      },
      py::arg("q"), py::arg("model") = "");

  m.def("manipulability", [](const Eigen::MatrixXd& j) {
    const auto s = manipulability_score(j);
    return py::make_tuple(s.linear, s.angular);
  });

  m.def(
      "analyze",
      [](const Rows& positions, const Rows& quats, const std::string& config) {
        const auto c = config_arg(config);
        const auto w = c.workspace.build();
        const auto poses = poses_from(positions, quats);
        return repset_to_json(representative_poses(voxelize(poses, w, c.min_displacement), w, c.pattern)).dump();
      },
      py::arg("positions"), py::arg("quaternions"), py::arg("config") = "");

  m.def(
      "final_score",
      [](const Rows& bases, const std::string& repset, const std::string& config) {
        const auto c = config_arg(config);
        const auto km = c.load_kinematic_model();
        const auto b = bases_from(bases);
        return score_bases(km, repset_from_json(nlohmann::json::parse(repset)), b, c.alpha, c.weights_for(km));
      },
      py::arg("bases"), py::arg("repset"), py::arg("config") = "");

  m.def(
      "sample",
      [](const std::string& repset, const std::string& config) {
        const auto c = config_arg(config);
        const auto km = c.load_kinematic_model();
        return rows_of(build_dataset(km, repset_from_json(nlohmann::json::parse(repset)), c.base_range(), c.samples,
                                     c.stage_seed(Stage::Dataset), c.alpha, c.weights_for(km)));
      },
      py::arg("repset"), py::arg("config") = "");

  m.def(
      "train",
      [](const Rows& rows, const std::string& config) {
        const auto c = config_arg(config);
        const auto d = set_from(rows, c);
        const Regressor r = c.train.regressor == "lasso" ? Regressor(train_lasso(d, c.train.lasso_alpha))
                                                         : Regressor(train_mlp(d, c.train.mlp));
        return regressor_to_json(r).dump();
      },
      py::arg("rows"), py::arg("config") = "");

  m.def(
      "predict",
      [](const std::string& model, const Rows& bases) {
        return predict_batch(regressor_from_json(nlohmann::json::parse(model)), bases_from(bases));
      },
      py::arg("model"), py::arg("bases"));

  m.def(
      "grid_search",
      [](const std::string& model, const std::string& config, std::size_t top_k) {
        const auto c = config_arg(config);
        const auto r = regressor_from_json(nlohmann::json::parse(model));
        return optim_result_to_json(grid_search(r, c.grid.build(c.base_range()), top_k)).dump();
      },
      py::arg("model"), py::arg("config") = "", py::arg("top_k") = 10);

  m.def(
      "evaluate",
      [](const Eigen::Vector3d& best, const std::string& repset, const std::string& config) {
        const auto c = config_arg(config);
        const auto km = c.load_kinematic_model();
        return baseline_to_json(evaluate_against_random(km, repset_from_json(nlohmann::json::parse(repset)),
                                                        BasePose(best[0], best[1], best[2]), c.base_range(),
                                                        c.n_random, c.stage_seed(Stage::Evaluate), c.alpha,
                                                        c.weights_for(km)))
            .dump();
      },
      py::arg("best"), py::arg("repset"), py::arg("config") = "");

  m.def(
      "generate_traces",
      [](const std::string& config) {
        const auto c = config_arg(config);
        const auto poses = generate_traces(c.profile, c.workspace.build(), c.n_samples, c.stage_seed(Stage::Traces));
        Rows p(poses.size(), 3), q(poses.size(), 4);
        for (std::size_t i = 0; i < poses.size(); ++i) {
          const Quat& r = poses[i].orientation();
          p.row(i) = poses[i].position().transpose();
          q.row(i) << r.w(), r.x(), r.y(), r.z();
        }
        return py::make_tuple(p, q);
      },
      py::arg("config") = "");
}
