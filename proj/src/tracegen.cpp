#include "baseplace/tracegen.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "baseplace/dataset.hpp"

namespace baseplace {
namespace {

std::string field(std::size_t v, const char* rest) {
  return "profile.voxels[" + std::to_string(v) + "]" + rest;
}

}  // namespace

void OperatorProfile::validate() const {
  if (voxels.empty()) throw std::invalid_argument("profile.voxels must not be empty");
  if (arm != "L" && arm != "R") throw std::invalid_argument("profile.arm must be \"L\" or \"R\"");
  if (!(dwell >= 1.0)) throw std::invalid_argument("profile.dwell must be >= 1");
  if (!(transit_noise >= 0.0)) throw std::invalid_argument("profile.transit_noise must be >= 0");
  if (!(sample_period > 0.0)) throw std::invalid_argument("profile.sample_period must be > 0");
  for (std::size_t v = 0; v < voxels.size(); ++v) {
    const auto& vox = voxels[v];
    if (!(vox.weight > 0.0)) throw std::invalid_argument(field(v, ".weight must be > 0"));
    if (vox.modes.empty()) throw std::invalid_argument(field(v, ".modes must not be empty"));
    double sum = 0.0;
    for (const auto& m : vox.modes) {
      if (!(m.sigma > 0.0)) throw std::invalid_argument(field(v, ".modes[].sigma must be > 0"));
      if (!(m.weight >= 0.0)) throw std::invalid_argument(field(v, ".modes[].weight must be >= 0"));
      if (!(m.mean.angle() < kPi)) throw std::invalid_argument(field(v, ".modes[].mean angle must be < pi"));
      sum += m.weight;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument(field(v, ".modes[].weight must sum to 1, got ") +
                                  std::to_string(sum));
  }
}

std::vector<Pose> generate_traces(const OperatorProfile& profile, const Workspace& w,
                                  std::size_t n_samples, std::uint64_t seed) {
  profile.validate();
  if (n_samples == 0) throw std::invalid_argument("n_samples must be >= 1");
  auto rng = stream_rng(seed, 0x7ace);

  std::vector<double> voxel_weights;
  std::vector<std::discrete_distribution<std::size_t>> mode_pick;
  for (const auto& v : profile.voxels) {
    voxel_weights.push_back(v.weight);
    std::vector<double> mw;
    for (const auto& m : v.modes) mw.push_back(m.weight);
    mode_pick.emplace_back(mw.begin(), mw.end());
  }
  std::discrete_distribution<std::size_t> voxel_pick(voxel_weights.begin(), voxel_weights.end());
  std::geometric_distribution<int> extra_dwell(1.0 / profile.dwell);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const Vec3 lo = w.origin();
  const Vec3 hi = w.origin() + w.dims();
  std::vector<Pose> out;
  out.reserve(n_samples);
  while (out.size() < n_samples) {
    const std::size_t v = voxel_pick(rng);
    const auto& vox = profile.voxels[v];
    const int length = 1 + extra_dwell(rng);
    for (int s = 0; s < length && out.size() < n_samples; ++s) {
      Vec3 p;
      for (int i = 0; i < 3; ++i) {
        double d;
        do d = gauss(rng);
        while (std::abs(d) > 3.0);
        p[i] = std::clamp(vox.center[i] + profile.transit_noise * d, lo[i],
                          std::nextafter(hi[i], lo[i]));
      }
      const auto& mode = vox.modes[mode_pick[v](rng)];
      Vec3 omega;
      do omega = mode.mean.value + mode.sigma * Vec3(gauss(rng), gauss(rng), gauss(rng));
      while (omega.norm() >= kPi);
      out.emplace_back(p, rotvec_to_quat(RotVec(omega)));
    }
  }
  return out;
}

OperatorProfile planted_profile(const Workspace& w, const std::vector<int>& modes_per_voxel,
                                double sigma, std::uint64_t seed, double separation,
                                double max_angle) {
  if (modes_per_voxel.size() > static_cast<std::size_t>(w.voxel_count()))
    throw std::invalid_argument("more planted voxels than the workspace holds");
  auto rng = stream_rng(seed, 0x91a7);
  std::uniform_int_distribution<int> pick_voxel(0, w.voxel_count() - 1);
  std::uniform_real_distribution<double> u(-max_angle, max_angle);

  OperatorProfile p;
  p.name = "planted-" + std::to_string(seed);
  std::vector<int> used;
  for (int k : modes_per_voxel) {
    int id;
    do id = pick_voxel(rng);
    while (std::find(used.begin(), used.end(), id) != used.end());
    used.push_back(id);

    PreferredVoxel vox;
    vox.center = w.center(id);
    vox.weight = static_cast<double>(k);  // equal samples per mode across voxels
    for (int m = 0; m < k; ++m) {
      Vec3 mean;
      bool ok;
      do {
        mean = Vec3(u(rng), u(rng), u(rng));
        ok = mean.norm() <= max_angle;
        for (const auto& other : vox.modes) ok = ok && (other.mean.value - mean).norm() >= separation;
      } while (!ok);
      vox.modes.push_back({RotVec(mean), sigma, 1.0 / k});
    }
    // weights of 1/k may not sum to exactly 1 in floating point
    double sum = 0.0;
    for (const auto& m : vox.modes) sum += m.weight;
    vox.modes.back().weight += 1.0 - sum;
    p.voxels.push_back(std::move(vox));
  }
  return p;
}

std::pair<OperatorProfile, OperatorProfile> shared_voxel_volunteers(const Workspace& w) {
  const int shared = w.voxel_of(w.origin() + 0.5 * w.dims());
  const Vec3 c = w.center(shared);
  const Vec3 c1 = w.center(0);
  const Vec3 c2 = w.center(w.voxel_count() - 1);

  OperatorProfile a;
  a.name = "volunteer-1";
  a.voxels.push_back({c, 2.0, {{RotVec(0.0971, -0.188, -1.226), 0.05, 0.5},
                               {RotVec(1.401, 0.711, -1.136), 0.05, 0.5}}});
  a.voxels.push_back({c1, 1.0, {{RotVec(0.0, 0.0, -1.2), 0.05, 1.0}}});

  OperatorProfile b;
  b.name = "volunteer-2";
  b.voxels.push_back({c, 2.0, {{RotVec(0.434, -0.416, -1.746), 0.05, 0.4},
                               {RotVec(-0.191, -2.498, 1.214), 0.05, 0.3},
                               {RotVec(0.141, -1.203, 0.734), 0.05, 0.3}}});
  b.voxels.push_back({c2, 1.0, {{RotVec(0.3, 0.0, -1.0), 0.05, 1.0}}});
  return {a, b};
}

nlohmann::json profile_to_json(const OperatorProfile& p) {
  nlohmann::json voxels = nlohmann::json::array();
  for (const auto& v : p.voxels) {
    nlohmann::json modes = nlohmann::json::array();
    for (const auto& m : v.modes)
      modes.push_back({{"mean", {m.mean[0], m.mean[1], m.mean[2]}},
                       {"sigma", m.sigma},
                       {"weight", m.weight}});
    voxels.push_back({{"center", {v.center.x(), v.center.y(), v.center.z()}},
                      {"weight", v.weight},
                      {"modes", modes}});
  }
  return {{"name", p.name},
          {"arm", p.arm},
          {"dwell", p.dwell},
          {"transit_noise", p.transit_noise},
          {"sample_period", p.sample_period},
          {"voxels", voxels}};
}

OperatorProfile profile_from_json(const nlohmann::json& j) {
  OperatorProfile p;
  p.name = j.value("name", p.name);
  p.arm = j.value("arm", p.arm);
  p.dwell = j.value("dwell", p.dwell);
  p.transit_noise = j.value("transit_noise", p.transit_noise);
  p.sample_period = j.value("sample_period", p.sample_period);
  for (const auto& v : j.at("voxels")) {
    PreferredVoxel vox;
    const auto c = v.at("center").get<std::vector<double>>();
    if (c.size() != 3) throw std::invalid_argument("profile.voxels[].center needs 3 components");
    vox.center = Vec3(c[0], c[1], c[2]);
    vox.weight = v.value("weight", 1.0);
    for (const auto& m : v.at("modes")) {
      const auto mean = m.at("mean").get<std::vector<double>>();
      if (mean.size() != 3) throw std::invalid_argument("profile.voxels[].modes[].mean needs 3 components");
      vox.modes.push_back({RotVec(mean[0], mean[1], mean[2]), m.value("sigma", 0.05),
                           m.value("weight", 1.0)});
    }
    p.voxels.push_back(std::move(vox));
  }
  p.validate();
  return p;
}

}  // namespace baseplace
