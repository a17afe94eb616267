#include "baseplace/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "baseplace/io.hpp"

namespace baseplace {

GridSpec GridSpec::from_steps(const BaseRange& r, double step_x, double step_y,
                              double step_theta) {
  r.validate();
  GridSpec g;
  g.range_ = r;
  g.steps_ = {step_x, step_y, step_theta};
  const auto axes = r.axes();
  for (int i = 0; i < 3; ++i) {
    if (!(g.steps_[i] > 0.0)) throw std::invalid_argument("grid steps must be > 0");
    g.counts_[i] = static_cast<int>(std::floor(axes[i].span() / g.steps_[i] + 1e-9)) + 1;
  }
  return g;
}

GridSpec GridSpec::from_counts(const BaseRange& r, int nx, int ny, int ntheta) {
  r.validate();
  GridSpec g;
  g.range_ = r;
  g.counts_ = {nx, ny, ntheta};
  const auto axes = r.axes();
  for (int i = 0; i < 3; ++i) {
    if (g.counts_[i] < 1) throw std::invalid_argument("grid counts must be >= 1");
    g.steps_[i] = g.counts_[i] > 1 ? axes[i].span() / (g.counts_[i] - 1) : axes[i].span();
  }
  return g;
}

std::size_t GridSpec::size() const {
  return static_cast<std::size_t>(counts_[0]) * counts_[1] * counts_[2];
}

double GridSpec::coordinate(int axis, int k) const {
  const Interval a = range_.axes()[axis];
  return std::min(a.hi, a.lo + k * steps_[axis]);
}

BasePose GridSpec::point(std::size_t index) const {
  const auto it = static_cast<int>(index % counts_[2]);
  const auto iy = static_cast<int>((index / counts_[2]) % counts_[1]);
  const auto ix = static_cast<int>(index / (static_cast<std::size_t>(counts_[1]) * counts_[2]));
  return BasePose(coordinate(0, ix), coordinate(1, iy), coordinate(2, it));
}

OptimResult grid_search(const Regressor& r, const GridSpec& g, std::size_t top_k) {
  struct Entry {
    double score;
    std::size_t index;
  };
  // "a before b" when a is the better grid point
  auto better = [](const Entry& a, const Entry& b) {
    return a.score > b.score || (a.score == b.score && a.index < b.index);
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(better)> keep(better);
  const std::size_t keep_n = top_k + 1;

  constexpr std::size_t kChunk = 1 << 16;
  std::vector<BasePose> chunk;
  for (std::size_t start = 0; start < g.size(); start += kChunk) {
    const std::size_t len = std::min(kChunk, g.size() - start);
    chunk.resize(len);
    for (std::size_t k = 0; k < len; ++k) chunk[k] = g.point(start + k);
    const auto scores = predict_batch(r, chunk);
    for (std::size_t k = 0; k < len; ++k) {
      const Entry e{scores[k], start + k};
      if (keep.size() < keep_n) {
        keep.push(e);
      } else if (better(e, keep.top())) {
        keep.pop();
        keep.push(e);
      }
    }
  }
  std::vector<Entry> ranked;
  while (!keep.empty()) {
    ranked.push_back(keep.top());
    keep.pop();
  }
  std::sort(ranked.begin(), ranked.end(), better);

  OptimResult out;
  out.grid_points_evaluated = g.size();
  out.best = g.point(ranked.front().index);
  out.best_score = ranked.front().score;
  for (std::size_t i = 1; i < ranked.size(); ++i)
    out.runner_ups.push_back({g.point(ranked[i].index), ranked[i].score});
  return out;
}

std::vector<ScoreMapRow> export_score_map(const Regressor& r, const GridSpec& g,
                                          double theta_fixed) {
  if (!g.range().theta.contains(theta_fixed))
    throw std::invalid_argument("score-map theta lies outside the base range");
  std::vector<BasePose> poses;
  poses.reserve(static_cast<std::size_t>(g.counts()[0]) * g.counts()[1]);
  for (int ix = 0; ix < g.counts()[0]; ++ix)
    for (int iy = 0; iy < g.counts()[1]; ++iy)
      poses.emplace_back(g.coordinate(0, ix), g.coordinate(1, iy), theta_fixed);
  const auto scores = predict_batch(r, poses);
  std::vector<ScoreMapRow> rows(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i)
    rows[i] = {poses[i].x, poses[i].y, poses[i].theta, scores[i]};
  return rows;
}

BaselineReport evaluate_against_bases(const KinematicModel& m, const RepresentativeSet& test_set,
                                      const BasePose& best, std::span<const BasePose> others,
                                      double alpha, const JointWeights& w) {
  if (others.empty()) throw std::invalid_argument("need at least one comparison base");
  BaselineReport rep;
  rep.optimal_score = final_score_value(m, best, test_set, alpha, w);
  auto scores = score_bases(m, test_set, others, alpha, w);
  rep.n_random = scores.size();
  const auto n = static_cast<double>(scores.size());
  double sum = 0.0;
  for (double s : scores) sum += s;
  rep.random_mean = sum / n;
  double var = 0.0;
  for (double s : scores) var += (s - rep.random_mean) * (s - rep.random_mean);
  rep.random_sd = std::sqrt(var / n);
  std::sort(scores.begin(), scores.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.99 * n));
  rep.random_p99 = scores[std::max<std::size_t>(rank, 1) - 1];
  if (rep.random_mean > 0.0)
    rep.improvement_pct = 100.0 * (rep.optimal_score - rep.random_mean) / rep.random_mean;
  else
    rep.improvement_pct = rep.optimal_score == rep.random_mean
                              ? 0.0
                              : std::numeric_limits<double>::infinity();
  return rep;
}

BaselineReport evaluate_against_random(const KinematicModel& m, const RepresentativeSet& test_set,
                                       const BasePose& best, const BaseRange& range,
                                       std::size_t n_random, std::uint64_t seed, double alpha,
                                       const JointWeights& w) {
  const auto bases = sample_bases(range, n_random, seed);
  return evaluate_against_bases(m, test_set, best, bases, alpha, w);
}

namespace {

nlohmann::json pose_json(const BasePose& b) { return {b.x, b.y, b.theta}; }

BasePose pose_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("base pose must be [X, Y, Theta]");
  return BasePose(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json optim_result_to_json(const OptimResult& r) {
  nlohmann::json runners = nlohmann::json::array();
  for (const auto& s : r.runner_ups) runners.push_back({{"pose", pose_json(s.pose)}, {"score", s.score}});
  return {{"best", pose_json(r.best)},
          {"best_score", r.best_score},
          {"grid_points_evaluated", r.grid_points_evaluated},
          {"runner_ups", runners}};
}

OptimResult optim_result_from_json(const nlohmann::json& j) {
  OptimResult r;
  r.best = pose_from(j.at("best"));
  r.best_score = j.value("best_score", 0.0);
  r.grid_points_evaluated = j.value("grid_points_evaluated", std::size_t{0});
  if (j.contains("runner_ups"))
    for (const auto& s : j["runner_ups"]) r.runner_ups.push_back({pose_from(s.at("pose")), s.at("score")});
  return r;
}

nlohmann::json baseline_to_json(const BaselineReport& r) {
  return {{"optimal_score", r.optimal_score},
          {"random_mean", r.random_mean},
          {"random_sd", r.random_sd},
          {"random_p99", r.random_p99},
          {"n_random", r.n_random},
          {"improvement_pct", finite_or_null(r.improvement_pct)}};
}

std::string score_map_csv(std::span<const ScoreMapRow> rows) {
  std::string s = "X,Y,Theta,score\n";
  for (const auto& r : rows)
    s += format_g17(r.x) + ',' + format_g17(r.y) + ',' + format_g17(r.theta) + ',' +
         format_g17(r.score) + '\n';
  return s;
}

}  // namespace baseplace
