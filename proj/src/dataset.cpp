#include "baseplace/dataset.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>
#include <tuple>

#include "baseplace/io.hpp"
#include "baseplace/parallel.hpp"

namespace baseplace {

void BaseRange::validate() const {
  const char* names[] = {"x", "y", "theta"};
  const auto a = axes();
  for (int i = 0; i < 3; ++i)
    if (!(a[i].lo < a[i].hi) || !std::isfinite(a[i].lo) || !std::isfinite(a[i].hi))
      throw std::invalid_argument(std::string("base_range.") + names[i] + ": min must be < max");
  if (theta.lo < -kPi - 1e-12 || theta.hi > kPi + 1e-12)
    throw std::invalid_argument("base_range.theta must lie within [-pi, pi]");
}

bool BaseRange::contains(const BasePose& b) const {
  return x.contains(b.x) && y.contains(b.y) && theta.contains(b.theta);
}

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

std::vector<BasePose> sample_bases(const BaseRange& range, std::size_t count, std::uint64_t seed) {
  range.validate();
  if (count == 0) throw std::invalid_argument("sample count must be >= 1");
  std::set<std::tuple<double, double, double>> seen;
  std::vector<BasePose> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    auto rng = stream_rng(seed, j);
    std::uniform_real_distribution<double> ux(range.x.lo, range.x.hi);
    std::uniform_real_distribution<double> uy(range.y.lo, range.y.hi);
    std::uniform_real_distribution<double> ut(range.theta.lo, range.theta.hi);
    for (int attempt = 0;; ++attempt) {
      if (attempt == 1000) throw std::invalid_argument("base range too narrow for distinct samples");
      const double x = ux(rng), y = uy(rng), t = ut(rng);
      if (seen.emplace(x, y, t).second) {
        out.emplace_back(x, y, t);
        break;
      }
    }
  }
  return out;
}

std::vector<double> score_bases(const KinematicModel& m, const RepresentativeSet& set,
                                std::span<const BasePose> bases, double alpha,
                                const JointWeights& w) {
  std::vector<double> scores(bases.size());
  parallel_for(bases.size(), [&](std::size_t j) {
    scores[j] = final_score_value(m, bases[j], set, alpha, w);
  });
  return scores;
}

SampleSet build_dataset(const KinematicModel& m, const RepresentativeSet& set,
                        const BaseRange& range, std::size_t count, std::uint64_t seed,
                        double alpha, const JointWeights& w) {
  if (set.empty()) throw std::invalid_argument("representative set is empty");
  const auto bases = sample_bases(range, count, seed);
  const auto scores = score_bases(m, set, bases, alpha, w);
  SampleSet d;
  d.rows.reserve(count);
  for (std::size_t j = 0; j < count; ++j) d.rows.push_back({bases[j], scores[j]});
  d.range = range;
  d.seed = seed;
  d.alpha = alpha;
  d.joint_weights = w.values();
  d.model_name = m.name();
  d.repset_digest = digest(repset_to_json(set).dump());
  return d;
}

nlohmann::json range_to_json(const BaseRange& r) {
  return {{"x", {r.x.lo, r.x.hi}}, {"y", {r.y.lo, r.y.hi}}, {"theta", {r.theta.lo, r.theta.hi}}};
}

BaseRange range_from_json(const nlohmann::json& j) {
  auto axis = [&](const char* name) {
    const auto& a = j.at(name);
    if (!a.is_array() || a.size() != 2)
      throw std::invalid_argument(std::string("base_range.") + name + " must be [min, max]");
    return Interval{a[0].get<double>(), a[1].get<double>()};
  };
  BaseRange r{axis("x"), axis("y"), axis("theta")};
  r.validate();
  return r;
}

std::filesystem::path dataset_meta_path(const std::filesystem::path& csv_path) {
  return std::filesystem::path(csv_path.string() + ".meta.json");
}

void write_dataset(const SampleSet& d, const std::filesystem::path& csv_path,
                   const nlohmann::json& provenance) {
  std::string text = "X,Y,Theta,score\n";
  for (const auto& r : d.rows) {
    text += format_g17(r.base.x) + ',' + format_g17(r.base.y) + ',' + format_g17(r.base.theta) +
            ',' + format_g17(r.score) + '\n';
  }
  write_text(csv_path, text);

  nlohmann::json meta = provenance;
  meta["rows"] = d.rows.size();
  meta["range"] = range_to_json(d.range);
  meta["seed"] = d.seed;
  meta["alpha"] = d.alpha;
  meta["joint_weights"] = d.joint_weights;
  meta["model_name"] = d.model_name;
  meta["repset_digest"] = d.repset_digest;
  write_text(dataset_meta_path(csv_path), meta.dump(2) + "\n");
}

SampleSet read_dataset(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open dataset " + csv_path.string());
  SampleSet d;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line) || line.rfind("X,Y,Theta,score", 0) != 0)
    throw ParseError(csv_path.string(), 1, "expected header X,Y,Theta,score");
  ++line_no;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto v = parse_csv_doubles(line);
    if (v.size() != 4) throw ParseError(csv_path.string(), line_no, "expected 4 numeric fields");
    d.rows.push_back({BasePose(v[0], v[1], v[2]), v[3]});
  }
  const auto meta_path = dataset_meta_path(csv_path);
  if (std::filesystem::exists(meta_path)) {
    const auto meta = read_json(meta_path);
    d.range = range_from_json(meta.at("range"));
    d.seed = meta.value("seed", std::uint64_t{0});
    d.alpha = meta.value("alpha", 0.0);
    d.joint_weights = meta.value("joint_weights", std::vector<double>{});
    d.model_name = meta.value("model_name", std::string{});
    d.repset_digest = meta.value("repset_digest", std::string{});
  } else {
    if (d.rows.empty()) throw std::runtime_error("dataset " + csv_path.string() + " has no rows");
    // no sidecar: fall back to the bounding box of the rows
    BaseRange r{{d.rows[0].base.x, d.rows[0].base.x},
                {d.rows[0].base.y, d.rows[0].base.y},
                {d.rows[0].base.theta, d.rows[0].base.theta}};
    for (const auto& row : d.rows) {
      r.x = {std::min(r.x.lo, row.base.x), std::max(r.x.hi, row.base.x)};
      r.y = {std::min(r.y.lo, row.base.y), std::max(r.y.hi, row.base.y)};
      r.theta = {std::min(r.theta.lo, row.base.theta), std::max(r.theta.hi, row.base.theta)};
    }
    d.range = r;
  }
  return d;
}

}  // namespace baseplace
