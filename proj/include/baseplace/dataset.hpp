#pragma once
// Score sampling: uniform base placements scored against the representative
// set, producing the (X, Y, Theta, score) training table.

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "baseplace/scoring.hpp"

namespace baseplace {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double span() const { return hi - lo; }
  bool contains(double v) const { return v >= lo && v <= hi; }
};

struct BaseRange {
  Interval x;
  Interval y;
  Interval theta;  // radians, within [-pi, pi]

  void validate() const;
  bool contains(const BasePose& b) const;
  std::array<Interval, 3> axes() const { return {x, y, theta}; }
};

struct SampleRow {
  BasePose base;
  double score = 0.0;
};

struct SampleSet {
  std::vector<SampleRow> rows;
  BaseRange range;
  std::uint64_t seed = 0;
  double alpha = 0.0;
  std::vector<double> joint_weights;
  std::string model_name;
  std::string repset_digest;

  std::size_t size() const { return rows.size(); }
};

/// Generator for stream `stream` of a seeded family; streams are
/// independent, so row j can be drawn without drawing rows 0..j-1.
std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream);

/// M distinct poses drawn uniformly per axis. Row j uses stream_rng(seed, j).
std::vector<BasePose> sample_bases(const BaseRange& range, std::size_t count, std::uint64_t seed);

SampleSet build_dataset(const KinematicModel& m, const RepresentativeSet& set,
                        const BaseRange& range, std::size_t count, std::uint64_t seed,
                        double alpha, const JointWeights& w);

/// Scores the given bases in parallel; result order follows the input.
std::vector<double> score_bases(const KinematicModel& m, const RepresentativeSet& set,
                                std::span<const BasePose> bases, double alpha,
                                const JointWeights& w);

nlohmann::json range_to_json(const BaseRange& r);
BaseRange range_from_json(const nlohmann::json& j);

/// CSV with header X,Y,Theta,score at 17 significant digits, plus a JSON
/// sidecar at <path>.meta.json.
void write_dataset(const SampleSet& d, const std::filesystem::path& csv_path,
                   const nlohmann::json& provenance = {});
SampleSet read_dataset(const std::filesystem::path& csv_path);
std::filesystem::path dataset_meta_path(const std::filesystem::path& csv_path);

}  // namespace baseplace
