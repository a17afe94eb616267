#include "baseplace/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace baseplace {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> parse_csv_doubles(std::string_view line) {
  std::vector<double> out;
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const std::size_t comma = std::min(line.find(',', pos), line.size());
    std::string_view field = line.substr(pos, comma - pos);
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size()) return {};
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("malformed JSON in " + path.string() + ": " + e.what());
  }
}

std::string digest(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json provenance(const std::string& config_digest) {
  return {{"format_version", kFormatVersion},
          {"tool_version", BASEPLACE_VERSION},
          {"config_digest", config_digest}};
}

std::string trace_line(const TraceRecord& r) {
  const Vec3& p = r.pose.position();
  const Quat& q = r.pose.orientation();
  nlohmann::json j = {{"t", r.t},
                      {"arm", r.arm},
                      {"p", {p.x(), p.y(), p.z()}},
                      {"q", {q.w(), q.x(), q.y(), q.z()}}};
  return j.dump();
}

TraceRecord parse_trace_line(std::string_view line) {
  const auto j = nlohmann::json::parse(line);
  TraceRecord r;
  r.t = j.value("t", 0.0);
  r.arm = j.value("arm", std::string("R"));
  if (r.arm != "L" && r.arm != "R") throw std::invalid_argument("arm must be \"L\" or \"R\"");
  const auto& p = j.at("p");
  const auto& q = j.at("q");
  if (p.size() != 3 || q.size() != 4)
    throw std::invalid_argument("p needs 3 components and q needs 4");
  const Quat quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>());
  const double n = quat.norm();
  if (!(n > 0.5 && n < 1.5)) throw std::invalid_argument("q is not a unit quaternion");
  r.pose = Pose(Vec3(p[0].get<double>(), p[1].get<double>(), p[2].get<double>()), quat);
  return r;
}

void write_traces(const std::filesystem::path& path, const std::vector<TraceRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& r : records) out << trace_line(r) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::size_t read_traces(const std::filesystem::path& path,
                        const std::function<void(const TraceRecord&)>& sink) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file " + path.string());
  std::string line;
  std::size_t line_no = 0, count = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    TraceRecord r;
    try {
      r = parse_trace_line(line);
    } catch (const std::exception& e) {
      throw ParseError(path.string(), line_no, std::string("malformed trace record: ") + e.what());
    }
    sink(r);
    ++count;
  }
  return count;
}

nlohmann::json repset_to_json(const RepresentativeSet& s) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : s.entries) {
    entries.push_back({{"voxel_id", e.voxel_id},
                       {"center", {e.center.x(), e.center.y(), e.center.z()}},
                       {"rotvec", {e.rotvec[0], e.rotvec[1], e.rotvec[2]}},
                       {"visited", e.visited},
                       {"visit_count", e.visit_count},
                       {"bandwidth", e.bandwidth}});
  }
  return {{"entries", entries},
          {"summary",
           {{"total_samples", s.total_samples},
            {"out_of_workspace", s.out_of_workspace},
            {"voxels_visited", s.voxels_visited}}}};
}

RepresentativeSet repset_from_json(const nlohmann::json& j) {
  RepresentativeSet s;
  for (const auto& e : j.at("entries")) {
    RepresentativeEntry r;
    r.voxel_id = e.at("voxel_id").get<int>();
    const auto c = e.at("center").get<std::vector<double>>();
    const auto w = e.at("rotvec").get<std::vector<double>>();
    if (c.size() != 3 || w.size() != 3)
      throw std::invalid_argument("representative entry needs center[3] and rotvec[3]");
    r.center = Vec3(c[0], c[1], c[2]);
    r.rotvec = RotVec(w[0], w[1], w[2]);
    r.visited = e.value("visited", true);
    r.visit_count = e.value("visit_count", std::size_t{0});
    r.bandwidth = e.value("bandwidth", 0.0);
    s.entries.push_back(r);
  }
  if (j.contains("summary")) {
    const auto& sm = j.at("summary");
    s.total_samples = sm.value("total_samples", std::size_t{0});
    s.out_of_workspace = sm.value("out_of_workspace", std::size_t{0});
    s.voxels_visited = sm.value("voxels_visited", std::size_t{0});
  }
  return s;
}

}  // namespace baseplace
