#include "instructnav/mapdump.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace instructnav::eval {

namespace {

using nlohmann::json;

const char* source_name(maps::MapSource s) {
  switch (s) {
    case maps::MapSource::Semantic: return "semantic";
    case maps::MapSource::Action: return "action";
    case maps::MapSource::Trajectory: return "trajectory";
    case maps::MapSource::Intuition: return "intuition";
    case maps::MapSource::Fused: return "fused";
  }
  return "?";
}

maps::MapSource source_from_name(const std::string& name) {
  if (name == "semantic") return maps::MapSource::Semantic;
  if (name == "action") return maps::MapSource::Action;
  if (name == "trajectory") return maps::MapSource::Trajectory;
  if (name == "intuition") return maps::MapSource::Intuition;
  if (name == "fused") return maps::MapSource::Fused;
  throw std::invalid_argument("unknown map source '" + name + "'");
}

void write_pgm(const maps::ValueMap& m, const std::string& path) {
  const double scale = m.source == maps::MapSource::Fused ? 4.0 : 1.0;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write map image: " + path);
  out << "P5\n" << m.frame.width << " " << m.frame.height << "\n255\n";
  for (double v : m.values) {
    const double clamped = std::clamp(v / scale, 0.0, 1.0);
    out.put(static_cast<char>(static_cast<int>(clamped * 255.0 + 0.5)));
  }
}

json frame_to_json(const GridFrame& f) {
  return json{{"i0", f.i0},           {"j0", f.j0},
              {"width", f.width},     {"height", f.height},
              {"resolution", f.resolution},
              {"origin_x", f.origin_x}, {"origin_y", f.origin_y}};
}

GridFrame frame_from_json(const json& j) {
  GridFrame f;
  f.i0 = j.at("i0").get<int>();
  f.j0 = j.at("j0").get<int>();
  f.width = j.at("width").get<int>();
  f.height = j.at("height").get<int>();
  f.resolution = j.at("resolution").get<double>();
  f.origin_x = j.at("origin_x").get<double>();
  f.origin_y = j.at("origin_y").get<double>();
  return f;
}

json map_to_json(const maps::ValueMap& m) {
  return json{{"source", source_name(m.source)}, {"frame", frame_to_json(m.frame)},
              {"values", m.values}};
}

maps::ValueMap map_from_json(const json& j) {
  maps::ValueMap m;
  m.source = source_from_name(j.at("source").get<std::string>());
  m.frame = frame_from_json(j.at("frame"));
  m.values = j.at("values").get<std::vector<double>>();
  return m;
}

}  // namespace

void dump_decision_maps(const DecisionTrace& trace, const std::string& episode_id,
                        const std::string& out_dir) {
  const std::string stem = out_dir + "/" + episode_id + "_step" +
                           std::to_string(trace.decision_index);
  const maps::ValueMap* all[5] = {&trace.semantic, &trace.action, &trace.trajectory,
                                  &trace.intuition, &trace.fused};
  for (const maps::ValueMap* m : all)
    write_pgm(*m, stem + "_" + source_name(m->source) + ".pgm");

  json sidecar;
  sidecar["format"] = "instructnav-maps";
  sidecar["version"] = 1;
  sidecar["decision_index"] = trace.decision_index;
  sidecar["maps"] = json::array();
  for (const maps::ValueMap* m : all) sidecar["maps"].push_back(map_to_json(*m));
  sidecar["waypoint"] = json{{"x", trace.waypoint.cell.x},
                             {"y", trace.waypoint.cell.y},
                             {"world_x", trace.waypoint.world_x},
                             {"world_y", trace.waypoint.world_y},
                             {"value", trace.waypoint.value}};
  json path = json::array();
  for (const Cell& c : trace.astar_path) path.push_back(json::array({c.x, c.y}));
  sidecar["astar_path"] = path;
  json traj = json::array();
  for (const Pose& p : trace.traj_so_far)
    traj.push_back(json{{"x", p.x}, {"y", p.y}, {"heading", p.heading}});
  sidecar["trajectory"] = traj;

  std::ofstream out(stem + ".json");
  if (!out) throw std::runtime_error("cannot write sidecar: " + stem + ".json");
  out << sidecar.dump(1) << "\n";
}

SidecarData read_sidecar(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read sidecar: " + path);
  json doc;
  in >> doc;
  if (doc.value("format", "") != "instructnav-maps")
    throw std::runtime_error("not a map sidecar: " + path);
  SidecarData out;
  out.trace.decision_index = doc.value("decision_index", 0);
  for (const auto& mj : doc.at("maps")) {
    maps::ValueMap m = map_from_json(mj);
    switch (m.source) {
      case maps::MapSource::Semantic: out.trace.semantic = std::move(m); break;
      case maps::MapSource::Action: out.trace.action = std::move(m); break;
      case maps::MapSource::Trajectory: out.trace.trajectory = std::move(m); break;
      case maps::MapSource::Intuition: out.trace.intuition = std::move(m); break;
      case maps::MapSource::Fused: out.trace.fused = std::move(m); break;
    }
  }
  const auto& w = doc.at("waypoint");
  out.trace.waypoint.cell = Cell{w.at("x").get<int>(), w.at("y").get<int>()};
  out.trace.waypoint.world_x = w.at("world_x").get<double>();
  out.trace.waypoint.world_y = w.at("world_y").get<double>();
  out.trace.waypoint.value = w.at("value").get<double>();
  for (const auto& pc : doc.at("astar_path"))
    out.trace.astar_path.push_back(Cell{pc.at(0).get<int>(), pc.at(1).get<int>()});
  for (const auto& pj : doc.at("trajectory")) {
    Pose p;
    p.x = pj.at("x").get<double>();
    p.y = pj.at("y").get<double>();
    p.heading = pj.at("heading").get<double>();
    out.trace.traj_so_far.push_back(p);
  }
  return out;
}

}  // namespace instructnav::eval
