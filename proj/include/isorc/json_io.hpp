#ifndef ISORC_JSON_IO_HPP
#define ISORC_JSON_IO_HPP

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "isorc/graph.hpp"
#include "isorc/quantum.hpp"
#include "isorc/rcm.hpp"
#include "isorc/stt.hpp"

namespace isorc {

using nlohmann::json;

inline json graph_to_json(const IsoradialGraph& g) {
  json doc;
  doc["schema"] = "isorc-graph/1";
  doc["eps_bap"] = g.eps_bap;
  json verts = json::array();
  for (int v = 0; v < g.vertex_count(); ++v)
    verts.push_back({{"id", v},
                     {"x", g.pos(v).x},
                     {"y", g.pos(v).y},
                     {"parity", g.verts[v].primal ? "primal" : "dual"}});
  doc["vertices"] = std::move(verts);
  json edges = json::array();
  json rhombi = json::array();
  for (int r = 0; r < g.edge_count(); ++r) {
    auto [u, v] = g.primal_edge(r);
    auto [du, dv] = g.dual_edge(r);
    edges.push_back({{"id", r},
                     {"endpoints", {u, v}},
                     {"dual_endpoints", {du, dv}},
                     {"theta", g.theta(r)}});
    rhombi.push_back({{"id", r},
                      {"edge", r},
                      {"corners", g.rhombi[r].corners},
                      {"tracks", {g.rhombi[r].track[0], g.rhombi[r].track[1]}}});
  }
  doc["edges"] = std::move(edges);
  doc["rhombi"] = std::move(rhombi);
  json tracks = json::array();
  for (std::size_t t = 0; t < g.tracks.size(); ++t) {
    json entry = {{"id", t},
                  {"angle", g.tracks[t].angle},
                  {"rhombi", json::array()}};
    for (int r = 0; r < g.edge_count(); ++r)
      if (g.rhombi[r].track[0] == static_cast<int>(t) ||
          g.rhombi[r].track[1] == static_cast<int>(t))
        entry["rhombi"].push_back(r);
    tracks.push_back(std::move(entry));
  }
  doc["tracks"] = std::move(tracks);
  return doc;
}

inline IsoradialGraph graph_from_json(const json& doc) {
  if (doc.value("schema", "") != "isorc-graph/1")
    throw std::invalid_argument("graph_from_json: unknown schema");
  IsoradialGraph g;
  g.eps_bap = doc.value("eps_bap", 0.0);
  g.verts.resize(doc.at("vertices").size());
  for (const auto& v : doc.at("vertices")) {
    int id = v.at("id").get<int>();
    g.verts[id].pos = {v.at("x").get<double>(), v.at("y").get<double>()};
    g.verts[id].primal = v.at("parity").get<std::string>() == "primal";
  }
  g.rhombi.resize(doc.at("rhombi").size());
  int max_track = -1;
  for (const auto& r : doc.at("rhombi")) {
    int id = r.at("id").get<int>();
    auto corners = r.at("corners");
    for (int k = 0; k < 4; ++k) g.rhombi[id].corners[k] = corners.at(k).get<int>();
    g.rhombi[id].track = {r.at("tracks").at(0).get<int>(), r.at("tracks").at(1).get<int>()};
    max_track = std::max({max_track, g.rhombi[id].track[0], g.rhombi[id].track[1]});
  }
  g.tracks.resize(max_track + 1);
  for (const auto& t : doc.at("tracks")) {
    int id = t.at("id").get<int>();
    g.tracks[id].angle = t.at("angle").get<double>();
  }
  return g;
}

inline json config_snapshot(const IsoradialGraph& g, const Configuration& config) {
  return json{{"graph_hash", g.hash()}, {"n", config.size()}, {"bits", config.hex()}};
}

inline Configuration config_from_snapshot(const IsoradialGraph& g, const json& snap) {
  if (snap.at("graph_hash").get<std::uint64_t>() != g.hash())
    throw std::invalid_argument("config_from_snapshot: graph hash mismatch");
  return Configuration::from_hex(snap.at("bits").get<std::string>(), snap.at("n").get<int>(),
                                 g.version);
}

inline json record_to_json(const SttRecord& rec) {
  return json{{"center", rec.center},
              {"pattern", rec.was_triangle ? "triangle" : "star"},
              {"rhombi", rec.rhombi},
              {"before", {rec.before[0], rec.before[1], rec.before[2]}},
              {"after", {rec.after[0], rec.after[1], rec.after[2]}},
              {"outcome", rec.outcome_index},
              {"prob", rec.probability},
              {"premove", rec.premove}};
}

inline SttRecord record_from_json(const json& j) {
  SttRecord rec;
  rec.center = j.at("center").get<int>();
  rec.was_triangle = j.at("pattern").get<std::string>() == "triangle";
  for (int i = 0; i < 3; ++i) {
    rec.rhombi[i] = j.at("rhombi").at(i).get<int>();
    rec.before[i] = j.at("before").at(i).get<int>();
    rec.after[i] = j.at("after").at(i).get<int>();
  }
  rec.outcome_index = j.at("outcome").get<int>();
  rec.probability = j.at("prob").get<double>();
  rec.premove = j.value("premove", false);
  return rec;
}

inline void write_records_jsonl(const std::string& path, const std::vector<SttRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_records_jsonl: cannot open " + path);
  for (const auto& rec : records) out << record_to_json(rec).dump() << "\n";
}

inline std::vector<SttRecord> read_records_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_records_jsonl: cannot open " + path);
  std::vector<SttRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    records.push_back(record_from_json(json::parse(line)));
  }
  return records;
}

inline json continuum_to_json(const ContinuumConfig& cc) {
  json doc;
  doc["schema"] = "isorc-quantum/1";
  doc["region"] = {{"columns", cc.region.columns}, {"height", cc.region.height}};
  doc["height_unit"] = cc.height_unit;
  json cols = json::array();
  for (std::size_t m = 0; m < cc.cuts.size(); ++m)
    cols.push_back({{"col", m}, {"cuts", cc.cuts[m]}});
  doc["columns"] = std::move(cols);
  json gaps = json::array();
  for (std::size_t m = 0; m < cc.bridges.size(); ++m)
    gaps.push_back({{"gap", m}, {"bridges", cc.bridges[m]}});
  doc["gaps"] = std::move(gaps);
  return doc;
}

inline ContinuumConfig continuum_from_json(const json& doc) {
  if (doc.value("schema", "") != "isorc-quantum/1")
    throw std::invalid_argument("continuum_from_json: unknown schema");
  ContinuumConfig cc;
  cc.region.columns = doc.at("region").at("columns").get<int>();
  cc.region.height = doc.at("region").at("height").get<double>();
  cc.height_unit = doc.value("height_unit", 0.0);
  cc.cuts.resize(cc.region.columns);
  cc.bridges.resize(std::max(0, cc.region.columns - 1));
  for (const auto& col : doc.at("columns"))
    cc.cuts.at(col.at("col").get<int>()) = col.at("cuts").get<std::vector<double>>();
  for (const auto& gap : doc.at("gaps"))
    cc.bridges.at(gap.at("gap").get<int>()) = gap.at("bridges").get<std::vector<double>>();
  return cc;
}

}  // namespace isorc

#endif
