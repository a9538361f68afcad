#include "metric_spectra/graph_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "metric_spectra/common.hpp"

namespace mspec {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw GraphFileError("graph file, " + where + ": " + what);
}

double number_field(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) fail(where, std::string("missing number '") + key + "'");
  return j[key].get<double>();
}

std::string string_field(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) fail(where, std::string("missing string '") + key + "'");
  return j[key].get<std::string>();
}

}  // namespace

ParsedGraph parse_graph(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw GraphFileError(std::string("graph file: syntax error: ") + e.what());
  }
  if (!doc.is_object()) fail("top level", "expected an object");
  if (!doc.contains("vertices") || !doc["vertices"].is_array()) fail("top level", "missing array 'vertices'");
  if (!doc.contains("edges") || !doc["edges"].is_array()) fail("top level", "missing array 'edges'");

  std::vector<std::string> vertices;
  for (std::size_t i = 0; i < doc["vertices"].size(); ++i) {
    const json& v = doc["vertices"][i];
    if (!v.is_string()) fail("vertices[" + std::to_string(i) + "]", "expected a string id");
    vertices.push_back(v.get<std::string>());
  }
  if (vertices.empty()) fail("vertices", "at least one vertex required");
  const std::string first_declared = vertices.front();

  std::vector<EdgeRecord> edges;
  for (std::size_t i = 0; i < doc["edges"].size(); ++i) {
    const json& e = doc["edges"][i];
    const std::string where = "edges[" + std::to_string(i) + "]";
    if (!e.is_object()) fail(where, "expected an object");
    EdgeRecord r;
    r.id = string_field(e, where, "id");
    r.from = string_field(e, where, "from");
    r.to = string_field(e, where, "to");
    r.length = number_field(e, where, "length");
    edges.push_back(std::move(r));
  }

  ParsedGraph out;
  out.graph = MetricGraph::make(std::move(vertices), std::move(edges));

  std::vector<Violation> violations = validate(out.graph);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "graph file: invalid graph:";
    for (const Violation& v : violations) msg << " [" << v.code << " " << v.entity << "]";
    throw GraphFileError(msg.str());
  }

  out.weight = Weight::zero(out.graph);
  if (doc.contains("weights")) {
    if (!doc["weights"].is_object()) fail("weights", "expected an object keyed by edge id");
    for (auto it = doc["weights"].begin(); it != doc["weights"].end(); ++it) {
      const std::string where = "weights." + it.key();
      int e = out.graph.edge_index(it.key());
      if (e < 0) fail(where, "unknown edge id");
      const json& p = it.value();
      if (!p.is_object() || !p.contains("breakpoints") || !p.contains("values"))
        fail(where, "expected {breakpoints, values}");
      std::vector<double> bp, vv;
      for (const json& x : p["breakpoints"]) {
        if (!x.is_number()) fail(where, "breakpoints must be numbers");
        bp.push_back(x.get<double>());
      }
      for (const json& x : p["values"]) {
        if (!x.is_number()) fail(where, "values must be numbers");
        vv.push_back(x.get<double>());
      }
      try {
        out.weight.set_profile(e, std::move(bp), std::move(vv));
      } catch (const ConfigError& err) {
        fail(where, err.what());
      }
    }
  }

  if (doc.contains("root")) {
    const json& r = doc["root"];
    if (!r.is_object()) fail("root", "expected an object");
    if (r.contains("vertex")) {
      int v = out.graph.vertex_index(string_field(r, "root", "vertex"));
      if (v < 0) fail("root", "unknown vertex id");
      out.root = GraphPoint::at_vertex(v);
    } else if (r.contains("edge")) {
      int e = out.graph.edge_index(string_field(r, "root", "edge"));
      if (e < 0) fail("root", "unknown edge id");
      double t = number_field(r, "root", "offset");
      if (t < 0.0 || t > out.graph.edge(e).length) fail("root", "offset outside edge");
      out.root = GraphPoint::on_edge(out.graph, e, t);
    } else {
      fail("root", "expected {vertex} or {edge, offset}");
    }
  } else {
    out.root = GraphPoint::at_vertex(out.graph.vertex_index(first_declared));
  }
  return out;
}

ParsedGraph parse_graph_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GraphFileError("cannot open graph file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_graph(ss.str());
}

std::string emit_graph(const MetricGraph& g, const Weight& w, const GraphPoint& root) {
  json doc;
  doc["vertices"] = json::array();
  for (int v = 0; v < g.vertex_count(); ++v) doc["vertices"].push_back(g.vertex_id(v));
  doc["edges"] = json::array();
  for (int e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    doc["edges"].push_back({{"id", ed.id},
                            {"from", g.vertex_id(ed.from)},
                            {"to", g.vertex_id(ed.to)},
                            {"length", ed.length}});
  }
  json weights = json::object();
  for (int e = 0; e < g.edge_count(); ++e) {
    if (!w.has_profile(e)) continue;
    weights[g.edge(e).id] = {{"breakpoints", w.breakpoints(e)}, {"values", w.values(e)}};
  }
  if (!weights.empty()) doc["weights"] = std::move(weights);
  if (root.is_vertex())
    doc["root"] = {{"vertex", g.vertex_id(root.vertex())}};
  else
    doc["root"] = {{"edge", g.edge(root.edge()).id}, {"offset", root.offset()}};
  return doc.dump(2) + "\n";
}

std::uint64_t graph_hash(const MetricGraph& g, const Weight& w, const GraphPoint& root) {
  return fnv1a(emit_graph(g, w, root));
}

}  // namespace mspec
