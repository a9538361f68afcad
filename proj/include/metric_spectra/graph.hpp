#ifndef METRIC_SPECTRA_GRAPH_HPP
#define METRIC_SPECTRA_GRAPH_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mspec {

struct EdgeRecord {
  std::string id;
  std::string from, to;
  double length = 0.0;
};

struct Edge {
  std::string id;
  int from = -1, to = -1;
  double length = 0.0;
};

// Finite metric graph: vertices are opaque string ids, every edge is a
// segment of positive length. Vertices and edges are kept sorted by id so
// every downstream tie-break is reproducible. Immutable after make().
class MetricGraph {
 public:
  static MetricGraph make(std::vector<std::string> vertex_ids, std::vector<EdgeRecord> edges);

  int vertex_count() const { return int(vertex_ids_.size()); }
  int edge_count() const { return int(edges_.size()); }

  const std::string& vertex_id(int v) const { return vertex_ids_[v]; }
  int vertex_index(const std::string& id) const;  // -1 when absent
  const Edge& edge(int e) const { return edges_[e]; }
  int edge_index(const std::string& id) const;

  std::span<const int> incident(int v) const {
    return {incident_[v].data(), incident_[v].size()};
  }
  int degree(int v) const { return int(incident_[v].size()); }

  double total_length() const;

 private:
  std::vector<std::string> vertex_ids_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> incident_;
};

// A location on the graph: either a vertex or a point strictly inside an
// edge. Offsets 0 and length canonicalize to the vertex form, so equality
// is well defined at vertices shared by several edges.
class GraphPoint {
 public:
  GraphPoint() = default;

  static GraphPoint at_vertex(int v) {
    GraphPoint p;
    p.vertex_ = v;
    return p;
  }
  static GraphPoint on_edge(const MetricGraph& g, int edge, double offset);

  bool is_vertex() const { return vertex_ >= 0; }
  int vertex() const { return vertex_; }
  int edge() const { return edge_; }
  double offset() const { return offset_; }

  bool operator==(const GraphPoint& o) const {
    return vertex_ == o.vertex_ && edge_ == o.edge_ && offset_ == o.offset_;
  }

  // Deterministic total order: vertices (by index, which is id order)
  // precede interior points; interior points order by (edge, offset).
  bool before(const GraphPoint& o) const {
    if (is_vertex() != o.is_vertex()) return is_vertex();
    if (is_vertex()) return vertex_ < o.vertex_;
    if (edge_ != o.edge_) return edge_ < o.edge_;
    return offset_ < o.offset_;
  }

  // Offset of the point along a given incident edge, if it lies on it.
  std::optional<double> offset_on(const MetricGraph& g, int e) const;

  std::string describe(const MetricGraph& g) const;

 private:
  int vertex_ = -1;
  int edge_ = -1;
  double offset_ = 0.0;
};

// Signed piecewise-constant weight. Per edge: strictly increasing
// breakpoints starting at 0 and ending at the edge length, one value per
// subinterval. Edges without an explicit profile carry the zero weight.
class Weight {
 public:
  Weight() = default;
  static Weight zero(const MetricGraph& g);
  static Weight constant(const MetricGraph& g, double value);

  void set_profile(int edge, std::vector<double> breakpoints, std::vector<double> values);
  bool has_profile(int edge) const { return !breaks_[edge].empty(); }

  const std::vector<double>& breakpoints(int edge) const;
  const std::vector<double>& values(int edge) const;

  double value_at(int edge, double t) const;
  double integral() const;
  double integral(int edge, double a, double b) const;
  double integral_abs() const;
  double integral_sqrt() const;  // of max(V,0)

  Weight positive_part() const;
  Weight negative_part() const;  // nonnegative: V- with V = V+ - V-
  Weight abs() const;
  Weight negated() const;
  Weight scaled(double c) const;
  Weight squared() const;

  double min_value() const;
  double max_value() const;

  const MetricGraph* graph() const { return g_; }

 private:
  explicit Weight(const MetricGraph& g);
  Weight mapped(double (*f)(double)) const;

  const MetricGraph* g_ = nullptr;
  std::vector<std::vector<double>> breaks_;
  std::vector<std::vector<double>> values_;
  static const std::vector<double> empty_;
};

struct Violation {
  std::string code;    // "disconnected", "loop", "nonpositive length", ...
  std::string entity;  // offending vertex/edge id
  std::string detail;
};

std::vector<Violation> validate(const MetricGraph& g);

double total_length(const MetricGraph& g);

// Shortest-path distance between two points of the graph.
double distance(const MetricGraph& g, const GraphPoint& p, const GraphPoint& q);

// Shortest distances from a point to every vertex.
std::vector<double> distances_to_vertices(const MetricGraph& g, const GraphPoint& p);

// sup of pairwise distances; attained at vertices or at interior points of
// edges lying on cycles, both of which are enumerated exactly.
double diameter(const MetricGraph& g);

// Split an edge at an interior point, producing a new graph with one more
// vertex (weights restricted accordingly). Returns the new vertex index.
struct EdgeSplit {
  MetricGraph graph;
  Weight weight;
  int vertex;
};
EdgeSplit split_at(const MetricGraph& g, const Weight& v, const GraphPoint& p);

}  // namespace mspec

#endif
