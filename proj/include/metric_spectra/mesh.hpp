#ifndef METRIC_SPECTRA_MESH_HPP
#define METRIC_SPECTRA_MESH_HPP

#include <vector>

#include "metric_spectra/graph.hpp"
#include "metric_spectra/subtree.hpp"

namespace mspec {

// Piecewise-linear finite element mesh on a metric graph. Vertex nodes are
// shared by all incident edges, which builds continuity (and with it the
// natural vertex matching of the variational form) into the space.
class Mesh {
 public:
  struct Element {
    int edge;
    double a, b;      // offsets, a < b
    int dof_a, dof_b;
    double h() const { return b - a; }
  };

  const MetricGraph& graph() const { return *g_; }
  int dof_count() const { return dof_count_; }
  const std::vector<Element>& elements() const { return elems_; }
  const std::vector<double>& edge_nodes(int e) const { return edge_nodes_[e]; }
  double h_max() const;

  int vertex_dof(int v) const { return vertex_dof_[v]; }
  // dof of the node at a point; -1 when the point is not a node
  int dof_at(const GraphPoint& p) const;
  // a representative (edge, offset) location plus the trapezoid weight of
  // every dof, in dof order
  struct NodeInfo {
    GraphPoint where;
    double quad_weight;
  };
  std::vector<NodeInfo> nodes() const;

  // nested refinement: every element split in half
  Mesh refined() const;

  // the same mesh transported to a graph whose edge lengths are scaled by c
  Mesh scaled_copy(const MetricGraph& scaled_graph, double c) const;

  // stable fingerprint of the node layout (used to tie kernel sample files
  // to the mesh they were taken on)
  std::uint64_t signature() const;

  friend Mesh build_mesh(const MetricGraph& g, const Weight& v, const GraphPoint& root, double h);

 private:
  const MetricGraph* g_ = nullptr;
  std::vector<std::vector<double>> edge_nodes_;
  std::vector<std::vector<int>> edge_node_dof_;
  std::vector<int> vertex_dof_;
  std::vector<Element> elems_;
  int dof_count_ = 0;

  void index_dofs();
};

// Uniform refinement per edge to spacing <= h with every weight breakpoint
// (and the root, when it is an edge-interior point) inserted exactly.
Mesh build_mesh(const MetricGraph& g, const Weight& v, const GraphPoint& root, double h);

// Continuous piecewise-linear function given by nodal values on a mesh.
class MeshFunction {
 public:
  MeshFunction(const Mesh& m, std::vector<double> nodal);

  const Mesh& mesh() const { return *mesh_; }
  const std::vector<double>& values() const { return nodal_; }

  double operator()(const GraphPoint& p) const;
  double value_on_edge(int edge, double t) const;

  double derivative_norm_sq() const;            // int |u'|^2 over the graph
  double weighted_l2_sq(const Weight& v) const; // int |u|^2 V over the graph

  // int over a fragment set of (u - c)^2 V, exact for piecewise-linear u
  // and piecewise-constant V
  double shifted_weighted_l2_sq(const Subtree& t, const Weight& v, double c) const;
  // same over a single edge interval
  double shifted_weighted_l2_sq(int edge, double a, double b, const Weight& v, double c) const;

 private:
  const Mesh* mesh_;
  std::vector<double> nodal_;
};

// Finitely many values on the pieces of a partition of the graph.
class StepFunction {
 public:
  StepFunction(std::vector<Subtree> pieces, std::vector<double> values)
      : pieces_(std::move(pieces)), values_(std::move(values)) {}

  double operator()(const GraphPoint& p) const;
  const std::vector<Subtree>& pieces() const { return pieces_; }
  const std::vector<double>& values() const { return values_; }
  int rank() const { return int(values_.size()); }

 private:
  std::vector<Subtree> pieces_;
  std::vector<double> values_;
};

}  // namespace mspec

#endif
