#include "metric_spectra/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "metric_spectra/common.hpp"

namespace mspec {

void Mesh::index_dofs() {
  vertex_dof_.assign(g_->vertex_count(), -1);
  edge_node_dof_.assign(g_->edge_count(), {});
  int next = 0;
  for (int v = 0; v < g_->vertex_count(); ++v) vertex_dof_[v] = next++;
  for (int e = 0; e < g_->edge_count(); ++e) {
    const auto& nodes = edge_nodes_[e];
    auto& dofs = edge_node_dof_[e];
    dofs.assign(nodes.size(), -1);
    dofs.front() = vertex_dof_[g_->edge(e).from];
    dofs.back() = vertex_dof_[g_->edge(e).to];
    for (std::size_t k = 1; k + 1 < nodes.size(); ++k) dofs[k] = next++;
  }
  dof_count_ = next;
  elems_.clear();
  for (int e = 0; e < g_->edge_count(); ++e) {
    const auto& nodes = edge_nodes_[e];
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k)
      elems_.push_back({e, nodes[k], nodes[k + 1], edge_node_dof_[e][k], edge_node_dof_[e][k + 1]});
  }
}

double Mesh::h_max() const {
  double h = 0.0;
  for (const Element& el : elems_) h = std::max(h, el.h());
  return h;
}

int Mesh::dof_at(const GraphPoint& p) const {
  if (p.is_vertex()) return vertex_dof_[p.vertex()];
  const auto& nodes = edge_nodes_[p.edge()];
  auto it = std::lower_bound(nodes.begin(), nodes.end(), p.offset());
  if (it != nodes.end() && *it == p.offset()) return edge_node_dof_[p.edge()][it - nodes.begin()];
  return -1;
}

std::vector<Mesh::NodeInfo> Mesh::nodes() const {
  std::vector<NodeInfo> out(dof_count_);
  std::vector<char> placed(dof_count_, 0);
  for (int e = 0; e < g_->edge_count(); ++e) {
    const auto& nodes = edge_nodes_[e];
    const auto& dofs = edge_node_dof_[e];
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const int d = dofs[k];
      double w = 0.0;
      if (k > 0) w += 0.5 * (nodes[k] - nodes[k - 1]);
      if (k + 1 < nodes.size()) w += 0.5 * (nodes[k + 1] - nodes[k]);
      if (!placed[d]) {
        out[d].where = GraphPoint::on_edge(*g_, e, nodes[k]);
        out[d].quad_weight = w;
        placed[d] = 1;
      } else {
        out[d].quad_weight += w;
      }
    }
  }
  return out;
}

Mesh build_mesh(const MetricGraph& g, const Weight& v, const GraphPoint& root, double h) {
  if (!(h > 0.0)) throw ConfigError("build_mesh: h must be positive");
  Mesh m;
  m.g_ = &g;
  m.edge_nodes_.assign(g.edge_count(), {});
  for (int e = 0; e < g.edge_count(); ++e) {
    const double len = g.edge(e).length;
    std::vector<double> seeds{0.0, len};
    if (v.has_profile(e))
      for (double b : v.breakpoints(e)) seeds.push_back(b);
    if (!root.is_vertex() && root.edge() == e) seeds.push_back(root.offset());
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
    std::vector<double> nodes;
    for (std::size_t k = 0; k + 1 < seeds.size(); ++k) {
      const double a = seeds[k], b = seeds[k + 1];
      const int parts = std::max(1, int(std::ceil((b - a) / h - 1e-12)));
      nodes.push_back(a);
      for (int j = 1; j < parts; ++j) nodes.push_back(a + (b - a) * j / parts);
    }
    nodes.push_back(len);
    m.edge_nodes_[e] = std::move(nodes);
  }
  m.index_dofs();
  return m;
}

Mesh Mesh::scaled_copy(const MetricGraph& scaled_graph, double c) const {
  Mesh m;
  m.g_ = &scaled_graph;
  m.edge_nodes_.assign(scaled_graph.edge_count(), {});
  for (int e = 0; e < g_->edge_count(); ++e) {
    const int se = scaled_graph.edge_index(g_->edge(e).id);
    if (se < 0) throw ConfigError("scaled_copy: edge ids do not match");
    std::vector<double> nodes = edge_nodes_[e];
    for (double& t : nodes) t *= c;
    nodes.back() = scaled_graph.edge(se).length;
    m.edge_nodes_[se] = std::move(nodes);
  }
  m.index_dofs();
  return m;
}

std::uint64_t Mesh::signature() const {
  std::string bytes;
  for (int e = 0; e < g_->edge_count(); ++e) {
    bytes += g_->edge(e).id;
    bytes += '|';
    for (double t : edge_nodes_[e]) {
      bytes += format_double(t);
      bytes += ',';
    }
    bytes += ';';
  }
  return fnv1a(bytes);
}

Mesh Mesh::refined() const {
  Mesh m;
  m.g_ = g_;
  m.edge_nodes_.assign(g_->edge_count(), {});
  for (int e = 0; e < g_->edge_count(); ++e) {
    const auto& nodes = edge_nodes_[e];
    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
      out.push_back(nodes[k]);
      out.push_back(0.5 * (nodes[k] + nodes[k + 1]));
    }
    out.push_back(nodes.back());
    m.edge_nodes_[e] = std::move(out);
  }
  m.index_dofs();
  return m;
}

// ---------------------------------------------------------------------------

MeshFunction::MeshFunction(const Mesh& m, std::vector<double> nodal)
    : mesh_(&m), nodal_(std::move(nodal)) {
  if (int(nodal_.size()) != m.dof_count())
    throw ConfigError("MeshFunction: nodal value count does not match mesh");
}

double MeshFunction::value_on_edge(int edge, double t) const {
  const auto& nodes = mesh_->edge_nodes(edge);
  auto it = std::upper_bound(nodes.begin(), nodes.end(), t);
  int k = int(it - nodes.begin()) - 1;
  k = std::clamp(k, 0, int(nodes.size()) - 2);
  const double a = nodes[k], b = nodes[k + 1];
  const double ua = nodal_[mesh_->dof_at(GraphPoint::on_edge(mesh_->graph(), edge, a))];
  const double ub = nodal_[mesh_->dof_at(GraphPoint::on_edge(mesh_->graph(), edge, b))];
  const double s = (t - a) / (b - a);
  return ua + (ub - ua) * s;
}

double MeshFunction::operator()(const GraphPoint& p) const {
  if (p.is_vertex()) return nodal_[mesh_->vertex_dof(p.vertex())];
  return value_on_edge(p.edge(), p.offset());
}

double MeshFunction::derivative_norm_sq() const {
  double s = 0.0;
  for (const Mesh::Element& el : mesh_->elements()) {
    const double du = nodal_[el.dof_b] - nodal_[el.dof_a];
    s += du * du / el.h();
  }
  return s;
}

double MeshFunction::weighted_l2_sq(const Weight& v) const {
  double s = 0.0;
  for (const Mesh::Element& el : mesh_->elements())
    s += shifted_weighted_l2_sq(el.edge, el.a, el.b, v, 0.0);
  return s;
}

double MeshFunction::shifted_weighted_l2_sq(int edge, double a, double b, const Weight& v,
                                            double c) const {
  if (b <= a) return 0.0;
  const auto& nodes = mesh_->edge_nodes(edge);
  // split [a,b] at mesh nodes and at weight breakpoints
  std::vector<double> cuts{a, b};
  for (double t : nodes)
    if (t > a && t < b) cuts.push_back(t);
  if (v.has_profile(edge))
    for (double t : v.breakpoints(edge))
      if (t > a && t < b) cuts.push_back(t);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = cuts[k], hi = cuts[k + 1];
    const double mid = 0.5 * (lo + hi);
    const double w = v.value_at(edge, mid);
    if (w == 0.0) continue;
    // u affine on [lo,hi]: u(lo+t) = (u0-c) + m t
    const double u0 = value_on_edge(edge, lo) - c;
    const double u1 = value_on_edge(edge, hi) - c;
    const double len = hi - lo;
    const double m = (u1 - u0) / len;
    // int_0^len (u0 + m t)^2 dt
    const double integral = u0 * u0 * len + u0 * m * len * len + m * m * len * len * len / 3.0;
    s += w * integral;
  }
  return s;
}

double MeshFunction::shifted_weighted_l2_sq(const Subtree& t, const Weight& v, double c) const {
  double s = 0.0;
  for (const Fragment& f : t.fragments()) s += shifted_weighted_l2_sq(f.edge, f.a, f.b, v, c);
  return s;
}

double StepFunction::operator()(const GraphPoint& p) const {
  // piece boundaries carry no measure; half-open ownership ([a,b) per
  // fragment) keeps evaluation at the punctures consistent, with a closed
  // fallback for points only reachable as right endpoints
  for (std::size_t j = 0; j < pieces_.size(); ++j)
    for (const Fragment& f : pieces_[j].fragments()) {
      auto off = p.offset_on(pieces_[j].graph(), f.edge);
      if (off && *off >= f.a && (*off < f.b || f.a == f.b)) return values_[j];
    }
  for (std::size_t j = 0; j < pieces_.size(); ++j)
    if (pieces_[j].contains(p)) return values_[j];
  throw ConfigError("StepFunction: point outside every piece");
}

}  // namespace mspec
