#include "metric_spectra/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

#include "metric_spectra/common.hpp"

namespace mspec {

const std::vector<double> Weight::empty_{};

MetricGraph MetricGraph::make(std::vector<std::string> vertex_ids,
                              std::vector<EdgeRecord> records) {
  MetricGraph g;
  std::sort(vertex_ids.begin(), vertex_ids.end());
  for (std::size_t i = 1; i < vertex_ids.size(); ++i)
    if (vertex_ids[i] == vertex_ids[i - 1])
      throw ConfigError("duplicate vertex id: " + vertex_ids[i]);
  g.vertex_ids_ = std::move(vertex_ids);

  std::sort(records.begin(), records.end(),
            [](const EdgeRecord& a, const EdgeRecord& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].id == records[i - 1].id)
      throw ConfigError("duplicate edge id: " + records[i].id);

  g.edges_.reserve(records.size());
  for (const EdgeRecord& r : records) {
    Edge e;
    e.id = r.id;
    e.from = g.vertex_index(r.from);
    e.to = g.vertex_index(r.to);
    e.length = r.length;
    if (e.from < 0) throw ConfigError("edge " + r.id + ": unknown vertex " + r.from);
    if (e.to < 0) throw ConfigError("edge " + r.id + ": unknown vertex " + r.to);
    g.edges_.push_back(std::move(e));
  }
  g.incident_.assign(g.vertex_count(), {});
  for (int e = 0; e < g.edge_count(); ++e) {
    g.incident_[g.edges_[e].from].push_back(e);
    if (g.edges_[e].to != g.edges_[e].from) g.incident_[g.edges_[e].to].push_back(e);
  }
  return g;
}

int MetricGraph::vertex_index(const std::string& id) const {
  auto it = std::lower_bound(vertex_ids_.begin(), vertex_ids_.end(), id);
  if (it == vertex_ids_.end() || *it != id) return -1;
  return int(it - vertex_ids_.begin());
}

int MetricGraph::edge_index(const std::string& id) const {
  auto it = std::lower_bound(edges_.begin(), edges_.end(), id,
                             [](const Edge& e, const std::string& s) { return e.id < s; });
  if (it == edges_.end() || it->id != id) return -1;
  return int(it - edges_.begin());
}

double MetricGraph::total_length() const {
  double s = 0.0;
  for (const Edge& e : edges_) s += e.length;
  return s;
}

double total_length(const MetricGraph& g) { return g.total_length(); }

GraphPoint GraphPoint::on_edge(const MetricGraph& g, int edge, double offset) {
  const Edge& e = g.edge(edge);
  if (offset < 0.0 || offset > e.length)
    throw ConfigError("point offset " + std::to_string(offset) + " outside edge " + e.id);
  if (offset == 0.0) return at_vertex(e.from);
  if (offset == e.length) return at_vertex(e.to);
  GraphPoint p;
  p.edge_ = edge;
  p.offset_ = offset;
  return p;
}

std::optional<double> GraphPoint::offset_on(const MetricGraph& g, int e) const {
  const Edge& ed = g.edge(e);
  if (is_vertex()) {
    if (vertex_ == ed.from) return 0.0;
    if (vertex_ == ed.to) return ed.length;
    return std::nullopt;
  }
  if (edge_ == e) return offset_;
  return std::nullopt;
}

std::string GraphPoint::describe(const MetricGraph& g) const {
  if (is_vertex()) return "vertex " + g.vertex_id(vertex_);
  return "edge " + g.edge(edge_).id + " @ " + format_double(offset_);
}

// ---------------------------------------------------------------------------
// Weight

Weight::Weight(const MetricGraph& g) : g_(&g) {
  breaks_.resize(g.edge_count());
  values_.resize(g.edge_count());
}

Weight Weight::zero(const MetricGraph& g) { return Weight(g); }

Weight Weight::constant(const MetricGraph& g, double value) {
  Weight w(g);
  for (int e = 0; e < g.edge_count(); ++e)
    w.set_profile(e, {0.0, g.edge(e).length}, {value});
  return w;
}

void Weight::set_profile(int edge, std::vector<double> breakpoints, std::vector<double> values) {
  const double len = g_->edge(edge).length;
  if (breakpoints.size() < 2 || values.size() + 1 != breakpoints.size())
    throw ConfigError("weight profile on edge " + g_->edge(edge).id + ": size mismatch");
  if (breakpoints.front() != 0.0 || breakpoints.back() != len)
    throw ConfigError("weight profile on edge " + g_->edge(edge).id +
                      ": breakpoints must start at 0 and end at the edge length");
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i] > breakpoints[i - 1]))
      throw ConfigError("weight profile on edge " + g_->edge(edge).id +
                        ": breakpoints must increase strictly");
  for (double v : values)
    if (!std::isfinite(v))
      throw ConfigError("weight profile on edge " + g_->edge(edge).id + ": non-finite value");
  breaks_[edge] = std::move(breakpoints);
  values_[edge] = std::move(values);
}

const std::vector<double>& Weight::breakpoints(int edge) const {
  return breaks_[edge].empty() ? empty_ : breaks_[edge];
}
const std::vector<double>& Weight::values(int edge) const {
  return values_[edge].empty() ? empty_ : values_[edge];
}

double Weight::value_at(int edge, double t) const {
  if (breaks_[edge].empty()) return 0.0;
  const auto& bp = breaks_[edge];
  const auto& vv = values_[edge];
  if (t <= bp.front()) return vv.front();
  if (t >= bp.back()) return vv.back();
  int k = int(std::upper_bound(bp.begin(), bp.end(), t) - bp.begin()) - 1;
  if (k >= int(vv.size())) k = int(vv.size()) - 1;
  return vv[k];
}

double Weight::integral(int edge, double a, double b) const {
  if (breaks_[edge].empty() || b <= a) return 0.0;
  const auto& bp = breaks_[edge];
  const auto& vv = values_[edge];
  double s = 0.0;
  for (std::size_t k = 0; k < vv.size(); ++k) {
    const double lo = std::max(a, bp[k]);
    const double hi = std::min(b, bp[k + 1]);
    if (hi > lo) s += vv[k] * (hi - lo);
  }
  return s;
}

double Weight::integral() const {
  double s = 0.0;
  for (int e = 0; e < g_->edge_count(); ++e) s += integral(e, 0.0, g_->edge(e).length);
  return s;
}

Weight Weight::mapped(double (*f)(double)) const {
  Weight w(*g_);
  for (int e = 0; e < g_->edge_count(); ++e) {
    if (breaks_[e].empty()) continue;
    std::vector<double> vv = values_[e];
    for (double& v : vv) v = f(v);
    w.set_profile(e, breaks_[e], std::move(vv));
  }
  return w;
}

Weight Weight::positive_part() const {
  return mapped(+[](double v) { return v > 0.0 ? v : 0.0; });
}
Weight Weight::negative_part() const {
  return mapped(+[](double v) { return v < 0.0 ? -v : 0.0; });
}
Weight Weight::abs() const {
  return mapped(+[](double v) { return std::abs(v); });
}
Weight Weight::negated() const {
  return mapped(+[](double v) { return -v; });
}
Weight Weight::squared() const {
  return mapped(+[](double v) { return v * v; });
}

Weight Weight::scaled(double c) const {
  Weight w(*g_);
  for (int e = 0; e < g_->edge_count(); ++e) {
    if (breaks_[e].empty()) continue;
    std::vector<double> vv = values_[e];
    for (double& v : vv) v *= c;
    w.set_profile(e, breaks_[e], std::move(vv));
  }
  return w;
}

double Weight::integral_abs() const {
  double s = 0.0;
  for (int e = 0; e < g_->edge_count(); ++e) {
    const auto& bp = breaks_[e];
    const auto& vv = values_[e];
    for (std::size_t k = 0; k < vv.size(); ++k) s += std::abs(vv[k]) * (bp[k + 1] - bp[k]);
  }
  return s;
}

double Weight::integral_sqrt() const {
  double s = 0.0;
  for (int e = 0; e < g_->edge_count(); ++e) {
    const auto& bp = breaks_[e];
    const auto& vv = values_[e];
    for (std::size_t k = 0; k < vv.size(); ++k)
      if (vv[k] > 0.0) s += std::sqrt(vv[k]) * (bp[k + 1] - bp[k]);
  }
  return s;
}

double Weight::min_value() const {
  double m = 0.0;
  bool any = false;
  for (const auto& vv : values_)
    for (double v : vv) {
      m = any ? std::min(m, v) : v;
      any = true;
    }
  return any ? m : 0.0;
}

double Weight::max_value() const {
  double m = 0.0;
  bool any = false;
  for (const auto& vv : values_)
    for (double v : vv) {
      m = any ? std::max(m, v) : v;
      any = true;
    }
  return any ? m : 0.0;
}

// ---------------------------------------------------------------------------
// Validation

std::vector<Violation> validate(const MetricGraph& g) {
  std::vector<Violation> out;
  for (int e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    if (ed.from == ed.to) out.push_back({"loop", ed.id, "edge endpoints coincide"});
    if (!(ed.length > 0.0) || !std::isfinite(ed.length))
      out.push_back({"nonpositive length", ed.id,
                     "edge length " + format_double(ed.length) + " must be finite and > 0"});
  }
  for (int v = 0; v < g.vertex_count(); ++v)
    if (g.degree(v) == 0 && g.vertex_count() > 1)
      out.push_back({"isolated vertex", g.vertex_id(v), "vertex has degree 0"});

  if (g.vertex_count() > 0) {
    std::vector<char> seen(g.vertex_count(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int e : g.incident(v)) {
        int w = g.edge(e).from == v ? g.edge(e).to : g.edge(e).from;
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
    for (int v = 0; v < g.vertex_count(); ++v)
      if (!seen[v]) {
        out.push_back({"disconnected", g.vertex_id(v), "vertex unreachable from " + g.vertex_id(0)});
        break;
      }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Metric geometry

namespace {

std::vector<double> dijkstra(const MetricGraph& g, const std::vector<std::pair<int, double>>& seeds) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(g.vertex_count(), inf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (auto [v, d] : seeds)
    if (d < dist[v]) {
      dist[v] = d;
      pq.push({d, v});
    }
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (d > dist[v]) continue;
    for (int e : g.incident(v)) {
      const Edge& ed = g.edge(e);
      int w = ed.from == v ? ed.to : ed.from;
      double nd = d + ed.length;
      if (nd < dist[w]) {
        dist[w] = nd;
        pq.push({nd, w});
      }
    }
  }
  return dist;
}

}  // namespace

std::vector<double> distances_to_vertices(const MetricGraph& g, const GraphPoint& p) {
  std::vector<std::pair<int, double>> seeds;
  if (p.is_vertex()) {
    seeds.push_back({p.vertex(), 0.0});
  } else {
    const Edge& e = g.edge(p.edge());
    seeds.push_back({e.from, p.offset()});
    seeds.push_back({e.to, e.length - p.offset()});
  }
  return dijkstra(g, seeds);
}

double distance(const MetricGraph& g, const GraphPoint& p, const GraphPoint& q) {
  if (p == q) return 0.0;
  std::vector<double> dp = distances_to_vertices(g, p);
  double best = std::numeric_limits<double>::infinity();
  if (q.is_vertex()) {
    best = dp[q.vertex()];
  } else {
    const Edge& e = g.edge(q.edge());
    best = std::min(dp[e.from] + q.offset(), dp[e.to] + e.length - q.offset());
  }
  if (!p.is_vertex() && !q.is_vertex() && p.edge() == q.edge())
    best = std::min(best, std::abs(p.offset() - q.offset()));
  return best;
}

namespace {

struct Affine {
  double c0, cs, ct;  // value = c0 + cs*s + ct*t
  double at(double s, double t) const { return c0 + cs * s + ct * t; }
};

// max over the box [0,Ls] x [0,Lt] of min_i f_i. Candidates are the box
// corners, pairwise-equality lines clipped to the box boundary, and
// intersections of two equality lines (the LP vertices).
double max_min_affine(const std::vector<Affine>& fs, double ls, double lt) {
  std::vector<std::pair<double, double>> cand = {{0, 0}, {ls, 0}, {0, lt}, {ls, lt}};
  const int m = int(fs.size());
  auto add = [&](double s, double t) {
    if (s >= -1e-12 && s <= ls + 1e-12 && t >= -1e-12 && t <= lt + 1e-12)
      cand.push_back({std::clamp(s, 0.0, ls), std::clamp(t, 0.0, lt)});
  };
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      const double a0 = fs[i].c0 - fs[j].c0;
      const double as = fs[i].cs - fs[j].cs;
      const double at = fs[i].ct - fs[j].ct;
      // line a0 + as*s + at*t = 0 clipped to the four box sides
      if (at != 0.0) {
        add(0.0, -a0 / at);
        add(ls, -(a0 + as * ls) / at);
      }
      if (as != 0.0) {
        add(-a0 / as, 0.0);
        add(-(a0 + at * lt) / as, lt);
      }
      // intersections with the other equality lines
      for (int k = 0; k < m; ++k)
        for (int l = k + 1; l < m; ++l) {
          if (k == i && l == j) continue;
          const double b0 = fs[k].c0 - fs[l].c0;
          const double bs = fs[k].cs - fs[l].cs;
          const double bt = fs[k].ct - fs[l].ct;
          const double det = as * bt - at * bs;
          if (std::abs(det) < 1e-15) continue;
          const double s = (-a0 * bt + at * b0) / det;
          const double t = (-as * b0 + a0 * bs) / det;
          add(s, t);
        }
    }
  double best = -std::numeric_limits<double>::infinity();
  for (auto [s, t] : cand) {
    double v = std::numeric_limits<double>::infinity();
    for (const Affine& f : fs) v = std::min(v, f.at(s, t));
    best = std::max(best, v);
  }
  return best;
}

}  // namespace

double diameter(const MetricGraph& g) {
  const int nv = g.vertex_count();
  // all-pairs vertex distances
  std::vector<std::vector<double>> d(nv);
  for (int v = 0; v < nv; ++v) d[v] = dijkstra(g, {{v, 0.0}});

  double best = 0.0;
  for (int e = 0; e < g.edge_count(); ++e) {
    const Edge& ee = g.edge(e);
    // two points on the same edge: max of min(|s-t|, around either way)
    // is (length + d(u,v))/2, attained with one point at an endpoint
    best = std::max(best, 0.5 * (ee.length + d[ee.from][ee.to]));
    for (int f = e + 1; f < g.edge_count(); ++f) {
      const Edge& ef = g.edge(f);
      std::vector<Affine> fs;
      // leave e through either end, enter f through either end
      fs.push_back({d[ee.from][ef.from], 1.0, 1.0});
      fs.push_back({d[ee.from][ef.to] + ef.length, 1.0, -1.0});
      fs.push_back({d[ee.to][ef.from] + ee.length, -1.0, 1.0});
      fs.push_back({d[ee.to][ef.to] + ee.length + ef.length, -1.0, -1.0});
      best = std::max(best, max_min_affine(fs, ee.length, ef.length));
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Edge split

EdgeSplit split_at(const MetricGraph& g, const Weight& v, const GraphPoint& p) {
  if (p.is_vertex()) throw ConfigError("split_at: point is already a vertex");
  const Edge& e = g.edge(p.edge());
  const double t = p.offset();

  auto unique_id = [&](std::string base, bool is_vertex) {
    std::string id = base;
    while ((is_vertex ? g.vertex_index(id) : g.edge_index(id)) >= 0) id += "'";
    return id;
  };
  const std::string vid = unique_id(e.id + "@" + format_double(t), true);
  const std::string id1 = unique_id(e.id + ":1", false);
  const std::string id2 = unique_id(e.id + ":2", false);

  std::vector<std::string> vids;
  for (int i = 0; i < g.vertex_count(); ++i) vids.push_back(g.vertex_id(i));
  vids.push_back(vid);

  std::vector<EdgeRecord> recs;
  for (int i = 0; i < g.edge_count(); ++i) {
    if (i == p.edge()) continue;
    const Edge& ed = g.edge(i);
    recs.push_back({ed.id, g.vertex_id(ed.from), g.vertex_id(ed.to), ed.length});
  }
  recs.push_back({id1, g.vertex_id(e.from), vid, t});
  recs.push_back({id2, vid, g.vertex_id(e.to), e.length - t});

  EdgeSplit out{MetricGraph::make(std::move(vids), std::move(recs)), Weight(), -1};
  out.vertex = out.graph.vertex_index(vid);

  out.weight = Weight::zero(out.graph);
  for (int i = 0; i < g.edge_count(); ++i) {
    if (!v.has_profile(i)) continue;
    if (i != p.edge()) {
      int ni = out.graph.edge_index(g.edge(i).id);
      out.weight.set_profile(ni, v.breakpoints(i), v.values(i));
      continue;
    }
    // restrict the profile to [0,t] and [t,len]
    const auto& bp = v.breakpoints(i);
    const auto& vv = v.values(i);
    std::vector<double> b1{0.0}, v1, b2{0.0}, v2;
    for (std::size_t k = 0; k < vv.size(); ++k) {
      const double lo = bp[k], hi = bp[k + 1];
      if (lo < t) {
        b1.push_back(std::min(hi, t));
        v1.push_back(vv[k]);
      }
      if (hi > t) {
        b2.push_back(std::min(hi, bp.back()) - t);
        v2.push_back(vv[k]);
      }
    }
    b1.back() = t;
    b2.back() = e.length - t;
    out.weight.set_profile(out.graph.edge_index(id1), std::move(b1), std::move(v1));
    out.weight.set_profile(out.graph.edge_index(id2), std::move(b2), std::move(v2));
  }
  return out;
}

}  // namespace mspec
