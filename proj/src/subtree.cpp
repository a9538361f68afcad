#include "metric_spectra/subtree.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "metric_spectra/common.hpp"

namespace mspec {

Subtree Subtree::whole(const MetricGraph& g) {
  std::vector<Fragment> fr;
  fr.reserve(g.edge_count());
  for (int e = 0; e < g.edge_count(); ++e) fr.push_back({e, 0.0, g.edge(e).length});
  return from_fragments(g, std::move(fr));
}

Subtree Subtree::from_fragments(const MetricGraph& g, std::vector<Fragment> frags) {
  for (const Fragment& f : frags) {
    if (f.a > f.b || f.a < 0.0 || f.b > g.edge(f.edge).length)
      throw ConfigError("fragment outside edge " + g.edge(f.edge).id);
  }
  std::sort(frags.begin(), frags.end(), [](const Fragment& x, const Fragment& y) {
    if (x.edge != y.edge) return x.edge < y.edge;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  // merge touching fragments on the same edge; reject true overlaps
  std::vector<Fragment> out;
  for (const Fragment& f : frags) {
    if (!out.empty() && out.back().edge == f.edge && f.a <= out.back().b) {
      if (f.a < out.back().b)
        throw ConfigError("overlapping fragments on edge " + g.edge(f.edge).id);
      out.back().b = std::max(out.back().b, f.b);
    } else {
      out.push_back(f);
    }
  }
  Subtree t;
  t.g_ = &g;
  t.frags_ = std::move(out);
  return t;
}

Subtree Subtree::single_point(const MetricGraph& g, const GraphPoint& p) {
  double off;
  int edge;
  if (p.is_vertex()) {
    if (g.degree(p.vertex()) == 0) throw ConfigError("single_point: isolated vertex");
    edge = g.incident(p.vertex())[0];
    off = (g.edge(edge).from == p.vertex()) ? 0.0 : g.edge(edge).length;
  } else {
    edge = p.edge();
    off = p.offset();
  }
  return from_fragments(g, {{edge, off, off}});
}

double Subtree::measure() const {
  double s = 0.0;
  for (const Fragment& f : frags_) s += f.b - f.a;
  return s;
}

double Subtree::weight_integral(const Weight& v) const {
  double s = 0.0;
  for (const Fragment& f : frags_) s += v.integral(f.edge, f.a, f.b);
  return s;
}

bool Subtree::contains(const GraphPoint& p) const {
  for (const Fragment& f : frags_) {
    auto off = p.offset_on(*g_, f.edge);
    if (off && *off >= f.a && *off <= f.b) return true;
  }
  return false;
}

double Subtree::overlap_measure(const Subtree& o) const {
  double s = 0.0;
  for (const Fragment& f : frags_)
    for (const Fragment& h : o.frags_) {
      if (f.edge != h.edge) continue;
      const double lo = std::max(f.a, h.a), hi = std::min(f.b, h.b);
      if (hi > lo) s += hi - lo;
    }
  return s;
}

Subtree Subtree::minus_interval(int edge, double a, double b) const {
  std::vector<Fragment> out;
  for (const Fragment& f : frags_) {
    if (f.edge != edge || f.b <= a || f.a >= b) {
      out.push_back(f);
      continue;
    }
    if (f.a < a) out.push_back({edge, f.a, std::min(f.b, a)});
    if (f.b > b) out.push_back({edge, std::max(f.a, b), f.b});
  }
  return from_fragments(*g_, std::move(out));
}

Subtree Subtree::difference(const Subtree& other) const {
  std::vector<Fragment> out;
  for (const Fragment& f : frags_) {
    std::vector<Fragment> cur{f};
    for (const Fragment& h : other.frags_) {
      if (h.edge != f.edge || h.a == h.b) continue;
      std::vector<Fragment> next;
      for (const Fragment& c : cur) {
        if (c.edge != h.edge || c.b <= h.a || c.a >= h.b) {
          next.push_back(c);
          continue;
        }
        if (c.a < h.a) next.push_back({c.edge, c.a, std::min(c.b, h.a)});
        if (c.b > h.b) next.push_back({c.edge, std::max(c.a, h.b), c.b});
      }
      cur = std::move(next);
    }
    for (const Fragment& c : cur) out.push_back(c);
  }
  return from_fragments(*g_, std::move(out));
}

GraphPoint Subtree::min_point() const {
  if (frags_.empty()) throw ConfigError("min_point of empty subtree");
  GraphPoint best;
  bool any = false;
  for (const Fragment& f : frags_) {
    for (double off : {f.a, f.b}) {
      GraphPoint p = GraphPoint::on_edge(*g_, f.edge, off);
      if (!any || p.before(best)) {
        best = p;
        any = true;
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Structure graph of a subtree: nodes are fragment endpoints (canonical
// graph points) plus any requested split points; arcs are the fragment
// pieces between consecutive nodes of one edge.

namespace {

struct Micro {
  std::vector<GraphPoint> nodes;
  struct Arc {
    int a, b;  // node indices, offsets lo < hi
    int edge;
    double lo, hi;
  };
  std::vector<Arc> arcs;
  std::vector<std::vector<int>> adj;  // node -> arc indices

  int node_index(const GraphPoint& p) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i] == p) return int(i);
    return -1;
  }
};

Micro build_micro(const Subtree& t, const std::vector<GraphPoint>& extra) {
  const MetricGraph& g = t.graph();
  Micro m;
  auto intern = [&](const GraphPoint& p) {
    int i = m.node_index(p);
    if (i >= 0) return i;
    m.nodes.push_back(p);
    return int(m.nodes.size()) - 1;
  };
  // collect split offsets per fragment
  for (const Fragment& f : t.fragments()) {
    std::vector<double> offs{f.a, f.b};
    for (const GraphPoint& p : extra) {
      auto off = p.offset_on(g, f.edge);
      if (off && *off > f.a && *off < f.b) offs.push_back(*off);
    }
    std::sort(offs.begin(), offs.end());
    offs.erase(std::unique(offs.begin(), offs.end()), offs.end());
    int prev = intern(GraphPoint::on_edge(g, f.edge, offs[0]));
    for (std::size_t k = 1; k < offs.size(); ++k) {
      int cur = intern(GraphPoint::on_edge(g, f.edge, offs[k]));
      m.arcs.push_back({prev, cur, f.edge, offs[k - 1], offs[k]});
      prev = cur;
    }
  }
  m.adj.assign(m.nodes.size(), {});
  for (std::size_t i = 0; i < m.arcs.size(); ++i) {
    m.adj[m.arcs[i].a].push_back(int(i));
    if (m.arcs[i].b != m.arcs[i].a) m.adj[m.arcs[i].b].push_back(int(i));
  }
  return m;
}

}  // namespace

std::vector<Branch> branches_at(const Subtree& t, const GraphPoint& x) {
  if (!t.contains(x)) throw ConfigError("branches_at: point not in subtree");
  const MetricGraph& g = t.graph();
  Micro m = build_micro(t, {x});
  const int xi = m.node_index(x);
  if (xi < 0) throw ConfigError("branches_at: point not a node");

  std::vector<int> arc_comp(m.arcs.size(), -1);
  std::vector<Branch> out;
  for (int start : m.adj[xi]) {
    if (arc_comp[start] >= 0) continue;
    // flood from this arc without passing through x
    std::vector<int> stack{start};
    std::vector<int> arcs_here;
    arc_comp[start] = int(out.size());
    while (!stack.empty()) {
      int ai = stack.back();
      stack.pop_back();
      arcs_here.push_back(ai);
      for (int node : {m.arcs[ai].a, m.arcs[ai].b}) {
        if (node == xi) continue;
        for (int nb : m.adj[node])
          if (arc_comp[nb] < 0) {
            arc_comp[nb] = int(out.size());
            stack.push_back(nb);
          }
      }
    }
    std::vector<Fragment> frags;
    for (int ai : arcs_here) frags.push_back({m.arcs[ai].edge, m.arcs[ai].lo, m.arcs[ai].hi});
    Branch br;
    br.piece = Subtree::from_fragments(g, std::move(frags));
    const Micro::Arc& a0 = m.arcs[start];
    br.arc_edge = a0.edge;
    br.arc_lo = a0.lo;
    br.arc_hi = a0.hi;
    br.x_at_lo = (a0.a == xi);
    br.far_end = m.nodes[br.x_at_lo ? a0.b : a0.a];
    out.push_back(std::move(br));
  }
  std::sort(out.begin(), out.end(), [&](const Branch& p, const Branch& q) {
    const std::string& pe = g.edge(p.arc_edge).id;
    const std::string& qe = g.edge(q.arc_edge).id;
    if (pe != qe) return pe < qe;
    if (p.arc_lo != q.arc_lo) return p.arc_lo < q.arc_lo;
    return p.arc_hi < q.arc_hi;
  });
  return out;
}

std::vector<Subtree> canonical_partition(const Subtree& t, const GraphPoint& x) {
  std::vector<Branch> br = branches_at(t, x);
  std::vector<Subtree> out;
  out.reserve(br.size());
  for (Branch& b : br) out.push_back(std::move(b.piece));
  return out;
}

std::vector<GraphPoint> boundary_points(const Subtree& t) {
  Micro m = build_micro(t, {});
  std::vector<GraphPoint> out;
  for (std::size_t i = 0; i < m.nodes.size(); ++i)
    if (m.adj[i].size() <= 1) out.push_back(m.nodes[i]);
  std::sort(out.begin(), out.end(), [](const GraphPoint& a, const GraphPoint& b) { return a.before(b); });
  return out;
}

bool Subtree::connected() const {
  if (frags_.empty()) return true;
  Micro m = build_micro(*this, {});
  std::vector<char> seen(m.nodes.size(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  std::size_t cnt = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int ai : m.adj[v])
      for (int w : {m.arcs[ai].a, m.arcs[ai].b})
        if (!seen[w]) {
          seen[w] = 1;
          ++cnt;
          stack.push_back(w);
        }
  }
  return cnt == m.nodes.size();
}

// ---------------------------------------------------------------------------
// Functionals

namespace {
double power_product(double base1, double a1, double base2, double a2) {
  const double b1 = std::max(base1, 0.0);
  const double b2 = std::max(base2, 0.0);
  double r = 1.0;
  if (a1 != 0.0) r *= std::pow(b1, a1);
  if (a2 != 0.0) r *= std::pow(b2, a2);
  return r;
}
}  // namespace

SubtreeFn SubtreeFn::measure() {
  return SubtreeFn([](const Subtree& t) { return t.measure(); }, "measure");
}

SubtreeFn SubtreeFn::mass(Weight v) {
  if (v.min_value() < 0.0) throw ConfigError("SubtreeFn::mass requires a nonnegative weight");
  return SubtreeFn([v = std::move(v)](const Subtree& t) { return t.weight_integral(v); }, "mass");
}

SubtreeFn SubtreeFn::holder(SubtreeFn f1, double a1, SubtreeFn f2, double a2) {
  if (!(a1 > 0.0) || !(a2 > 0.0) || std::abs(a1 + a2 - 1.0) > 1e-14)
    throw ConfigError("holder combination needs positive exponents summing to 1");
  std::string n = f1.name() + "^" + format_double(a1) + "*" + f2.name() + "^" + format_double(a2);
  return SubtreeFn(
      [f1 = std::move(f1), a1, f2 = std::move(f2), a2](const Subtree& t) {
        return power_product(f1(t), a1, f2(t), a2);
      },
      std::move(n));
}

SubtreeFn SubtreeFn::sqrt_measure_mass(Weight v) {
  if (v.min_value() < 0.0) throw ConfigError("sqrt_measure_mass requires a nonnegative weight");
  return SubtreeFn(
      [v = std::move(v)](const Subtree& t) {
        return power_product(t.measure(), 0.5, t.weight_integral(v), 0.5);
      },
      "phi_V");
}

SubtreeFn SubtreeFn::order_weighted(Weight v, int l) {
  if (l < 1) throw ConfigError("order_weighted requires l >= 1");
  if (v.min_value() < 0.0) throw ConfigError("order_weighted requires a nonnegative weight");
  const double beta = 1.0 / (2.0 * l);
  return SubtreeFn(
      [v = std::move(v), beta](const Subtree& t) {
        return power_product(t.measure(), 1.0 - beta, t.weight_integral(v), beta);
      },
      "phi_l" + std::to_string(l));
}

}  // namespace mspec
