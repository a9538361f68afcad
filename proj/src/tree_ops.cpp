#include "metric_spectra/tree_ops.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "metric_spectra/common.hpp"
#include "metric_spectra/random_instances.hpp"

namespace mspec {

// ---------------------------------------------------------------------------
// RootedTree

RootedTree RootedTree::make(const MetricGraph& tree, const Weight& w, const GraphPoint& root) {
  RootedTree t;
  if (root.is_vertex()) {
    t.graph_ = tree;
    t.weight_ = w;
    t.root_vertex_ = root.vertex();
  } else {
    EdgeSplit s = split_at(tree, w, root);
    t.graph_ = std::move(s.graph);
    t.weight_ = std::move(s.weight);
    t.root_vertex_ = s.vertex;
  }
  const MetricGraph& g = t.graph_;
  if (!validate(g).empty()) throw ConfigError("RootedTree: invalid graph");
  if (g.edge_count() != g.vertex_count() - 1)
    throw ConfigError("RootedTree: graph is not a tree (#E != #V - 1)");

  t.parent_.assign(g.vertex_count(), -1);
  t.parent_edge_.assign(g.vertex_count(), -1);
  t.away_.assign(g.edge_count(), 0);
  std::vector<int> stack{t.root_vertex_};
  std::vector<char> seen(g.vertex_count(), 0);
  seen[t.root_vertex_] = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int e : g.incident(v)) {
      const Edge& ed = g.edge(e);
      const int u = ed.from == v ? ed.to : ed.from;
      if (seen[u]) continue;
      seen[u] = 1;
      t.parent_[u] = v;
      t.parent_edge_[u] = e;
      t.away_[e] = (ed.from == v);
      stack.push_back(u);
    }
  }
  return t;
}

bool RootedTree::precedes(const GraphPoint& x, const GraphPoint& y) const {
  // x on the unique path root -> y iff the distances add up
  const double dx = distance(graph_, root(), x);
  const double dy = distance(graph_, root(), y);
  const double dxy = distance(graph_, x, y);
  return std::abs(dx + dxy - dy) <= 1e-9 * (1.0 + graph_.total_length());
}

// ---------------------------------------------------------------------------
// Cycle cutting

namespace {

struct WorkEdge {
  std::string id;
  std::string from, to;
  double length;
  CutReport::Trace trace;
};

bool connected_without(const std::vector<std::string>& vids, const std::vector<WorkEdge>& edges,
                       const std::string& skip_id) {
  if (vids.empty()) return true;
  std::map<std::string, int> vidx;
  for (std::size_t i = 0; i < vids.size(); ++i) vidx[vids[i]] = int(i);
  std::vector<std::vector<int>> adj(vids.size());
  for (const WorkEdge& e : edges) {
    if (e.id == skip_id) continue;
    adj[vidx.at(e.from)].push_back(vidx.at(e.to));
    adj[vidx.at(e.to)].push_back(vidx.at(e.from));
  }
  std::vector<char> seen(vids.size(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  std::size_t cnt = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int u : adj[v])
      if (!seen[u]) {
        seen[u] = 1;
        ++cnt;
        stack.push_back(u);
      }
  }
  return cnt == vids.size();
}

std::string unique_name(std::string base, const std::vector<std::string>& taken) {
  while (std::find(taken.begin(), taken.end(), base) != taken.end()) base += "'";
  return base;
}

}  // namespace

CutReport cut_cycles(const MetricGraph& g) {
  if (!validate(g).empty()) throw ConfigError("cut_cycles: invalid graph");

  std::vector<std::string> vids;
  for (int v = 0; v < g.vertex_count(); ++v) vids.push_back(g.vertex_id(v));
  std::vector<WorkEdge> edges;
  std::vector<std::string> eids;
  for (int e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    edges.push_back({ed.id, g.vertex_id(ed.from), g.vertex_id(ed.to), ed.length, {e, 0.0, +1}});
    eids.push_back(ed.id);
  }

  CutReport rep;
  rep.orig_ = &g;
  std::map<std::string, GraphPoint> cut_image;
  std::vector<std::pair<std::string, std::string>> ident_ids;

  for (;;) {
    // smallest-id edge lying on a cycle
    std::sort(edges.begin(), edges.end(),
              [](const WorkEdge& a, const WorkEdge& b) { return a.id < b.id; });
    int cut_idx = -1;
    for (std::size_t i = 0; i < edges.size(); ++i)
      if (connected_without(vids, edges, edges[i].id)) {
        cut_idx = int(i);
        break;
      }
    if (cut_idx < 0) break;

    WorkEdge we = edges[cut_idx];
    edges.erase(edges.begin() + cut_idx);
    ++rep.cut_count;

    const std::string leaf1 = unique_name("cut" + std::to_string(rep.cut_count) + ".a", vids);
    vids.push_back(leaf1);
    const std::string leaf2 = unique_name("cut" + std::to_string(rep.cut_count) + ".b", vids);
    vids.push_back(leaf2);
    const std::string id1 = unique_name(we.id + ":a", eids);
    eids.push_back(id1);
    const std::string id2 = unique_name(we.id + ":b", eids);
    eids.push_back(id2);

    const double half = 0.5 * we.length;
    edges.push_back({id1, we.from, leaf1, half, we.trace});
    edges.push_back({id2, we.to, leaf2, half,
                     {we.trace.orig_edge, we.trace.start + we.trace.dir * we.length, -we.trace.dir}});

    const double mid_orig = we.trace.start + we.trace.dir * half;
    const GraphPoint image = GraphPoint::on_edge(g, we.trace.orig_edge, mid_orig);
    cut_image[leaf1] = image;
    cut_image[leaf2] = image;
    ident_ids.push_back({leaf1, leaf2});
  }

  std::vector<EdgeRecord> recs;
  for (const WorkEdge& e : edges) recs.push_back({e.id, e.from, e.to, e.length});
  rep.tree = MetricGraph::make(vids, std::move(recs));

  rep.traces_.resize(rep.tree.edge_count());
  for (const WorkEdge& e : edges) rep.traces_[rep.tree.edge_index(e.id)] = e.trace;

  rep.vertex_image_.resize(rep.tree.vertex_count());
  for (int v = 0; v < rep.tree.vertex_count(); ++v) {
    const std::string& id = rep.tree.vertex_id(v);
    auto it = cut_image.find(id);
    if (it != cut_image.end())
      rep.vertex_image_[v] = it->second;
    else
      rep.vertex_image_[v] = GraphPoint::at_vertex(g.vertex_index(id));
  }
  for (const auto& [a, b] : ident_ids)
    rep.identified.push_back({rep.tree.vertex_index(a), rep.tree.vertex_index(b)});
  return rep;
}

GraphPoint CutReport::to_graph(const GraphPoint& p) const {
  if (p.is_vertex()) return vertex_image_[p.vertex()];
  const Trace& tr = traces_[p.edge()];
  return GraphPoint::on_edge(*orig_, tr.orig_edge, tr.start + tr.dir * p.offset());
}

Weight CutReport::pull_back(const Weight& w) const {
  Weight out = Weight::zero(tree);
  for (int e = 0; e < tree.edge_count(); ++e) {
    const Trace& tr = traces_[e];
    if (!w.has_profile(tr.orig_edge)) continue;
    const auto& bp = w.breakpoints(tr.orig_edge);
    const auto& vv = w.values(tr.orig_edge);
    const double len = tree.edge(e).length;
    const double lo = tr.dir > 0 ? tr.start : tr.start - len;
    const double hi = lo + len;
    std::vector<double> nb{0.0};
    std::vector<double> nv;
    for (std::size_t k = 0; k < vv.size(); ++k) {
      const double a = std::max(bp[k], lo), b = std::min(bp[k + 1], hi);
      if (b <= a) continue;
      nb.push_back(b - lo);
      nv.push_back(vv[k]);
    }
    nb.back() = len;
    if (tr.dir < 0) {
      // reverse the profile
      std::vector<double> rb{0.0}, rv;
      for (std::size_t k = nv.size(); k-- > 0;) {
        rv.push_back(nv[k]);
        rb.push_back(len - (k == 0 ? 0.0 : nb[k]));
      }
      rb.back() = len;
      nb = std::move(rb);
      nv = std::move(rv);
    }
    out.set_profile(e, std::move(nb), std::move(nv));
  }
  return out;
}

Subtree CutReport::map_piece(const Subtree& piece) const {
  std::vector<Fragment> out;
  for (const Fragment& f : piece.fragments()) {
    const Trace& tr = traces_[f.edge];
    const double x = tr.start + tr.dir * f.a;
    const double y = tr.start + tr.dir * f.b;
    out.push_back({tr.orig_edge, std::min(x, y), std::max(x, y)});
  }
  return Subtree::from_fragments(*orig_, std::move(out));
}

// ---------------------------------------------------------------------------
// phi_tilde and the balanced split

double phi_tilde(const SubtreeFn& phi, const Subtree& t, const GraphPoint& x) {
  double best = 0.0;
  for (const Subtree& b : canonical_partition(t, x)) best = std::max(best, phi(b));
  return best;
}

namespace {

Subtree union_of(const MetricGraph& g, const std::vector<const Subtree*>& parts,
                 const GraphPoint& include) {
  std::vector<Fragment> fr;
  for (const Subtree* p : parts)
    for (const Fragment& f : p->fragments()) fr.push_back(f);
  if (fr.empty()) return Subtree::single_point(g, include);
  return Subtree::from_fragments(g, std::move(fr));
}

// branch minus the walked sub-interval between `from` and `to` on `edge`
// (`to` stays in the piece).
Subtree trim_branch(const Subtree& branch, int edge, double from, double to) {
  const double lo = std::min(from, to), hi = std::max(from, to);
  std::vector<Fragment> out;
  bool done = false;
  for (const Fragment& f : branch.fragments()) {
    if (!done && f.edge == edge && f.a <= lo && hi <= f.b) {
      if (from < to) {
        out.push_back({edge, to, f.b});
        if (f.a < from) out.push_back({edge, f.a, from});  // part before the walk start
      } else {
        out.push_back({edge, f.a, to});
        if (f.b > from) out.push_back({edge, from, f.b});
      }
      done = true;
    } else {
      out.push_back(f);
    }
  }
  if (!done) throw std::logic_error("trim_branch: walked fragment not found");
  return Subtree::from_fragments(branch.graph(), std::move(out));
}

}  // namespace

SplitResult split_once(const Subtree& t, const SubtreeFn& phi, double eps,
                       const GraphPoint& root) {
  const double phi_total = phi(t);
  if (!(eps > 0.0) || !(eps < phi_total))
    throw ConfigError("split_once: eps must satisfy 0 < eps < phi(T)");

  GraphPoint cur;
  {
    bool from_root = false;
    if (t.contains(root)) {
      auto br = branches_at(t, root);
      if (br.size() <= 1) {
        cur = root;
        from_root = true;
      }
    }
    if (!from_root) {
      std::vector<GraphPoint> bd = boundary_points(t);
      if (bd.empty()) throw ConfigError("split_once: subtree has no boundary point");
      cur = bd.front();
    }
  }

  SplitResult out;
  GraphPoint prev;
  bool has_prev = false;
  const MetricGraph& g = t.graph();

  const int max_steps = 4 * int(t.fragments().size()) + int(g.vertex_count()) + 16;
  for (int step = 0; step <= max_steps; ++step) {
    std::vector<Branch> all = branches_at(t, cur);
    std::vector<const Subtree*> fwd_pieces;
    const Branch* chosen = nullptr;
    double g_cur = 0.0;
    {
      const Branch* backward = nullptr;
      double best = -1.0;
      for (const Branch& b : all) {
        if (has_prev && !backward && b.piece.contains(prev)) {
          backward = &b;
          continue;
        }
        fwd_pieces.push_back(&b.piece);
        const double v = phi(b.piece);
        if (v > best) {  // ties keep the first branch (edge-id order)
          best = v;
          chosen = &b;
        }
      }
      g_cur = std::max(best, 0.0);
    }
    Subtree fwd_union = union_of(g, fwd_pieces, cur);
    const double f_cur = phi(fwd_union);
    out.f_trace.push_back(f_cur);

    if (g_cur <= eps) {
      out.kept = {std::move(fwd_union), cur};
      Subtree rest = t.difference(out.kept.piece);
      if (rest.empty()) rest = Subtree::single_point(g, cur);
      out.rest = std::move(rest);
      return out;
    }

    // walk into the maximal branch
    const double p = chosen->x_at_lo ? chosen->arc_lo : chosen->arc_hi;
    const double q = chosen->x_at_lo ? chosen->arc_hi : chosen->arc_lo;
    const GraphPoint next = chosen->far_end;

    // F at the far end of the arc
    Subtree beyond = trim_branch(chosen->piece, chosen->arc_edge, p, q);
    const double f_next = phi(beyond);
    if (f_next > eps) {
      prev = cur;
      has_prev = true;
      cur = next;
      continue;
    }

    // the crossing lies inside this arc: bisect on the offset
    const double len = g.edge(chosen->arc_edge).length;
    double s_lo = 0.0, s_hi = std::abs(q - p);
    const double tol = 1e-12 * len;
    while (s_hi - s_lo > tol) {
      const double mid = 0.5 * (s_lo + s_hi);
      const double pos =
          std::clamp(p + (q > p ? mid : -mid), std::min(p, q), std::max(p, q));
      const double f_mid = phi(trim_branch(chosen->piece, chosen->arc_edge, p, pos));
      if (f_mid > eps)
        s_lo = mid;
      else
        s_hi = mid;
    }
    const double pos =
        std::clamp(p + (q > p ? s_hi : -s_hi), std::min(p, q), std::max(p, q));
    GraphPoint x = GraphPoint::on_edge(g, chosen->arc_edge, pos);
    Subtree kept = trim_branch(chosen->piece, chosen->arc_edge, p, pos);
    out.f_trace.push_back(phi(kept));
    Subtree rest = t.difference(kept);
    if (rest.empty()) rest = Subtree::single_point(g, x);
    out.kept = {std::move(kept), x};
    out.rest = std::move(rest);
    return out;
  }
  throw std::logic_error("split_once: walk failed to terminate");
}

SplitResult split_once(const RootedTree& t, const SubtreeFn& phi, double eps) {
  return split_once(Subtree::whole(t.graph()), phi, eps, t.root());
}

// ---------------------------------------------------------------------------
// Partition recursion

double Partition::max_phi_tilde() const {
  double m = 0.0;
  for (double v : piece_phi_tilde) m = std::max(m, v);
  return m;
}

namespace {

GraphPoint default_puncture(const Subtree& t, const GraphPoint& root) {
  if (t.contains(root)) return root;
  std::vector<GraphPoint> bd = boundary_points(t);
  if (!bd.empty()) return bd.front();
  return t.min_point();
}

void partition_recurse(const Subtree& t, const SubtreeFn& phi, int n, const GraphPoint& root,
                       Partition& out) {
  const double total = phi(t);
  if (total <= 0.0) {
    out.pieces.push_back({t, default_puncture(t, root)});
    return;
  }
  if (n <= 1) {
    SplitResult s = split_once(t, phi, total / 2.0, root);
    out.pieces.push_back({t, s.kept.puncture});
    return;
  }
  SplitResult s = split_once(t, phi, total / double(n + 1), root);
  out.pieces.push_back(std::move(s.kept));
  if (s.rest.measure() > 0.0 || phi(s.rest) > 0.0)
    partition_recurse(s.rest, phi, n - 1, root, out);
}

}  // namespace

Partition partition_subtree(const Subtree& t, const SubtreeFn& phi, int n,
                            const GraphPoint& root) {
  if (n < 1) throw ConfigError("partition: n must be at least 1");
  Partition out;
  out.target_n = n;
  out.phi_total = phi(t);
  out.certificate = out.phi_total / double(n + 1);
  partition_recurse(t, phi, n, root, out);
  for (const PuncturedSubtree& p : out.pieces) {
    out.piece_phi.push_back(phi(p.piece));
    out.piece_phi_tilde.push_back(phi_tilde(phi, p.piece, p.puncture));
  }
  return out;
}

Partition partition_n(const RootedTree& t, const SubtreeFn& phi, int n) {
  return partition_subtree(Subtree::whole(t.graph()), phi, n, t.root());
}

// ---------------------------------------------------------------------------
// Randomized superadditivity audit

SuperadditivityReport check_superadditive(const SubtreeFn& phi, const MetricGraph& tree,
                                          int trials, std::uint64_t seed) {
  SuperadditivityReport rep;
  rep.trials = trials;
  rep.worst_partition_margin = std::numeric_limits<double>::infinity();
  rep.worst_monotonicity_margin = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(Rng::derive(seed, trial));
    Subtree s = random_subtree(rng, tree);
    std::vector<Subtree> parts = random_subtree_partition(rng, s, rng.uniform_int(1, 3));
    const double total = phi(s);
    const double scale = total > 0.0 ? total : 1.0;
    double sum = 0.0;
    double worst_piece = std::numeric_limits<double>::infinity();
    for (const Subtree& p : parts) {
      const double v = phi(p);
      sum += v;
      worst_piece = std::min(worst_piece, (total - v) / scale);
    }
    rep.worst_partition_margin = std::min(rep.worst_partition_margin, (total - sum) / scale);
    rep.worst_monotonicity_margin = std::min(rep.worst_monotonicity_margin, worst_piece);
  }
  if (trials == 0) {
    rep.worst_partition_margin = 0.0;
    rep.worst_monotonicity_margin = 0.0;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Step-approximation bound

ApproxReport approx_bound_check(const MetricGraph& g, const Weight& v, int n, int trials,
                                std::uint64_t seed) {
  if (v.min_value() < 0.0) throw ConfigError("approx_bound_check requires V >= 0");
  CutReport cut = cut_cycles(g);
  Weight tree_v = cut.pull_back(v);
  Subtree whole = Subtree::whole(cut.tree);
  GraphPoint tree_root = boundary_points(whole).front();
  Partition part =
      partition_subtree(whole, SubtreeFn::sqrt_measure_mass(tree_v), n, tree_root);

  std::vector<PuncturedSubtree> graph_pieces;
  for (const PuncturedSubtree& p : part.pieces)
    graph_pieces.push_back({cut.map_piece(p.piece), cut.to_graph(p.puncture)});

  const double h = g.total_length() / std::max(32, 6 * g.edge_count());
  Mesh mesh = build_mesh(g, v, GraphPoint::at_vertex(0), h);
  const double rhs_const = g.total_length() * v.integral() / double((n + 1) * (n + 1));

  ApproxReport rep;
  rep.trials = trials;
  rep.partition_k = part.achieved_k();
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(Rng::derive(seed, trial));
    std::vector<double> nodal(mesh.dof_count());
    for (double& x : nodal) x = rng.uniform(-1.0, 1.0);
    MeshFunction u(mesh, std::move(nodal));
    double lhs = 0.0;
    for (const PuncturedSubtree& p : graph_pieces)
      lhs += u.shifted_weighted_l2_sq(p.piece, v, u(p.puncture));
    const double rhs = rhs_const * u.derivative_norm_sq();
    if (rhs > 0.0) rep.max_ratio = std::max(rep.max_ratio, lhs / rhs);
    if (lhs > rhs * (1.0 + 1e-9)) ++rep.violations;
  }
  return rep;
}

// ---------------------------------------------------------------------------

double higher_order_constant(int l) {
  if (l < 1) throw ConfigError("higher_order_constant: l must be >= 1");
  double c;
  if (l <= 25) {
    double fact = 1.0;
    for (int k = 2; k < l; ++k) fact *= k;
    c = std::pow(double(l), 2 * l) / (fact * fact * (2 * l - 1));
  } else {
    const double logc =
        2.0 * l * std::log(double(l)) - 2.0 * std::lgamma(double(l)) - std::log(2.0 * l - 1.0);
    c = std::exp(logc);
  }
  if (!std::isfinite(c)) throw std::overflow_error("higher_order_constant: overflow for l=" + std::to_string(l));
  return c;
}

}  // namespace mspec
