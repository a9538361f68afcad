#include "metric_spectra/random_instances.hpp"

#include <algorithm>
#include <cstdio>

namespace mspec {

namespace {
std::string padded(const char* prefix, int k) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%s%03d", prefix, k);
  return buf;
}
}  // namespace

MetricGraph random_tree(Rng& rng, const RandomGraphOptions& opt) {
  const int ne = rng.uniform_int(opt.min_edges, opt.max_edges);
  std::vector<std::string> vids{padded("v", 0)};
  std::vector<EdgeRecord> edges;
  for (int k = 0; k < ne; ++k) {
    const int attach = rng.uniform_int(0, k);  // existing vertex index
    vids.push_back(padded("v", k + 1));
    edges.push_back({padded("e", k), vids[attach], vids.back(),
                     rng.uniform(opt.length_lo, opt.length_hi)});
  }
  return MetricGraph::make(std::move(vids), std::move(edges));
}

MetricGraph random_connected_graph(Rng& rng, const RandomGraphOptions& opt) {
  MetricGraph tree = random_tree(rng, opt);
  if (opt.extra_cycle_edges <= 0) return tree;
  std::vector<std::string> vids;
  for (int v = 0; v < tree.vertex_count(); ++v) vids.push_back(tree.vertex_id(v));
  std::vector<EdgeRecord> edges;
  for (int e = 0; e < tree.edge_count(); ++e) {
    const Edge& ed = tree.edge(e);
    edges.push_back({ed.id, tree.vertex_id(ed.from), tree.vertex_id(ed.to), ed.length});
  }
  const int extra = rng.uniform_int(1, opt.extra_cycle_edges);
  for (int k = 0; k < extra; ++k) {
    int u = rng.uniform_int(0, tree.vertex_count() - 1);
    int w = rng.uniform_int(0, tree.vertex_count() - 1);
    if (u == w) w = (w + 1) % tree.vertex_count();  // no loops
    edges.push_back({padded("x", k), tree.vertex_id(u), tree.vertex_id(w),
                     rng.uniform(opt.length_lo, opt.length_hi)});
  }
  return MetricGraph::make(std::move(vids), std::move(edges));
}

Weight random_weight(Rng& rng, const MetricGraph& g, const RandomWeightOptions& opt) {
  Weight w = Weight::zero(g);
  for (int e = 0; e < g.edge_count(); ++e) {
    if (rng.uniform() < opt.zero_chance) continue;
    const double len = g.edge(e).length;
    const int pieces = rng.uniform_int(1, opt.max_pieces);
    std::vector<double> bp{0.0};
    for (int k = 1; k < pieces; ++k) bp.push_back(rng.uniform(0.05, 0.95) * len);
    bp.push_back(len);
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    std::vector<double> vv;
    for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
      double v = rng.uniform(-opt.amplitude, opt.amplitude);
      if (opt.nonnegative) v = std::abs(v);
      vv.push_back(v);
    }
    w.set_profile(e, std::move(bp), std::move(vv));
  }
  return w;
}

GraphPoint random_point(Rng& rng, const MetricGraph& g) {
  // uniform with respect to arclength
  double t = rng.uniform() * g.total_length();
  for (int e = 0; e < g.edge_count(); ++e) {
    const double len = g.edge(e).length;
    if (t <= len) return GraphPoint::on_edge(g, e, t);
    t -= len;
  }
  return GraphPoint::at_vertex(g.vertex_count() - 1);
}

Subtree random_subtree(Rng& rng, const MetricGraph& tree) {
  const int v0 = rng.uniform_int(0, tree.vertex_count() - 1);
  double budget = rng.uniform(0.1, 1.0) * tree.total_length();
  std::vector<Fragment> frags;
  std::vector<char> vseen(tree.vertex_count(), 0), eseen(tree.edge_count(), 0);
  std::vector<int> queue{v0};
  vseen[v0] = 1;
  bool first = true;
  while (!queue.empty()) {
    const int v = queue.back();
    queue.pop_back();
    for (int e : tree.incident(v)) {
      if (eseen[e]) continue;
      eseen[e] = 1;
      if (!first && (budget <= 0.0 || rng.uniform() < 0.25)) continue;
      first = false;
      const double len = tree.edge(e).length;
      double take = std::min(len, rng.uniform(0.2, 1.0) * len);
      if (take > budget) take = std::max(budget, 0.05 * len);
      take = std::min(take, len);
      budget -= take;
      const bool from_here = tree.edge(e).from == v;
      if (from_here)
        frags.push_back({e, 0.0, take});
      else
        frags.push_back({e, len - take, len});
      if (take == len) {
        const int w = from_here ? tree.edge(e).to : tree.edge(e).from;
        if (!vseen[w]) {
          vseen[w] = 1;
          queue.push_back(w);
        }
      }
    }
  }
  if (frags.empty()) {
    int e = tree.incident(v0)[0];
    frags.push_back({e, 0.0, 0.5 * tree.edge(e).length});
  }
  return Subtree::from_fragments(tree, std::move(frags));
}

std::vector<Subtree> random_subtree_partition(Rng& rng, const Subtree& s, int depth) {
  if (depth <= 0) return {s};
  // pick a random interior point of a positive-length fragment
  std::vector<int> pos;
  for (std::size_t i = 0; i < s.fragments().size(); ++i)
    if (s.fragments()[i].b > s.fragments()[i].a) pos.push_back(int(i));
  if (pos.empty()) return {s};
  const Fragment& f = s.fragments()[pos[rng.uniform_int(0, int(pos.size()) - 1)]];
  const double t = f.a + (f.b - f.a) * rng.uniform(0.1, 0.9);
  GraphPoint x = GraphPoint::on_edge(s.graph(), f.edge, t);
  std::vector<Subtree> branches = canonical_partition(s, x);
  if (branches.size() < 2) return {s};
  // random non-trivial regrouping into two sides
  std::uint64_t mask = 0;
  const std::uint64_t full = (std::uint64_t(1) << branches.size()) - 1;
  while (mask == 0 || mask == full) mask = rng.next_u64() & full;
  std::vector<Fragment> fa, fb;
  for (std::size_t j = 0; j < branches.size(); ++j) {
    auto& dst = (mask >> j & 1) ? fa : fb;
    for (const Fragment& fr : branches[j].fragments()) dst.push_back(fr);
  }
  Subtree sa = Subtree::from_fragments(s.graph(), std::move(fa));
  Subtree sb = Subtree::from_fragments(s.graph(), std::move(fb));
  std::vector<Subtree> out = random_subtree_partition(rng, sa, depth - 1);
  std::vector<Subtree> rest = random_subtree_partition(rng, sb, depth - 1);
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

}  // namespace mspec
