#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "metric_spectra/common.hpp"
#include "metric_spectra/mesh.hpp"
#include "metric_spectra/random_instances.hpp"
#include "metric_spectra/tree_ops.hpp"

using namespace mspec;

namespace {

MetricGraph interval() { return MetricGraph::make({"a", "b"}, {{"e", "a", "b", 1.0}}); }

MetricGraph star3() {
  return MetricGraph::make({"c", "a", "b", "d"}, {{"ea", "c", "a", 1.0},
                                                  {"eb", "c", "b", 1.0},
                                                  {"ed", "c", "d", 1.0}});
}

}  // namespace

TEST_CASE("subtree: normalization, measure, contains, difference") {
  MetricGraph g = interval();
  Subtree t = Subtree::from_fragments(g, {{0, 0.0, 0.4}, {0, 0.4, 0.7}});
  CHECK(t.fragments().size() == 1);  // touching fragments merge
  CHECK(t.measure() == doctest::Approx(0.7));
  CHECK(t.contains(GraphPoint::on_edge(g, 0, 0.3)));
  CHECK(!t.contains(GraphPoint::on_edge(g, 0, 0.9)));
  CHECK_THROWS(Subtree::from_fragments(g, {{0, 0.0, 0.5}, {0, 0.4, 0.7}}));

  Subtree rest = Subtree::whole(g).difference(t);
  CHECK(rest.measure() == doctest::Approx(0.3));
  CHECK(rest.contains(GraphPoint::on_edge(g, 0, 0.7)));

  Subtree point = Subtree::single_point(g, GraphPoint::on_edge(g, 0, 0.25));
  CHECK(point.measure() == 0.0);
  CHECK(point.contains(GraphPoint::on_edge(g, 0, 0.25)));
}

TEST_CASE("canonical partition: interior point, star center, leaf") {
  MetricGraph seg = interval();
  Subtree whole = Subtree::whole(seg);
  auto mid = canonical_partition(whole, GraphPoint::on_edge(seg, 0, 0.5));
  REQUIRE(mid.size() == 2);
  CHECK(mid[0].measure() == doctest::Approx(0.5));
  CHECK(mid[1].measure() == doctest::Approx(0.5));

  MetricGraph st = star3();
  auto branches = canonical_partition(Subtree::whole(st),
                                      GraphPoint::at_vertex(st.vertex_index("c")));
  REQUIRE(branches.size() == 3);
  for (const Subtree& b : branches) CHECK(b.measure() == doctest::Approx(1.0));

  auto at_leaf = canonical_partition(whole, GraphPoint::at_vertex(seg.vertex_index("a")));
  REQUIRE(at_leaf.size() == 1);
  CHECK(at_leaf[0].measure() == doctest::Approx(1.0));
}

TEST_CASE("phi_tilde: interval midpoint, star center, one-point subtree") {
  MetricGraph seg = interval();
  Weight one = Weight::constant(seg, 1.0);
  SubtreeFn phi = SubtreeFn::sqrt_measure_mass(one);
  CHECK(phi_tilde(phi, Subtree::whole(seg), GraphPoint::on_edge(seg, 0, 0.5)) ==
        doctest::Approx(0.5));

  MetricGraph st = star3();
  Weight one3 = Weight::constant(st, 1.0);
  CHECK(phi_tilde(SubtreeFn::sqrt_measure_mass(one3), Subtree::whole(st),
                  GraphPoint::at_vertex(st.vertex_index("c"))) == doctest::Approx(1.0));

  Subtree pt = Subtree::single_point(seg, GraphPoint::on_edge(seg, 0, 0.25));
  CHECK(phi_tilde(phi, pt, GraphPoint::on_edge(seg, 0, 0.25)) == 0.0);
}

TEST_CASE("phi_tilde never exceeds phi") {
  Rng rng(31);
  RandomGraphOptions opt;
  for (int t = 0; t < 25; ++t) {
    MetricGraph g = random_tree(rng, opt);
    RandomWeightOptions wopt;
    wopt.nonnegative = true;
    Weight v = random_weight(rng, g, wopt);
    SubtreeFn phi = SubtreeFn::sqrt_measure_mass(v);
    Subtree s = random_subtree(rng, g);
    // pick a point inside
    const Fragment& f = s.fragments()[rng.uniform_int(0, int(s.fragments().size()) - 1)];
    GraphPoint x = GraphPoint::on_edge(g, f.edge, 0.5 * (f.a + f.b));
    CHECK(phi_tilde(phi, s, x) <= phi(s) * (1.0 + 1e-12) + 1e-15);
  }
}

TEST_CASE("split_once on the interval: closed form F(x) = 1 - x") {
  MetricGraph seg = interval();
  Weight one = Weight::constant(seg, 1.0);
  RootedTree tree = RootedTree::make(seg, one, GraphPoint::at_vertex(seg.vertex_index("a")));
  SubtreeFn phi = SubtreeFn::sqrt_measure_mass(one);
  SplitResult s = split_once(tree, phi, 0.5);
  REQUIRE(!s.kept.puncture.is_vertex());
  CHECK(s.kept.puncture.offset() == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(s.kept.piece.measure() == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(s.rest.measure() == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(phi(s.rest) <= 1.0 - 0.5 + 1e-9);
  CHECK(phi_tilde(phi, s.kept.piece, s.kept.puncture) <= 0.5 + 1e-9);
  // F trace is non-increasing
  for (std::size_t i = 1; i < s.f_trace.size(); ++i)
    CHECK(s.f_trace[i] <= s.f_trace[i - 1] + 1e-12);
}

TEST_CASE("split_once on the 3-star rooted at a leaf stops at the center") {
  MetricGraph st = star3();
  Weight one = Weight::constant(st, 1.0);
  RootedTree tree = RootedTree::make(st, one, GraphPoint::at_vertex(st.vertex_index("a")));
  SubtreeFn phi = SubtreeFn::sqrt_measure_mass(one);
  SplitResult s = split_once(tree, phi, 1.5);
  REQUIRE(s.kept.puncture.is_vertex());
  CHECK(st.vertex_id(s.kept.puncture.vertex()) == "c");
  CHECK(phi_tilde(phi, s.kept.piece, s.kept.puncture) == doctest::Approx(1.0));
  CHECK(phi(s.kept.piece) == doctest::Approx(2.0));  // F(center)
  CHECK(phi(s.rest) == doctest::Approx(1.0));
  CHECK(phi(s.rest) <= 3.0 - 1.5 + 1e-9);
}

TEST_CASE("split_once certificates hold on random trees") {
  Rng rng(5);
  RandomGraphOptions opt;
  for (int t = 0; t < 100; ++t) {
    MetricGraph g = random_tree(rng, opt);
    RandomWeightOptions wopt;
    wopt.nonnegative = true;
    wopt.zero_chance = 0.0;
    Weight v = random_weight(rng, g, wopt);
    SubtreeFn phi = SubtreeFn::sqrt_measure_mass(v);
    RootedTree tree =
        RootedTree::make(g, v, GraphPoint::at_vertex(rng.uniform_int(0, g.vertex_count() - 1)));
    const double total = phi(Subtree::whole(tree.graph()));
    if (total <= 0.0) continue;
    const double eps = total * rng.uniform(0.05, 0.95);
    SplitResult s = split_once(tree, phi, eps);
    const double slack = 1e-9 * total;
    CHECK(phi(s.rest) <= total - eps + slack);
    CHECK(phi_tilde(phi, s.kept.piece, s.kept.puncture) <= eps + slack);
    CHECK(s.kept.piece.contains(s.kept.puncture));
    CHECK(s.rest.contains(s.kept.puncture));
    // coverage
    CHECK(s.kept.piece.measure() + s.rest.measure() ==
          doctest::Approx(tree.graph().total_length()).epsilon(1e-12));
    for (std::size_t i = 1; i < s.f_trace.size(); ++i)
      CHECK(s.f_trace[i] <= s.f_trace[i - 1] + 1e-12 * total);
    CHECK_THROWS(split_once(tree, phi, total * 1.5));
  }
}

TEST_CASE("partition: interval n=1 punctures the midpoint") {
  MetricGraph seg = interval();
  Weight one = Weight::constant(seg, 1.0);
  RootedTree tree = RootedTree::make(seg, one, GraphPoint::at_vertex(seg.vertex_index("a")));
  Partition p = partition_n(tree, SubtreeFn::sqrt_measure_mass(one), 1);
  REQUIRE(p.achieved_k() == 1);
  CHECK(p.pieces[0].piece.measure() == doctest::Approx(1.0));
  CHECK(p.pieces[0].puncture.offset() == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(p.max_phi_tilde() == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("partition: 3-star n=1 punctures the center") {
  MetricGraph st = star3();
  Weight one = Weight::constant(st, 1.0);
  RootedTree tree = RootedTree::make(st, one, GraphPoint::at_vertex(st.vertex_index("a")));
  Partition p = partition_n(tree, SubtreeFn::sqrt_measure_mass(one), 1);
  REQUIRE(p.achieved_k() == 1);
  REQUIRE(p.pieces[0].puncture.is_vertex());
  CHECK(st.vertex_id(p.pieces[0].puncture.vertex()) == "c");
  CHECK(p.max_phi_tilde() == doctest::Approx(1.0));
  CHECK(p.max_phi_tilde() <= 3.0 / 2.0);
}

TEST_CASE("partition: zero functional gives the trivial single piece") {
  MetricGraph st = star3();
  Weight zero = Weight::zero(st);
  RootedTree tree = RootedTree::make(st, zero, GraphPoint::at_vertex(st.vertex_index("a")));
  Partition p = partition_n(tree, SubtreeFn::mass(zero), 5);
  CHECK(p.achieved_k() == 1);
  CHECK(p.pieces[0].piece.measure() == doctest::Approx(3.0));
  CHECK(p.max_phi_tilde() == 0.0);
}

TEST_CASE("partition certificates over random trees and functionals") {
  Rng rng(77);
  RandomGraphOptions opt;
  for (int t = 0; t < 40; ++t) {
    MetricGraph g = random_tree(rng, opt);
    RandomWeightOptions wopt;
    wopt.nonnegative = true;
    Weight v = random_weight(rng, g, wopt);
    RootedTree tree =
        RootedTree::make(g, v, GraphPoint::at_vertex(rng.uniform_int(0, g.vertex_count() - 1)));
    std::vector<SubtreeFn> fns;
    fns.push_back(SubtreeFn::sqrt_measure_mass(v));
    fns.push_back(SubtreeFn::order_weighted(v, 2));
    fns.push_back(SubtreeFn::measure());
    for (const SubtreeFn& phi : fns) {
      for (int n = 1; n <= 10; n += 3) {
        Partition p = partition_n(tree, phi, n);
        CHECK(p.achieved_k() <= n);
        CHECK(p.max_phi_tilde() <= p.certificate + 1e-9 * p.phi_total);
        double covered = 0.0;
        for (const auto& piece : p.pieces) {
          covered += piece.piece.measure();
          CHECK(piece.piece.contains(piece.puncture));
          CHECK(piece.piece.connected());
        }
        CHECK(covered == doctest::Approx(g.total_length()).epsilon(1e-12));
        for (std::size_t i = 0; i < p.pieces.size(); ++i)
          for (std::size_t j = i + 1; j < p.pieces.size(); ++j)
            CHECK(p.pieces[i].piece.overlap_measure(p.pieces[j].piece) <=
                  1e-12 * g.total_length());
      }
    }
  }
}

TEST_CASE("superadditivity: measure is exactly additive, blends stay superadditive") {
  Rng rng(13);
  RandomGraphOptions opt;
  MetricGraph g = random_tree(rng, opt);
  RandomWeightOptions wopt;
  wopt.nonnegative = true;
  Weight v = random_weight(rng, g, wopt);

  SuperadditivityReport m = check_superadditive(SubtreeFn::measure(), g, 60, 2024);
  CHECK(m.worst_partition_margin == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(m.ok());

  CHECK(check_superadditive(SubtreeFn::sqrt_measure_mass(v), g, 60, 2025).ok());
  CHECK(check_superadditive(
            SubtreeFn::holder(SubtreeFn::measure(), 0.5, SubtreeFn::mass(v), 0.5), g, 60, 2026)
            .ok());
  CHECK(check_superadditive(SubtreeFn::order_weighted(v, 3), g, 60, 2027).ok());
}

TEST_CASE("functional continuity under shrinking perturbations") {
  MetricGraph seg = interval();
  Weight one = Weight::constant(seg, 1.0);
  SubtreeFn phi = SubtreeFn::sqrt_measure_mass(one);
  Subtree base = Subtree::from_fragments(seg, {{0, 0.0, 0.6}});
  double prev_gap = 1e9;
  for (double delta : {1e-2, 1e-4, 1e-6}) {
    Subtree bigger = Subtree::from_fragments(seg, {{0, 0.0, 0.6 + delta}});
    const double gap = std::abs(phi(bigger) - phi(base));
    CHECK(gap < prev_gap + 1e-15);
    prev_gap = gap;
  }
  CHECK(prev_gap < 1e-5);
}

TEST_CASE("holder blend equals the built-in sqrt blend") {
  Rng rng(3);
  RandomGraphOptions opt;
  MetricGraph g = random_tree(rng, opt);
  RandomWeightOptions wopt;
  wopt.nonnegative = true;
  Weight v = random_weight(rng, g, wopt);
  SubtreeFn a = SubtreeFn::sqrt_measure_mass(v);
  SubtreeFn b = SubtreeFn::holder(SubtreeFn::measure(), 0.5, SubtreeFn::mass(v), 0.5);
  for (int t = 0; t < 20; ++t) {
    Subtree s = random_subtree(rng, g);
    CHECK(a(s) == doctest::Approx(b(s)).epsilon(1e-12));
  }
}

TEST_CASE("cut_cycles: tree input is untouched") {
  MetricGraph st = star3();
  CutReport cut = cut_cycles(st);
  CHECK(cut.cut_count == 0);
  CHECK(cut.identified.empty());
  CHECK(cut.tree.total_length() == st.total_length());
  // identity mapping
  GraphPoint p = GraphPoint::on_edge(cut.tree, 0, 0.3);
  GraphPoint q = cut.to_graph(p);
  CHECK(q.edge() == 0);
  CHECK(q.offset() == 0.3);
}

TEST_CASE("cut_cycles: two parallel edges produce one identified pair") {
  MetricGraph cyc = MetricGraph::make({"u", "v"},
                                      {{"e1", "u", "v", 1.0}, {"e2", "u", "v", 1.0}});
  CutReport cut = cut_cycles(cyc);
  CHECK(cut.cut_count == 1);
  REQUIRE(cut.identified.size() == 1);
  CHECK(cut.tree.total_length() == doctest::Approx(2.0));
  CHECK(validate(cut.tree).empty());
  CHECK(cut.tree.edge_count() == cut.tree.vertex_count() - 1);
  auto [a, b] = cut.identified[0];
  CHECK(cut.to_graph(GraphPoint::at_vertex(a)) == cut.to_graph(GraphPoint::at_vertex(b)));
  // the identified image is the midpoint of the smallest-id cycle edge
  GraphPoint img = cut.to_graph(GraphPoint::at_vertex(a));
  CHECK(cyc.edge(img.edge()).id == "e1");
  CHECK(img.offset() == doctest::Approx(0.5));
}

TEST_CASE("cut_cycles: triangle has cycle rank one") {
  MetricGraph tri = MetricGraph::make({"a", "b", "c"},
                                      {{"e1", "a", "b", 1.0},
                                       {"e2", "b", "c", 1.0},
                                       {"e3", "c", "a", 1.0}});
  CutReport cut = cut_cycles(tri);
  CHECK(cut.cut_count == 3 - 3 + 1);
  CHECK(cut.tree.total_length() == doctest::Approx(3.0));
  CHECK(validate(cut.tree).empty());
  CHECK(cut.tree.edge_count() == cut.tree.vertex_count() - 1);
}

TEST_CASE("cut_cycles: pullback weight preserves integrals") {
  Rng rng(8);
  RandomGraphOptions opt;
  opt.extra_cycle_edges = 3;
  for (int t = 0; t < 15; ++t) {
    MetricGraph g = random_connected_graph(rng, opt);
    RandomWeightOptions wopt;
    Weight v = random_weight(rng, g, wopt);
    CutReport cut = cut_cycles(g);
    CHECK(cut.cut_count == g.edge_count() - g.vertex_count() + 1);
    CHECK(cut.tree.total_length() ==
          doctest::Approx(g.total_length()).epsilon(1e-14));  // up to sum order
    Weight tv = cut.pull_back(v);
    CHECK(tv.integral() == doctest::Approx(v.integral()).epsilon(1e-13));
    CHECK(tv.integral_abs() == doctest::Approx(v.integral_abs()).epsilon(1e-13));
    for (const auto& [va, vb] : cut.identified)
      CHECK(cut.to_graph(GraphPoint::at_vertex(va)) == cut.to_graph(GraphPoint::at_vertex(vb)));
    // mapped pieces of the whole tree cover the graph
    Subtree whole_image = cut.map_piece(Subtree::whole(cut.tree));
    CHECK(whole_image.measure() == doctest::Approx(g.total_length()).epsilon(1e-12));
  }
}

TEST_CASE("rooted tree: orientation and partial order") {
  MetricGraph st = star3();
  Weight one = Weight::constant(st, 1.0);
  RootedTree tree = RootedTree::make(st, one, GraphPoint::at_vertex(st.vertex_index("a")));
  CHECK(tree.graph().edge_count() == tree.graph().vertex_count() - 1);
  // every non-root vertex has a parent; edges point away from the root
  for (int v = 0; v < tree.graph().vertex_count(); ++v) {
    if (v == tree.root_vertex()) continue;
    CHECK(tree.parent(v) >= 0);
  }
  GraphPoint root = tree.root();
  GraphPoint center = GraphPoint::at_vertex(tree.graph().vertex_index("c"));
  GraphPoint leaf_b = GraphPoint::at_vertex(tree.graph().vertex_index("b"));
  CHECK(tree.precedes(root, leaf_b));
  CHECK(tree.precedes(center, leaf_b));
  CHECK(!tree.precedes(leaf_b, center));

  // interior root splits the edge
  MetricGraph seg = interval();
  RootedTree mid = RootedTree::make(seg, Weight::constant(seg, 1.0),
                                    GraphPoint::on_edge(seg, 0, 0.25));
  CHECK(mid.graph().vertex_count() == 3);
  CHECK(mid.graph().degree(mid.root_vertex()) == 2);
  CHECK(mid.graph().total_length() == doctest::Approx(1.0));

  MetricGraph cyc = MetricGraph::make({"u", "v"},
                                      {{"e1", "u", "v", 1.0}, {"e2", "u", "v", 1.0}});
  CHECK_THROWS(RootedTree::make(cyc, Weight::zero(cyc), GraphPoint::at_vertex(0)));
}

TEST_CASE("step projection: constants, identity function, idempotence") {
  MetricGraph seg = interval();
  Weight one = Weight::constant(seg, 1.0);
  Mesh mesh = build_mesh(seg, one, GraphPoint::at_vertex(0), 0.125);

  // u(x) = x as nodal values
  std::vector<double> nodal(mesh.dof_count());
  for (const Mesh::Element& el : mesh.elements()) {
    nodal[el.dof_a] = el.a;
    nodal[el.dof_b] = el.b;
  }
  MeshFunction u(mesh, nodal);

  std::vector<PuncturedSubtree> whole{{Subtree::whole(seg), GraphPoint::on_edge(seg, 0, 0.5)}};
  StepFunction pu = step_projection(whole, u);
  CHECK(pu.rank() == 1);
  CHECK(pu(GraphPoint::on_edge(seg, 0, 0.123)) == doctest::Approx(0.5));

  std::vector<PuncturedSubtree> halves{
      {Subtree::from_fragments(seg, {{0, 0.0, 0.5}}), GraphPoint::at_vertex(seg.vertex_index("a"))},
      {Subtree::from_fragments(seg, {{0, 0.5, 1.0}}), GraphPoint::on_edge(seg, 0, 0.5)}};
  StepFunction ph = step_projection(halves, u);
  CHECK(ph(GraphPoint::on_edge(seg, 0, 0.2)) == doctest::Approx(0.0));
  CHECK(ph(GraphPoint::on_edge(seg, 0, 0.8)) == doctest::Approx(0.5));

  // constants reproduce and the projection is idempotent on its output
  MeshFunction c(mesh, std::vector<double>(mesh.dof_count(), 3.25));
  StepFunction pc = step_projection(halves, c);
  CHECK(pc(GraphPoint::on_edge(seg, 0, 0.7)) == doctest::Approx(3.25));
  StepFunction pph = step_projection(halves, ph);
  for (double x : {0.1, 0.3, 0.6, 0.9})
    CHECK(pph(GraphPoint::on_edge(seg, 0, x)) == ph(GraphPoint::on_edge(seg, 0, x)));
}

TEST_CASE("approximation bound: interval example 1/12 <= 1/4") {
  MetricGraph seg = interval();
  Weight one = Weight::constant(seg, 1.0);
  RootedTree tree = RootedTree::make(seg, one, GraphPoint::at_vertex(seg.vertex_index("a")));
  Partition p = partition_n(tree, SubtreeFn::sqrt_measure_mass(one), 1);
  Mesh mesh = build_mesh(seg, one, GraphPoint::at_vertex(0), 0.125);
  std::vector<double> nodal(mesh.dof_count());
  for (const Mesh::Element& el : mesh.elements()) {
    nodal[el.dof_a] = el.a;
    nodal[el.dof_b] = el.b;
  }
  MeshFunction u(mesh, nodal);
  double lhs = 0.0;
  for (const PuncturedSubtree& piece : p.pieces)
    lhs += u.shifted_weighted_l2_sq(piece.piece, one, u(piece.puncture));
  CHECK(lhs == doctest::Approx(1.0 / 12.0).epsilon(1e-9));
  const double rhs = 1.0 * 1.0 / 4.0 * u.derivative_norm_sq();
  CHECK(lhs <= rhs);
}

TEST_CASE("approximation bound: randomized suite has no violations") {
  Rng rng(9);
  RandomGraphOptions opt;
  opt.extra_cycle_edges = 2;
  for (int t = 0; t < 10; ++t) {
    MetricGraph g = t % 2 ? random_connected_graph(rng, opt) : random_tree(rng, opt);
    RandomWeightOptions wopt;
    wopt.nonnegative = true;
    Weight v = random_weight(rng, g, wopt);
    for (int n : {1, 3}) {
      ApproxReport rep = approx_bound_check(g, v, n, 10, 1000 + t);
      CHECK(rep.violations == 0);
      CHECK(rep.partition_k <= n);
    }
  }
}

TEST_CASE("higher-order constant") {
  CHECK(higher_order_constant(1) == doctest::Approx(1.0));
  CHECK(higher_order_constant(2) == doctest::Approx(16.0 / 3.0).epsilon(1e-12));
  CHECK(higher_order_constant(3) == doctest::Approx(729.0 / 20.0).epsilon(1e-12));
  CHECK_THROWS_AS(higher_order_constant(400), std::overflow_error);
  CHECK_THROWS(higher_order_constant(0));
}
