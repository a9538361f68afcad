#include "metric_spectra/suites.hpp"

#include <algorithm>
#include <cmath>

#include "metric_spectra/common.hpp"
#include "metric_spectra/graph_io.hpp"
#include "metric_spectra/random_instances.hpp"
#include "metric_spectra/spectral.hpp"
#include "metric_spectra/tree_ops.hpp"

namespace mspec {

using nlohmann::json;

json SuiteResult::to_json() const {
  json j;
  j["suite"] = name;
  j["trials"] = trials;
  j["seed"] = seed;
  j["violations"] = violations;
  j["worst_margin"] = worst_margin;
  j["ok"] = ok();
  j["detail"] = detail;
  j["failures"] = failures;
  return j;
}

namespace {

struct TrialOutcome {
  double margin = std::numeric_limits<double>::infinity();
  int violations = 0;
  json failure;  // null unless violations > 0
};

// Trials run in parallel; outcomes land in trial order.
template <typename Fn>
SuiteResult run_trials(const std::string& name, int trials, std::uint64_t seed, Fn&& trial_fn) {
  SuiteResult out;
  out.name = name;
  out.trials = trials;
  out.seed = seed;
  std::vector<TrialOutcome> results(trials);
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < trials; ++t) results[t] = trial_fn(t, Rng::derive(seed, t));
  out.worst_margin = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    out.violations += results[t].violations;
    out.worst_margin = std::min(out.worst_margin, results[t].margin);
    if (results[t].violations > 0 && !results[t].failure.is_null() && out.failures.size() < 16)
      out.failures.push_back(results[t].failure);
  }
  if (trials == 0) out.worst_margin = 0.0;
  return out;
}

json instance_json(const MetricGraph& g, const Weight& v, const GraphPoint& root,
                   const std::string& command, const json& params) {
  json j = json::parse(emit_graph(g, v, root));
  j["replay"] = {{"command", command}, {"params", params}};
  return j;
}

MetricGraph trial_graph(Rng& rng, bool cyclic) {
  RandomGraphOptions opt;
  opt.min_edges = 2;
  opt.max_edges = 15;
  opt.extra_cycle_edges = cyclic ? 3 : 0;
  return cyclic ? random_connected_graph(rng, opt) : random_tree(rng, opt);
}

double solver_h(const MetricGraph& g, int target_dofs) {
  return g.total_length() / double(target_dofs);
}

}  // namespace

SuiteResult bounds_suite(int tree_trials, int cyclic_trials, int n_max, std::uint64_t seed) {
  const int total = tree_trials + cyclic_trials;
  SuiteResult out = run_trials("bounds", total, seed, [&](int t, std::uint64_t s) {
    Rng rng(s);
    const bool cyclic = t >= tree_trials;
    MetricGraph g = trial_graph(rng, cyclic);
    RandomWeightOptions wopt;
    Weight v = random_weight(rng, g, wopt);
    GraphPoint root = random_point(rng, g);
    SolveOptions sopt;
    sopt.vectors_per_sign = n_max;
    TrialOutcome o;
    Spectrum sp = solve_graph(g, v, root, solver_h(g, 220), sopt);
    BoundReport rep = bound_check(sp, g, v, n_max);
    o.margin = std::min(rep.worst_margin, rep.form_bound_margin);
    o.violations = rep.violations;
    if (o.violations)
      o.failure = instance_json(g, v, root, "bounds", {{"n_max", n_max}, {"trial", t}});
    return o;
  });
  out.detail["tree_trials"] = tree_trials;
  out.detail["cyclic_trials"] = cyclic_trials;
  out.detail["n_max"] = n_max;
  return out;
}

SuiteResult partition_suite(int tree_trials, int n_range, std::uint64_t seed) {
  SuiteResult out = run_trials("partition", tree_trials, seed, [&](int t, std::uint64_t s) {
    Rng rng(s);
    RandomGraphOptions gopt;
    MetricGraph g = random_tree(rng, gopt);
    RandomWeightOptions wopt;
    wopt.nonnegative = true;
    Weight v = random_weight(rng, g, wopt);
    const int root_vertex = rng.uniform_int(0, g.vertex_count() - 1);
    RootedTree tree = RootedTree::make(g, v, GraphPoint::at_vertex(root_vertex));

    std::vector<SubtreeFn> fns;
    fns.push_back(SubtreeFn::sqrt_measure_mass(v));
    fns.push_back(SubtreeFn::order_weighted(v, 2));
    fns.push_back(SubtreeFn::measure());

    TrialOutcome o;
    const double total_len = g.total_length();
    for (const SubtreeFn& phi : fns) {
      for (int n = 1; n <= n_range; ++n) {
        Partition part = partition_n(tree, phi, n);
        const double cert = part.certificate + 1e-9 * part.phi_total;
        const double scale = part.phi_total > 0.0 ? part.phi_total : 1.0;
        // certificate margin
        o.margin = std::min(o.margin, (cert - part.max_phi_tilde()) / scale);
        bool bad = part.achieved_k() > n || part.max_phi_tilde() > cert;
        // coverage and overlap
        double covered = 0.0;
        for (const PuncturedSubtree& p : part.pieces) covered += p.piece.measure();
        if (std::abs(covered - total_len) > 1e-12 * std::max(total_len, 1.0)) bad = true;
        for (std::size_t i = 0; i < part.pieces.size() && !bad; ++i)
          for (std::size_t j = i + 1; j < part.pieces.size(); ++j)
            if (part.pieces[i].piece.overlap_measure(part.pieces[j].piece) >
                1e-12 * std::max(total_len, 1.0)) {
              bad = true;
              break;
            }
        // punctures must lie in their pieces
        for (const PuncturedSubtree& p : part.pieces)
          if (!p.piece.contains(p.puncture)) bad = true;
        if (bad) {
          ++o.violations;
          if (o.failure.is_null())
            o.failure = instance_json(g, v, tree.root(), "partition",
                                      {{"n", n}, {"phi", phi.name()}, {"trial", t}});
        }
      }
    }
    return o;
  });
  out.detail["n_range"] = n_range;
  return out;
}

SuiteResult approx_suite(int graph_trials, int n_range, int fn_trials, std::uint64_t seed) {
  SuiteResult out = run_trials("approx", graph_trials, seed, [&](int t, std::uint64_t s) {
    Rng rng(s);
    const bool cyclic = (t % 4) == 3;  // a quarter of the instances carry cycles
    MetricGraph g = trial_graph(rng, cyclic);
    RandomWeightOptions wopt;
    wopt.nonnegative = true;
    Weight v = random_weight(rng, g, wopt);
    TrialOutcome o;
    o.margin = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= n_range; ++n) {
      ApproxReport rep = approx_bound_check(g, v, n, fn_trials, Rng::derive(s, n));
      o.violations += rep.violations;
      o.margin = std::min(o.margin, 1.0 - rep.max_ratio);
      if (rep.violations && o.failure.is_null())
        o.failure = instance_json(g, v, GraphPoint::at_vertex(0), "approx",
                                  {{"n", n}, {"trials", fn_trials}, {"trial", t}});
    }
    return o;
  });
  out.detail["n_range"] = n_range;
  out.detail["fn_trials"] = fn_trials;
  return out;
}

SuiteResult superadditivity_suite(int trials, std::uint64_t seed) {
  // trials are split over random trees; each check draws many partitions
  const int outer = std::max(1, trials / 20);
  SuiteResult out = run_trials("superadditivity", outer, seed, [&](int t, std::uint64_t s) {
    Rng rng(s);
    RandomGraphOptions gopt;
    MetricGraph g = random_tree(rng, gopt);
    RandomWeightOptions wopt;
    wopt.nonnegative = true;
    Weight v = random_weight(rng, g, wopt);

    std::vector<SubtreeFn> fns;
    fns.push_back(SubtreeFn::measure());
    fns.push_back(SubtreeFn::mass(v));
    fns.push_back(SubtreeFn::sqrt_measure_mass(v));
    fns.push_back(SubtreeFn::holder(SubtreeFn::measure(), 0.5, SubtreeFn::mass(v), 0.5));
    fns.push_back(SubtreeFn::order_weighted(v, 2));

    TrialOutcome o;
    int k = 0;
    for (const SubtreeFn& phi : fns) {
      SuperadditivityReport rep = check_superadditive(phi, g, 20 / int(fns.size()) + 2,
                                                      Rng::derive(s, 100 + k++));
      o.margin = std::min({o.margin, rep.worst_partition_margin, rep.worst_monotonicity_margin});
      if (!rep.ok()) {
        ++o.violations;
        if (o.failure.is_null())
          o.failure = instance_json(g, v, GraphPoint::at_vertex(0), "super",
                                    {{"phi", phi.name()}, {"trial", t}});
      }
    }
    return o;
  });
  out.detail["requested_trials"] = trials;
  return out;
}

SuiteResult snumbers_suite(int trials, std::uint64_t seed) {
  return run_trials("snumbers", trials, seed, [&](int t, std::uint64_t s) {
    Rng rng(s);
    MetricGraph g = trial_graph(rng, t % 3 == 2);
    RandomWeightOptions wopt;
    wopt.max_pieces = 3;
    wopt.amplitude = 2.0;
    Weight a = random_weight(rng, g, wopt);  // signed amplitude
    GraphPoint root = random_point(rng, g);
    SNumberReport rep = snumbers_halfinv(g, a, root, solver_h(g, 200));
    TrialOutcome o;
    o.margin = rep.worst_margin;
    o.violations = rep.violations;
    if (o.violations)
      o.failure = instance_json(g, a, root, "snumbers", {{"trial", t}});
    return o;
  });
}

SuiteResult cycles_suite(int trials, std::uint64_t seed) {
  return run_trials("cycles", trials, seed, [&](int t, std::uint64_t s) {
    Rng rng(s);
    MetricGraph g = trial_graph(rng, true);
    RandomWeightOptions wopt;
    Weight v = random_weight(rng, g, wopt);
    TrialOutcome o;
    CutReport cut = cut_cycles(g);

    const double len_gap = std::abs(cut.tree.total_length() - g.total_length());
    const int rank = g.edge_count() - g.vertex_count() + 1;
    bool bad = len_gap > 1e-14 * g.total_length() || cut.cut_count != rank;
    // identified pairs map to one graph point
    for (const auto& [v1, v2] : cut.identified)
      if (!(cut.to_graph(GraphPoint::at_vertex(v1)) == cut.to_graph(GraphPoint::at_vertex(v2))))
        bad = true;

    // pullback integral identity for a random piecewise-linear u
    Mesh mesh = build_mesh(g, v, GraphPoint::at_vertex(0), g.total_length() / 64.0);
    std::vector<double> nodal(mesh.dof_count());
    for (double& x : nodal) x = rng.uniform(-1.0, 1.0);
    MeshFunction u(mesh, std::move(nodal));
    const double graph_side = u.weighted_l2_sq(v);
    double tree_side = 0.0;
    for (int e = 0; e < cut.tree.edge_count(); ++e) {
      const auto& tr = cut.traces()[e];
      const double len = cut.tree.edge(e).length;
      const double lo = tr.dir > 0 ? tr.start : tr.start - len;
      tree_side += u.shifted_weighted_l2_sq(tr.orig_edge, lo, lo + len, v, 0.0);
    }
    const double scale = std::max(std::abs(graph_side), 1.0);
    const double gap = std::abs(graph_side - tree_side) / scale;
    o.margin = -gap;
    if (gap > 1e-12) bad = true;
    if (bad) {
      o.violations = 1;
      o.failure = instance_json(g, v, GraphPoint::at_vertex(0), "cycles", {{"trial", t}});
    }
    return o;
  });
}

SuiteResult scaling_suite(int trials, std::uint64_t seed) {
  SuiteResult out = run_trials("scaling", trials, seed, [&](int t, std::uint64_t s) {
    Rng rng(s);
    MetricGraph g = trial_graph(rng, t % 3 == 0);
    RandomWeightOptions wopt;
    Weight v = random_weight(rng, g, wopt);
    GraphPoint root = GraphPoint::at_vertex(rng.uniform_int(0, g.vertex_count() - 1));
    const double h = solver_h(g, 150);
    TrialOutcome o;

    Mesh mesh = build_mesh(g, v, root, h);
    Spectrum base = solve_generalized(assemble(mesh, v, {root}), {});

    // length scaling by c (mesh transported): every eigenvalue scales by c^2
    const double c = (t % 2 == 0) ? 2.0 : 3.0;
    std::vector<std::string> vids;
    for (int i = 0; i < g.vertex_count(); ++i) vids.push_back(g.vertex_id(i));
    std::vector<EdgeRecord> recs;
    for (int e = 0; e < g.edge_count(); ++e)
      recs.push_back({g.edge(e).id, g.vertex_id(g.edge(e).from), g.vertex_id(g.edge(e).to),
                      g.edge(e).length * c});
    MetricGraph gs = MetricGraph::make(std::move(vids), std::move(recs));
    Weight vs = Weight::zero(gs);
    for (int e = 0; e < g.edge_count(); ++e) {
      if (!v.has_profile(e)) continue;
      std::vector<double> bp = v.breakpoints(e);
      for (double& x : bp) x *= c;
      bp.back() = gs.edge(gs.edge_index(g.edge(e).id)).length;
      vs.set_profile(gs.edge_index(g.edge(e).id), std::move(bp), v.values(e));
    }
    Mesh smesh = mesh.scaled_copy(gs, c);
    Spectrum scaled = solve_generalized(assemble(smesh, vs, {root}), {});

    // weight scaling by cw: every eigenvalue scales by cw
    const double cw = 5.0;
    Spectrum wscaled = solve_generalized(assemble(mesh, v.scaled(cw), {root}), {});

    auto compare = [&](const std::vector<double>& a, const std::vector<double>& b, double factor) {
      const int n = std::min({int(a.size()), int(b.size()), 8});
      for (int k = 0; k < n; ++k) {
        if (a[k] < 1e-4 * a[0]) break;  // skip the badly-conditioned tail
        const double rel = std::abs(b[k] - factor * a[k]) / (factor * a[k]);
        o.margin = std::min(o.margin, 1e-10 - rel);
        if (rel > 1e-10) ++o.violations;
      }
    };
    compare(base.lambda_plus, scaled.lambda_plus, c * c);
    compare(base.lambda_minus, scaled.lambda_minus, c * c);
    compare(base.lambda_plus, wscaled.lambda_plus, cw);
    compare(base.lambda_minus, wscaled.lambda_minus, cw);

    // V == 1 lower bound |G|^2 mu_n >= n^2
    LaplaceReport lap = laplacian_spectrum(g, root, h);
    o.violations += lap.violations;
    o.margin = std::min(o.margin, lap.worst_margin);

    if (o.violations)
      o.failure = instance_json(g, v, root, "scaling", {{"trial", t}, {"c", c}});
    return o;
  });
  return out;
}

SuiteResult run_suite(const std::string& name, int trials, std::uint64_t seed) {
  if (name == "bounds") {
    const int cyclic = std::max(1, trials / 5);
    return bounds_suite(trials - cyclic, cyclic, 20, seed);
  }
  if (name == "partition") return partition_suite(trials, 10, seed);
  if (name == "approx") return approx_suite(trials, 8, 20, seed);
  if (name == "super") return superadditivity_suite(trials, seed);
  if (name == "snumbers") return snumbers_suite(trials, seed);
  if (name == "cycles") return cycles_suite(trials, seed);
  if (name == "scaling") return scaling_suite(trials, seed);
  throw ConfigError("unknown suite: " + name +
                    " (expected bounds|partition|approx|super|snumbers|cycles|scaling)");
}

}  // namespace mspec
