#include "metric_spectra/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "metric_spectra/common.hpp"
#include "metric_spectra/graph_io.hpp"

namespace mspec {

using linalg::Matrix;

AssembledForms assemble_forms(const Mesh& mesh, const Weight& v) {
  const int n = mesh.dof_count();
  AssembledForms f{Matrix(n, n), Matrix(n, n)};
  for (const Mesh::Element& el : mesh.elements()) {
    const double h = el.h();
    const double w = v.value_at(el.edge, 0.5 * (el.a + el.b));
    const int i = el.dof_a, j = el.dof_b;
    // stiffness 1/h [[1,-1],[-1,1]], mass w h/6 [[2,1],[1,2]]
    f.a(i, i) += 1.0 / h;
    f.a(j, j) += 1.0 / h;
    f.a(i, j) -= 1.0 / h;
    f.a(j, i) -= 1.0 / h;
    const double m = w * h / 6.0;
    f.b(i, i) += 2.0 * m;
    f.b(j, j) += 2.0 * m;
    f.b(i, j) += m;
    f.b(j, i) += m;
  }
  return f;
}

DiscreteProblem assemble(const Mesh& mesh, const Weight& v,
                         const std::vector<GraphPoint>& dirichlet) {
  AssembledForms f = assemble_forms(mesh, v);
  std::vector<char> fixed(mesh.dof_count(), 0);
  for (const GraphPoint& p : dirichlet) {
    const int d = mesh.dof_at(p);
    if (d < 0) throw ConfigError("assemble: Dirichlet point is not a mesh node");
    fixed[d] = 1;
  }
  DiscreteProblem out;
  out.mesh_dofs = mesh.dof_count();
  out.h = mesh.h_max();
  for (int d = 0; d < mesh.dof_count(); ++d)
    if (!fixed[d]) out.free_dofs.push_back(d);
  const int m = int(out.free_dofs.size());
  out.a = Matrix(m, m);
  out.b = Matrix(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      out.a(i, j) = f.a(out.free_dofs[i], out.free_dofs[j]);
      out.b(i, j) = f.b(out.free_dofs[i], out.free_dofs[j]);
    }
  return out;
}

Spectrum solve_generalized(const DiscreteProblem& p, const SolveOptions& opt) {
  const int n = p.a.rows();
  Spectrum out;
  out.dofs = n;
  out.h = p.h;
  if (n == 0) return out;

  Matrix l = p.a;
  linalg::cholesky_factor(l, opt.exec);
  Matrix c = linalg::congruence_inverse(l, p.b, opt.exec);
  linalg::Tridiagonal tri = linalg::householder_tridiagonalize(std::move(c), opt.exec);
  const std::vector<double> d = tri.diag, e = tri.sub;
  std::vector<double> values = linalg::tridiag_eigenvalues(d, e, nullptr, opt.exec);

  double max_abs = 0.0;
  for (double v : values) max_abs = std::max(max_abs, std::abs(v));
  const double floor = opt.zero_floor_rel * max_abs;

  // indices ascending; positives from the top, negatives from the bottom
  std::vector<int> plus_idx, minus_idx;
  for (int i = n - 1; i >= 0; --i)
    if (values[i] > floor) plus_idx.push_back(i);
  for (int i = 0; i < n; ++i)
    if (values[i] < -floor) minus_idx.push_back(i);
  for (int i : plus_idx) out.lambda_plus.push_back(values[i]);
  for (int i : minus_idx) out.lambda_minus.push_back(-values[i]);

  // residual verification for the leading pairs of each sign
  auto verify = [&](const std::vector<int>& idx) {
    std::vector<std::vector<double>> cluster;
    double prev_lambda = 0.0;
    const int count = std::min<int>(opt.vectors_per_sign, int(idx.size()));
    for (int k = 0; k < count; ++k) {
      const double lambda = values[idx[k]];
      if (k > 0 && std::abs(lambda - prev_lambda) > 1e-7 * (std::abs(lambda) + max_abs * 1e-8))
        cluster.clear();
      std::vector<double> w =
          linalg::tridiag_eigenvector(d, e, lambda, cluster, 0x5eed0000u + k);
      cluster.push_back(w);
      prev_lambda = lambda;
      linalg::apply_reflectors(tri.house, w);
      linalg::back_solve_transpose(l, w);  // u = L^{-T} w
      // residual ||B u - lambda A u|| / ||A u||
      std::vector<double> au = linalg::matvec(p.a, w);
      std::vector<double> bu = linalg::matvec(p.b, w);
      double rn = 0.0, an = 0.0;
      for (int i = 0; i < n; ++i) {
        const double r = bu[i] - lambda * au[i];
        rn += r * r;
        an += au[i] * au[i];
      }
      const double rel = std::sqrt(rn) / std::max(std::sqrt(an), 1e-300);
      out.max_residual = std::max(out.max_residual, rel);
      ++out.residual_checked;
    }
  };
  verify(plus_idx);
  verify(minus_idx);
  if (out.max_residual > opt.residual_tol)
    throw std::runtime_error("solve_generalized: eigenpair residual " +
                             format_double(out.max_residual) + " exceeds tolerance");
  return out;
}

Spectrum solve_graph(const MetricGraph& g, const Weight& v, const GraphPoint& root, double h,
                     const SolveOptions& opt) {
  const MetricGraph* gg = &g;
  const Weight* vv = &v;
  GraphPoint r = root;
  EdgeSplit split;
  if (!root.is_vertex()) {
    split = split_at(g, v, root);
    gg = &split.graph;
    vv = &split.weight;
    r = GraphPoint::at_vertex(split.vertex);
  }
  Mesh mesh = build_mesh(*gg, *vv, r, h);
  DiscreteProblem p = assemble(mesh, *vv, {r});
  Spectrum s = solve_generalized(p, opt);
  s.graph_hash = graph_hash(*gg, *vv, r);
  return s;
}

BoundReport bound_check(const Spectrum& s, const MetricGraph& g, const Weight& v, int n_max) {
  BoundReport rep;
  const double len = g.total_length();
  const double diam = diameter(g);
  const double ip = v.positive_part().integral();
  const double im = v.negative_part().integral();
  const double iabs = v.integral_abs();
  rep.worst_margin = std::numeric_limits<double>::infinity();

  auto run = [&](const std::vector<double>& lam, double mass, int& checked) {
    for (int k = 0; k < int(lam.size()) && k < n_max; ++k) {
      const int n = k + 1;
      const double rhs = std::min(len / double(n) / double(n), diam) * mass;
      ++checked;
      if (rhs <= 0.0) {
        if (lam[k] > 1e-12) ++rep.violations;
        continue;
      }
      const double margin = (rhs - lam[k]) / rhs;
      rep.worst_margin = std::min(rep.worst_margin, margin);
      if (lam[k] > rhs * (1.0 + 1e-12)) ++rep.violations;
    }
  };
  run(s.lambda_plus, ip, rep.checked_plus);
  run(s.lambda_minus, im, rep.checked_minus);
  if (rep.checked_plus + rep.checked_minus == 0) rep.worst_margin = 0.0;

  const double form_rhs = len * iabs;
  double lam1 = 0.0;
  if (!s.lambda_plus.empty()) lam1 = std::max(lam1, s.lambda_plus.front());
  if (!s.lambda_minus.empty()) lam1 = std::max(lam1, s.lambda_minus.front());
  rep.form_bound_margin = form_rhs > 0.0 ? (form_rhs - lam1) / form_rhs : (lam1 <= 1e-12 ? 0.0 : -1.0);
  if (lam1 > form_rhs * (1.0 + 1e-12) && form_rhs > 0.0) ++rep.violations;
  return rep;
}

LaplaceReport laplacian_spectrum(const MetricGraph& g, const GraphPoint& root, double h,
                                 const SolveOptions& opt) {
  Spectrum s = solve_graph(g, Weight::constant(g, 1.0), root, h, opt);
  LaplaceReport rep;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  const double len2 = g.total_length() * g.total_length();
  for (double lam : s.lambda_plus) rep.mu.push_back(1.0 / lam);  // descending lambda -> ascending mu
  for (std::size_t k = 0; k < rep.mu.size(); ++k) {
    const double n2 = double(k + 1) * double(k + 1);
    const double margin = (len2 * rep.mu[k] - n2) / n2;
    rep.worst_margin = std::min(rep.worst_margin, margin);
    if (margin < -1e-12) ++rep.violations;
  }
  if (rep.mu.empty()) rep.worst_margin = 0.0;
  return rep;
}

namespace {

// shortest expected wavelength of mode n_max for one sign of the weight
double min_wavelength(const Weight& part, int n_max) {
  const double total = part.integral_sqrt();
  const double vmax = part.max_value();
  if (total <= 0.0 || vmax <= 0.0) return std::numeric_limits<double>::infinity();
  return 2.0 * total / (double(n_max) * std::sqrt(vmax));
}

}  // namespace

WeylReport weyl_check(const MetricGraph& g, const Weight& v, const GraphPoint& root, int n_max,
                      double h_coarse, int levels, const SolveOptions& opt) {
  if (levels < 1) throw ConfigError("weyl_check: at least one mesh level required");
  const Weight vp = v.positive_part();
  const Weight vm = v.negative_part();
  const double h_finest = h_coarse / std::pow(2.0, levels - 1);
  const double need = std::min(min_wavelength(vp, n_max), min_wavelength(vm, n_max)) / 20.0;
  if (h_finest > need)
    throw ConfigError("weyl_check: mesh under-resolved for n_max (need h <= " +
                      format_double(need) + ", got " + format_double(h_finest) + ")");

  const MetricGraph* gg = &g;
  const Weight* vv = &v;
  GraphPoint r = root;
  EdgeSplit split;
  if (!root.is_vertex()) {
    split = split_at(g, v, root);
    gg = &split.graph;
    vv = &split.weight;
    r = GraphPoint::at_vertex(split.vertex);
  }

  WeylReport rep;
  rep.levels = levels;
  const bool nonneg = vv->min_value() >= 0.0;
  std::vector<double> prev_plus, prev_minus;
  Mesh mesh = build_mesh(*gg, *vv, r, h_coarse);
  Spectrum s;
  for (int lvl = 0; lvl < levels; ++lvl) {
    if (lvl > 0) mesh = mesh.refined();
    DiscreteProblem p = assemble(mesh, *vv, {r});
    s = solve_generalized(p, opt);
    auto track = [&](const std::vector<double>& cur, std::vector<double>& prev) {
      double gap = 0.0;
      for (std::size_t k = 0; k < prev.size() && k < cur.size() && int(k) < n_max; ++k) {
        if (nonneg && cur[k] < prev[k] * (1.0 - 1e-12)) rep.monotone_ok = false;
        gap = std::max(gap, std::abs(cur[k] - prev[k]) / std::max(std::abs(cur[k]), 1e-300));
      }
      if (lvl + 1 == levels) rep.cauchy_gap = std::max(rep.cauchy_gap, gap);
      prev = cur;
    };
    track(s.lambda_plus, prev_plus);
    track(s.lambda_minus, prev_minus);
  }

  const double pi = std::numbers::pi;
  auto ratios = [&](const std::vector<double>& lam, const Weight& part, std::vector<double>& out,
                    double& dev) {
    const double mass = part.integral_sqrt();
    if (mass <= 0.0) {
      dev = 0.0;
      return;
    }
    for (int k = 0; k < int(lam.size()) && k < n_max; ++k)
      out.push_back(double(k + 1) * std::sqrt(lam[k]) * pi / mass);
    if (int(out.size()) >= n_max)
      dev = std::abs(out[n_max - 1] - 1.0);
    else
      dev = std::numeric_limits<double>::infinity();  // not enough resolved modes
  };
  ratios(s.lambda_plus, vp, rep.ratio_plus, rep.deviation_plus);
  ratios(s.lambda_minus, vm, rep.ratio_minus, rep.deviation_minus);
  return rep;
}

SNumberReport snumbers_halfinv(const MetricGraph& g, const Weight& amplitude,
                               const GraphPoint& root, double h, const SolveOptions& opt) {
  Spectrum s = solve_graph(g, amplitude.squared(), root, h, opt);
  SNumberReport rep;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  const double bound_num = std::sqrt(g.total_length() * amplitude.squared().integral());
  for (std::size_t k = 0; k < s.lambda_plus.size(); ++k) {
    const double sn = std::sqrt(s.lambda_plus[k]);
    rep.s.push_back(sn);
    const double rhs = bound_num / double(k + 1);
    if (rhs <= 0.0) {
      if (sn > 1e-12) ++rep.violations;
      continue;
    }
    const double margin = (rhs - sn) / rhs;
    rep.worst_margin = std::min(rep.worst_margin, margin);
    if (sn > rhs * (1.0 + 1e-12)) ++rep.violations;
  }
  if (rep.s.empty()) rep.worst_margin = 0.0;
  return rep;
}

SharpnessReport sharpness_search(double length, double width, const SolveOptions& opt) {
  if (!(width > 0.0) || !(width < length))
    throw ConfigError("sharpness_search: need 0 < w < L");
  MetricGraph g = MetricGraph::make({"p0", "p1"}, {{"e", "p0", "p1", length}});
  Weight v = Weight::zero(g);
  v.set_profile(0, {0.0, width, length}, {1.0 / width, 0.0});
  const double h = std::min(width / 4.0, length / 256.0);
  Spectrum s = solve_graph(g, v, GraphPoint::at_vertex(g.vertex_index("p1")), h, opt);
  SharpnessReport rep;
  if (!s.lambda_plus.empty()) rep.lambda1 = s.lambda_plus.front();
  rep.ratio = rep.lambda1 / (length * v.integral());
  return rep;
}

std::vector<double> dirichlet_interval_ratios(double length, int n_max, double h,
                                              const SolveOptions& opt) {
  MetricGraph g = MetricGraph::make({"p0", "p1"}, {{"e", "p0", "p1", length}});
  Weight v = Weight::constant(g, 1.0);
  Mesh mesh = build_mesh(g, v, GraphPoint::at_vertex(0), h);
  DiscreteProblem p =
      assemble(mesh, v, {GraphPoint::at_vertex(0), GraphPoint::at_vertex(1)});
  Spectrum s = solve_generalized(p, opt);
  std::vector<double> out;
  const double denom = length * v.integral();
  for (int k = 0; k < int(s.lambda_plus.size()) && k < n_max; ++k)
    out.push_back(4.0 * double(k + 1) * double(k + 1) * s.lambda_plus[k] / denom);
  return out;
}

double exact_interval_eigenvalue(double length, IntervalProblem kind, int n) {
  const double pi = std::numbers::pi;
  if (kind == IntervalProblem::OnePoint)
    return 4.0 * length * length / (double(2 * n - 1) * double(2 * n - 1) * pi * pi);
  return length * length / (double(n) * double(n) * pi * pi);
}

std::vector<double> exact_interval_spectrum(double length, IntervalProblem kind, int count) {
  std::vector<double> out;
  for (int n = 1; n <= count; ++n) out.push_back(exact_interval_eigenvalue(length, kind, n));
  return out;
}

}  // namespace mspec
