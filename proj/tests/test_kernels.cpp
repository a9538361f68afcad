#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "metric_spectra/common.hpp"
#include "metric_spectra/graph_io.hpp"
#include "metric_spectra/kernels.hpp"

using namespace mspec;
using std::numbers::pi;

namespace {

MetricGraph interval() { return MetricGraph::make({"p0", "p1"}, {{"e", "p0", "p1", 1.0}}); }

MetricGraph star3() {
  return MetricGraph::make({"c", "a", "b", "d"}, {{"ea", "c", "a", 1.0},
                                                  {"eb", "c", "b", 1.0},
                                                  {"ed", "c", "d", 1.0}});
}

Mesh unit_mesh(const MetricGraph& g, double h) {
  return build_mesh(g, Weight::zero(g), GraphPoint::at_vertex(0), h);
}

}  // namespace

TEST_CASE("expression grammar: parsing and evaluation") {
  KernelExpr e1 = KernelExpr::parse("sin(pi*x)*cos(pi*y)");
  CHECK(e1.eval(0.5, 0.0) == doctest::Approx(1.0));
  CHECK(e1.eval(0.0, 0.3) == doctest::Approx(0.0));

  KernelExpr e2 = KernelExpr::parse("min(x,y)");
  CHECK(e2.eval(0.3, 0.7) == doctest::Approx(0.3));
  CHECK(e2.eval(0.9, 0.2) == doctest::Approx(0.2));

  KernelExpr e3 = KernelExpr::parse("x^2 - 2*x*y + abs(y)");
  CHECK(e3.eval(2.0, -3.0) == doctest::Approx(4.0 + 12.0 + 3.0));

  KernelExpr e4 = KernelExpr::parse("exp(-x)*(1 + y)");
  CHECK(e4.eval(1.0, 1.0) == doctest::Approx(2.0 * std::exp(-1.0)));

  CHECK_THROWS(KernelExpr::parse("x +"));
  CHECK_THROWS(KernelExpr::parse("foo(x)"));
  CHECK_THROWS(KernelExpr::parse("x ^ y"));  // exponent must be constant
  CHECK_THROWS(KernelExpr::parse("min(x)"));
}

TEST_CASE("symbolic derivative agrees with finite differences") {
  for (const char* text : {"sin(pi*x)*cos(pi*y)", "x^3 - 2*x*y", "exp(-x)*y", "min(x,y)"}) {
    KernelExpr k = KernelExpr::parse(text);
    KernelExpr dk = k.derivative_x();
    Rng rng(fnv1a(text));
    for (int t = 0; t < 30; ++t) {
      const double x = rng.uniform(0.05, 0.95);
      const double y = rng.uniform(0.05, 0.95);
      if (std::abs(x - y) < 1e-3) continue;  // stay off the min() kink
      const double d = 1e-6;
      const double fd = (k.eval(x + d, y) - k.eval(x - d, y)) / (2 * d);
      CHECK(dk.eval(x, y) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("m functional: constants and linear kernels") {
  MetricGraph g = interval();
  Mesh mesh = unit_mesh(g, 1.0 / 200);

  MFunctional m1 = m_functional(KernelSpec::expression("1"), g, mesh, linalg::Exec::Serial);
  CHECK(m1.m == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(m1.derivative_part == doctest::Approx(0.0));

  MFunctional mx = m_functional(KernelSpec::expression("x"), g, mesh, linalg::Exec::Serial);
  CHECK(mx.value_part == doctest::Approx(1.0 / 3.0).epsilon(1e-4));
  CHECK(mx.derivative_part == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(mx.m == doctest::Approx(4.0 / 3.0).epsilon(1e-4));

  MFunctional m0 = m_functional(KernelSpec::expression("0"), g, mesh, linalg::Exec::Serial);
  CHECK(m0.m == doctest::Approx(0.0));
}

TEST_CASE("singular values: rank-one kernel") {
  MetricGraph g = interval();
  Mesh mesh = unit_mesh(g, 1.0 / 150);
  std::vector<double> s = singular_values(KernelSpec::expression("x"), g, mesh,
                                          linalg::Exec::Serial);
  REQUIRE(!s.empty());
  CHECK(s[0] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-3));
  CHECK(s[1] < 1e-6 * s[0]);  // numerically rank one (Gram route squares the gap)

  std::vector<double> z = singular_values(KernelSpec::expression("0"), g, mesh,
                                          linalg::Exec::Serial);
  for (double v : z) CHECK(v == 0.0);
}

TEST_CASE("singular values: the min kernel matches the one-point spectrum") {
  MetricGraph g = interval();
  Mesh mesh = unit_mesh(g, 1.0 / 200);
  std::vector<double> s = singular_values(KernelSpec::expression("min(x,y)"), g, mesh,
                                          linalg::Exec::Serial);
  for (int n = 1; n <= 5; ++n) {
    const double exact = 4.0 / ((2 * n - 1) * (2 * n - 1) * pi * pi);
    CHECK(s[n - 1] == doctest::Approx(exact).epsilon(1e-3));
  }
}

TEST_CASE("transposed kernel has the same singular values") {
  MetricGraph g = interval();
  Mesh mesh = unit_mesh(g, 1.0 / 100);
  std::vector<double> s1 = singular_values(KernelSpec::expression("exp(x*y)+x"), g, mesh,
                                           linalg::Exec::Serial);
  std::vector<double> s2 = singular_values(KernelSpec::expression("exp(y*x)+y"), g, mesh,
                                           linalg::Exec::Serial);
  REQUIRE(s1.size() == s2.size());
  for (std::size_t k = 0; k < 6; ++k) {
    if (s1[k] < 1e-6 * s1[0]) break;  // below the resolvable range
    CHECK(s1[k] == doctest::Approx(s2[k]).epsilon(1e-10));
  }
}

TEST_CASE("mesh refinement: leading singular values are Cauchy") {
  MetricGraph g = interval();
  Mesh coarse = unit_mesh(g, 1.0 / 500);
  Mesh fine = coarse.refined();
  for (const char* text : {"exp(x*y)", "sin(pi*x)*cos(pi*y) + 1"}) {
    std::vector<double> sc = singular_values(KernelSpec::expression(text), g, coarse,
                                             linalg::Exec::Serial);
    std::vector<double> sf = singular_values(KernelSpec::expression(text), g, fine,
                                             linalg::Exec::Serial);
    for (int n = 0; n < 4; ++n) {
      if (sc[n] < 1e-6 * sc[0]) break;  // below the resolvable range
      CHECK(std::abs(sc[n] - sf[n]) / sf[n] < 1e-4);
    }
  }
}

TEST_CASE("series bounds: rank-one kernel vanishing at the root") {
  MetricGraph g = interval();
  KernelReport rep = check_kernel_bounds(KernelSpec::expression("x"), g,
                                         GraphPoint::at_vertex(g.vertex_index("p0")),
                                         1.0 / 200, linalg::Exec::Serial);
  CHECK(rep.vanishes_at_root);  // K(0, y) = 0
  CHECK(rep.violations == 0);
  CHECK(rep.series_total == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
  // refined bound: 1/3 <= 8 * 1 * 1
  CHECK(rep.margin_refined > 0.0);
  CHECK(rep.margin_weighted_sum > 0.0);
  CHECK(rep.margin_individual > 0.0);
}

TEST_CASE("series bounds: zero kernel is vacuous") {
  MetricGraph g = interval();
  KernelReport rep = check_kernel_bounds(KernelSpec::expression("0"), g,
                                         GraphPoint::at_vertex(0), 1.0 / 100,
                                         linalg::Exec::Serial);
  CHECK(rep.violations == 0);
  CHECK(rep.series_total == 0.0);
}

TEST_CASE("series bounds: min kernel against the exact series") {
  // sum n^2 s_n^2 with s_n = 4/((2n-1)^2 pi^2), summed far into the tail
  double oracle = 0.0;
  for (int n = 200000; n >= 1; --n) {
    const double sn = 4.0 / (double(2 * n - 1) * double(2 * n - 1) * pi * pi);
    oracle += double(n) * double(n) * sn * sn;
  }
  MetricGraph g = interval();
  KernelReport rep = check_kernel_bounds(KernelSpec::expression("min(x,y)"), g,
                                         GraphPoint::at_vertex(g.vertex_index("p0")),
                                         1.0 / 200, linalg::Exec::Serial);
  CHECK(rep.vanishes_at_root);  // min(0, y) = 0
  CHECK(rep.violations == 0);
  CHECK(rep.decay_ok);
  CHECK(rep.series_total == doctest::Approx(oracle).epsilon(1e-3));
  // refined inequality with int int |K'_x|^2 = 1/2
  CHECK(rep.m.derivative_part == doctest::Approx(0.5).epsilon(1e-2));
  CHECK(rep.margin_refined > 0.0);
}

TEST_CASE("individual bound follows from the series bound") {
  MetricGraph g = star3();
  KernelReport rep = check_kernel_bounds(KernelSpec::expression("sin(x)*cos(y)"), g,
                                         GraphPoint::at_vertex(g.vertex_index("c")),
                                         1.0 / 60, linalg::Exec::Serial);
  CHECK(rep.violations == 0);
  if (rep.margin_weighted_sum >= 0.0) CHECK(rep.margin_individual >= 0.0);
}

TEST_CASE("sampled kernel file round-trips through the expression path") {
  MetricGraph g = interval();
  Mesh mesh = unit_mesh(g, 1.0 / 64);
  KernelSpec expr = KernelSpec::expression("exp(-x)*(1+y)");
  linalg::Matrix samples = sample_kernel(expr, mesh, linalg::Exec::Serial);

  const std::string path = "/tmp/kernel_sample_test.txt";
  {
    std::ofstream out(path);
    out << "{\"mesh_hash\": " << mesh.signature() << ", \"rows\": " << samples.rows()
        << ", \"cols\": " << samples.cols() << "}\n";
    for (int i = 0; i < samples.rows(); ++i) {
      for (int j = 0; j < samples.cols(); ++j) out << format_double(samples(i, j)) << " ";
      out << "\n";
    }
  }
  KernelSpec loaded = KernelSpec::from_sample_file(path);
  std::vector<double> s1 = singular_values(expr, g, mesh, linalg::Exec::Serial);
  std::vector<double> s2 = singular_values(loaded, g, mesh, linalg::Exec::Serial);
  for (int n = 0; n < 4; ++n) CHECK(s1[n] == doctest::Approx(s2[n]).epsilon(1e-12));

  // finite-difference derivative with the step-halving consistency check
  MFunctional m1 = m_functional(expr, g, mesh, linalg::Exec::Serial);
  MFunctional m2 = m_functional(loaded, g, mesh, linalg::Exec::Serial);
  CHECK(m2.m == doctest::Approx(m1.m).epsilon(1e-2));

  // a sample taken on a different mesh is rejected
  Mesh other = unit_mesh(g, 1.0 / 50);
  CHECK_THROWS(singular_values(loaded, g, other, linalg::Exec::Serial));
  std::remove(path.c_str());
}

TEST_CASE("parallel kernel sampling matches serial") {
  MetricGraph g = star3();
  Mesh mesh = unit_mesh(g, 1.0 / 40);
  KernelSpec k = KernelSpec::expression("sin(x)*cos(y) + x*y");
  linalg::Matrix a = sample_kernel(k, mesh, linalg::Exec::Serial);
  linalg::Matrix b = sample_kernel(k, mesh, linalg::Exec::Parallel);
  double gap = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) gap = std::max(gap, std::abs(a(i, j) - b(i, j)));
  CHECK(gap == 0.0);
}
