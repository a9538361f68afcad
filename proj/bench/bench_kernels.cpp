// Times the serial reference implementations against the OpenMP kernels:
// Cholesky, congruence transform, tridiagonalization, eigenvalue extraction
// and kernel-matrix sampling. Sizes and the repetition count can be set on
// the command line: bench_kernels [n] [reps].

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "metric_spectra/common.hpp"
#include "metric_spectra/graph.hpp"
#include "metric_spectra/kernels.hpp"
#include "metric_spectra/linalg.hpp"
#include "metric_spectra/mesh.hpp"

using namespace mspec;
using namespace mspec::linalg;

namespace {

double now() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

Matrix random_spd(Rng& rng, int n) {
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      const double v = rng.uniform(-1.0, 1.0);
      a(i, j) = v;
      a(j, i) = v;
    }
  for (int i = 0; i < n; ++i) a(i, i) += n;
  return a;
}

template <typename Fn>
double time_best(int reps, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now();
    fn();
    best = std::min(best, now() - t0);
  }
  return best;
}

void row(const char* name, double serial, double parallel) {
  std::printf("%-22s %10.3f ms %10.3f ms   speedup %.2fx\n", name, serial * 1e3, parallel * 1e3,
              serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 900;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 3;
  std::printf("dense kernels at n = %d (best of %d)\n", n, reps);
  std::printf("%-22s %13s %13s\n", "kernel", "serial", "openmp");

  Rng rng(1);
  Matrix a = random_spd(rng, n);
  Matrix b = random_spd(rng, n);

  Matrix l_serial;
  row("cholesky",
      time_best(reps, [&] { l_serial = a; cholesky_factor(l_serial, Exec::Serial); }),
      time_best(reps, [&] { Matrix l = a; cholesky_factor(l, Exec::Parallel); }));

  Matrix c;
  row("congruence",
      time_best(reps, [&] { c = congruence_inverse(l_serial, b, Exec::Serial); }),
      time_best(reps, [&] { c = congruence_inverse(l_serial, b, Exec::Parallel); }));

  row("tridiagonalize",
      time_best(reps, [&] { householder_tridiagonalize(c, Exec::Serial); }),
      time_best(reps, [&] { householder_tridiagonalize(c, Exec::Parallel); }));

  Tridiagonal t = householder_tridiagonalize(c, Exec::Serial);
  row("eigenvalues (QL)",
      time_best(reps, [&] { tridiag_eigenvalues(t.diag, t.sub, nullptr, Exec::Serial); }),
      time_best(reps, [&] { tridiag_eigenvalues(t.diag, t.sub, nullptr, Exec::Parallel); }));

  {
    const int m = n / 2;
    Matrix tall(n, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) tall(i, j) = rng.uniform(-1.0, 1.0);
    row("gram (A^T A)",
        time_best(reps, [&] { matmul_at_a(tall, Exec::Serial); }),
        time_best(reps, [&] { matmul_at_a(tall, Exec::Parallel); }));
  }

  {
    MetricGraph g = MetricGraph::make({"p0", "p1"}, {{"e", "p0", "p1", 1.0}});
    Mesh mesh = build_mesh(g, Weight::zero(g), GraphPoint::at_vertex(0), 1.0 / n);
    KernelSpec k = KernelSpec::expression("sin(pi*x)*cos(pi*y) + exp(-x*y)");
    row("kernel sampling",
        time_best(reps, [&] { sample_kernel(k, mesh, Exec::Serial); }),
        time_best(reps, [&] { sample_kernel(k, mesh, Exec::Parallel); }));
  }
  return 0;
}
