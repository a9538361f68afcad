#include "metric_spectra/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

#include "metric_spectra/common.hpp"

namespace mspec::linalg {

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : a_) s += v * v;
  return std::sqrt(s);
}

double Matrix::sym_check() const {
  double m = 0.0;
  for (int i = 0; i < rows_; ++i)
    for (int j = i + 1; j < cols_; ++j) m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
  return m;
}

void Matrix::symmetrize() {
  for (int i = 0; i < rows_; ++i)
    for (int j = i + 1; j < cols_; ++j) {
      double v = 0.5 * ((*this)(i, j) + (*this)(j, i));
      (*this)(i, j) = v;
      (*this)(j, i) = v;
    }
}

Matrix matmul(const Matrix& a, const Matrix& b, Exec exec) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: shape mismatch");
  const int n = a.rows(), m = b.cols(), k = a.cols();
  Matrix c(n, m);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (int i = 0; i < n; ++i) {
    double* ci = c.row(i);
    const double* ai = a.row(i);
    for (int p = 0; p < k; ++p) {
      const double aip = ai[p];
      if (aip == 0.0) continue;
      const double* bp = b.row(p);
      for (int j = 0; j < m; ++j) ci[j] += aip * bp[j];
    }
  }
  return c;
}

Matrix matmul_at_a(const Matrix& a, Exec exec) {
  const int n = a.rows(), m = a.cols();
  Matrix c(m, m);
#pragma omp parallel for schedule(dynamic, 8) if (exec == Exec::Parallel)
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      double s = 0.0;
      for (int p = 0; p < n; ++p) s += a(p, i) * a(p, j);
      c(i, j) = s;
      c(j, i) = s;
    }
  }
  return c;
}

std::vector<double> matvec(const Matrix& a, const std::vector<double>& x) {
  std::vector<double> y(a.rows(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i);
    double s = 0.0;
    for (int j = 0; j < a.cols(); ++j) s += ai[j] * x[j];
    y[i] = s;
  }
  return y;
}

// Left-looking Cholesky: column j is finished before column j+1 starts;
// each L(i,j) is one contiguous dot product, computed by a single thread.
void cholesky_factor(Matrix& a, Exec exec) {
  const int n = a.rows();
  for (int j = 0; j < n; ++j) {
    double* lj = a.row(j);
    double d = a(j, j);
    for (int k = 0; k < j; ++k) d -= lj[k] * lj[k];
    if (!(d > 0.0)) throw std::runtime_error("cholesky: matrix not positive definite");
    const double ljj = std::sqrt(d);
    a(j, j) = ljj;
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel && n - j > 64)
    for (int i = j + 1; i < n; ++i) {
      double* li = a.row(i);
      double s = li[j];
      for (int k = 0; k < j; ++k) s -= li[k] * lj[k];
      li[j] = s / ljj;
    }
  }
}

void forward_solve(const Matrix& l, std::vector<double>& b) {
  const int n = l.rows();
  for (int i = 0; i < n; ++i) {
    const double* li = l.row(i);
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= li[k] * b[k];
    b[i] = s / li[i];
  }
}

void back_solve_transpose(const Matrix& l, std::vector<double>& b) {
  const int n = l.rows();
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int k = i + 1; k < n; ++k) s -= l(k, i) * b[k];
    b[i] = s / l(i, i);
  }
}

namespace {

// x <- L^{-1} x for every row of m, each row treated as a column vector;
// inner dots run over contiguous memory.
void forward_solve_rows(const Matrix& l, Matrix& m, Exec exec) {
  const int n = l.rows(), rows = m.rows();
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (int j = 0; j < rows; ++j) {
    double* x = m.row(j);
    for (int i = 0; i < n; ++i) {
      const double* li = l.row(i);
      double s = x[i];
      for (int k = 0; k < i; ++k) s -= li[k] * x[k];
      x[i] = s / li[i];
    }
  }
}

}  // namespace

Matrix congruence_inverse(const Matrix& l, const Matrix& b, Exec exec) {
  // row pass computes M <- M L^{-T}; with a transpose in between:
  //   pass 1: B L^{-T}; transpose (B symmetric): L^{-1} B; pass 2: L^{-1} B L^{-T}
  const int n = l.rows();
  Matrix c = b;
  forward_solve_rows(l, c, exec);
  Matrix ct(n, n);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel && n > 128)
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) ct(i, j) = c(j, i);
  forward_solve_rows(l, ct, exec);
  ct.symmetrize();
  return ct;
}

Tridiagonal householder_tridiagonalize(Matrix a, Exec exec) {
  const int n = a.rows();
  Tridiagonal t;
  t.diag.assign(n, 0.0);
  t.sub.assign(std::max(0, n - 1), 0.0);
  std::vector<double> v(n), p(n), q(n);
  for (int k = 0; k + 2 < n; ++k) {
    const int m = n - k - 1;  // size of the trailing block
    double norm2 = 0.0;
    for (int i = k + 1; i < n; ++i) norm2 += a(i, k) * a(i, k);
    double x0 = a(k + 1, k);
    double norm = std::sqrt(norm2);
    if (norm == 0.0) {
      t.sub[k] = 0.0;
      continue;
    }
    const double alpha = (x0 >= 0.0) ? -norm : norm;
    // v = x - alpha e1, normalized
    double vnorm2 = norm2 - 2.0 * alpha * x0 + alpha * alpha;
    double vn = std::sqrt(vnorm2);
    v[k + 1] = (x0 - alpha) / vn;
    for (int i = k + 2; i < n; ++i) v[i] = a(i, k) / vn;

    // p = S v over the trailing block (full symmetric storage, rows contiguous)
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel && m > 96)
    for (int i = k + 1; i < n; ++i) {
      const double* ai = a.row(i);
      double s = 0.0;
      for (int j = k + 1; j < n; ++j) s += ai[j] * v[j];
      p[i] = s;
    }
    double kappa = 0.0;
    for (int i = k + 1; i < n; ++i) kappa += v[i] * p[i];
    for (int i = k + 1; i < n; ++i) q[i] = p[i] - kappa * v[i];
    // S -= 2 v q^T + 2 q v^T
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel && m > 96)
    for (int i = k + 1; i < n; ++i) {
      double* ai = a.row(i);
      const double vi = v[i], qi = q[i];
      for (int j = k + 1; j < n; ++j) ai[j] -= 2.0 * (vi * q[j] + qi * v[j]);
    }
    t.sub[k] = alpha;
    // store reflector below the subdiagonal
    a(k + 1, k) = v[k + 1];
    for (int i = k + 2; i < n; ++i) a(i, k) = v[i];
  }
  if (n >= 2) t.sub[n - 2] = a(n - 1, n - 2);
  for (int i = 0; i < n; ++i) t.diag[i] = a(i, i);
  t.house = std::move(a);
  return t;
}

void apply_reflectors(const Matrix& house, std::vector<double>& x) {
  const int n = house.rows();
  for (int k = n - 3; k >= 0; --k) {
    // v lives in house(k+1.., k); apply H = I - 2 v v^T
    double dot = 0.0;
    for (int i = k + 1; i < n; ++i) dot += house(i, k) * x[i];
    if (dot == 0.0) continue;
    for (int i = k + 1; i < n; ++i) x[i] -= 2.0 * dot * house(i, k);
  }
}

namespace {

struct Rotation {
  int i;
  double c, s;
};

void apply_rotations_to_z(Matrix& z, const std::vector<Rotation>& rots, Exec exec) {
  const int n = z.rows();
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel && n > 64)
  for (int k = 0; k < n; ++k) {
    double* zk = z.row(k);
    for (const Rotation& r : rots) {
      const double f = zk[r.i + 1];
      const double g = zk[r.i];
      zk[r.i + 1] = r.s * g + r.c * f;
      zk[r.i] = r.c * g - r.s * f;
    }
  }
}

}  // namespace

std::vector<double> tridiag_eigenvalues(std::vector<double> d, std::vector<double> e,
                                        Matrix* z, Exec exec) {
  const int n = int(d.size());
  if (n == 0) return {};
  e.resize(n, 0.0);  // e[n-1] used as scratch zero
  std::vector<Rotation> rots;
  const double eps = 1e-15;
  double scale = 0.0;
  for (double v : d) scale = std::max(scale, std::abs(v));
  for (double v : e) scale = std::max(scale, std::abs(v));
  // couplings below eps * ||T|| are at the precision limit of the whole
  // matrix; deflating them keeps noise-scale blocks from cycling forever
  const double tiny = scale * eps;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd + tiny) break;
      }
      if (m != l) {
        if (iter++ == 60) throw std::runtime_error("tridiag_eigenvalues: too many iterations");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        rots.clear();
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          rots.push_back({i, c, s});
        }
        if (z && !rots.empty()) apply_rotations_to_z(*z, rots, exec);
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  if (!z) {
    std::sort(d.begin(), d.end());
    return d;
  }
  // sort ascending and permute columns of z accordingly
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return d[a] < d[b]; });
  std::vector<double> sorted(n);
  Matrix zs(n, n);
  for (int j = 0; j < n; ++j) {
    sorted[j] = d[idx[j]];
    for (int i = 0; i < n; ++i) zs(i, j) = (*z)(i, idx[j]);
  }
  *z = std::move(zs);
  return sorted;
}

std::vector<double> tridiag_eigenvector(const std::vector<double>& d,
                                        const std::vector<double>& e, double lambda,
                                        const std::vector<std::vector<double>>& prev,
                                        std::uint64_t seed) {
  const int n = int(d.size());
  if (n == 1) return {1.0};
  Rng rng(seed);
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.uniform(-1.0, 1.0);

  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(d[i]));
  for (int i = 0; i + 1 < n; ++i) scale = std::max(scale, std::abs(e[i]));
  const double mu = lambda + scale * 1e-14;  // keep the solve from going exactly singular

  // LU of (T - mu I) with partial pivoting; bandwidth grows to two
  // superdiagonals. Factor once, reuse for each iteration.
  std::vector<double> a(n), b(n, 0.0), c(n, 0.0), low(n, 0.0);
  std::vector<int> piv(n, 0);
  for (int i = 0; i < n; ++i) a[i] = d[i] - mu;
  for (int i = 0; i + 1 < n; ++i) b[i] = e[i];
  std::vector<double> sub(n, 0.0);
  for (int i = 0; i + 1 < n; ++i) sub[i + 1] = e[i];
  for (int k = 0; k + 1 < n; ++k) {
    if (std::abs(sub[k + 1]) > std::abs(a[k])) {
      piv[k] = 1;
      std::swap(a[k], sub[k + 1]);
      std::swap(b[k], a[k + 1]);
      if (k + 2 < n) {
        c[k] = b[k + 1];
        b[k + 1] = 0.0;
      }
    }
    double denom = a[k];
    if (denom == 0.0) denom = scale * 1e-300 + 1e-300;
    const double m = sub[k + 1] / denom;
    low[k + 1] = m;
    a[k + 1] -= m * b[k];
    if (k + 2 < n) b[k + 1] -= m * c[k];
  }

  auto solve = [&](std::vector<double>& rhs) {
    for (int k = 0; k + 1 < n; ++k) {
      if (piv[k]) std::swap(rhs[k], rhs[k + 1]);
      rhs[k + 1] -= low[k + 1] * rhs[k];
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = rhs[i];
      if (i + 1 < n) s -= b[i] * rhs[i + 1];
      if (i + 2 < n) s -= c[i] * rhs[i + 2];
      double denom = a[i];
      if (denom == 0.0) denom = scale * 1e-300 + 1e-300;
      rhs[i] = s / denom;
    }
  };

  auto orthogonalize = [&](std::vector<double>& v) {
    for (const auto& p : prev) {
      double dot = 0.0;
      for (int i = 0; i < n; ++i) dot += p[i] * v[i];
      for (int i = 0; i < n; ++i) v[i] -= dot * p[i];
    }
  };

  for (int it = 0; it < 5; ++it) {
    solve(x);
    orthogonalize(x);
    double nrm = 0.0;
    for (double v : x) nrm += v * v;
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) {
      for (int i = 0; i < n; ++i) x[i] = rng.uniform(-1.0, 1.0);
      continue;
    }
    for (int i = 0; i < n; ++i) x[i] /= nrm;
    // converged when the residual is at machine scale
    double res = 0.0;
    for (int i = 0; i < n; ++i) {
      double t = (d[i] - lambda) * x[i];
      if (i > 0) t += e[i - 1] * x[i - 1];
      if (i + 1 < n) t += e[i] * x[i + 1];
      res += t * t;
    }
    if (std::sqrt(res) <= 64.0 * 1e-16 * (scale + std::abs(lambda))) break;
  }
  return x;
}

SymEigen sym_eigen(Matrix a, bool want_vectors, Exec exec) {
  const int n = a.rows();
  SymEigen out;
  if (n == 0) return out;
  Tridiagonal t = householder_tridiagonalize(std::move(a), exec);
  if (!want_vectors) {
    out.values = tridiag_eigenvalues(std::move(t.diag), std::move(t.sub), nullptr, exec);
    return out;
  }
  // accumulate the Householder basis, then rotate it
  Matrix z = Matrix::identity(n);
  for (int k = n - 3; k >= 0; --k) {
    // Z <- H_k Z, H_k = I - 2 v v^T acting on rows k+1..n-1
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel && n > 64)
    for (int j = 0; j < n; ++j) {
      double dot = 0.0;
      for (int i = k + 1; i < n; ++i) dot += t.house(i, k) * z(i, j);
      if (dot == 0.0) continue;
      for (int i = k + 1; i < n; ++i) z(i, j) -= 2.0 * dot * t.house(i, k);
    }
  }
  out.values = tridiag_eigenvalues(std::move(t.diag), std::move(t.sub), &z, exec);
  out.vectors = std::move(z);
  out.has_vectors = true;
  return out;
}

}  // namespace mspec::linalg
