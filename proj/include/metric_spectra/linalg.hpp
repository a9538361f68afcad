#ifndef METRIC_SPECTRA_LINALG_HPP
#define METRIC_SPECTRA_LINALG_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mspec::linalg {

// Dense row-major matrix.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(std::size_t(rows) * cols, 0.0) {}

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return a_[std::size_t(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[std::size_t(i) * cols_ + j]; }

  double* row(int i) { return a_.data() + std::size_t(i) * cols_; }
  const double* row(int i) const { return a_.data() + std::size_t(i) * cols_; }

  double frobenius_norm() const;
  double sym_check() const;  // max |a_ij - a_ji|
  void symmetrize();

 private:
  int rows_, cols_;
  std::vector<double> a_;
};

// Execution policy for the kernels below. Parallel variants use OpenMP but
// are written so the floating point result does not depend on the thread
// count (each output element is reduced sequentially by a single thread).
enum class Exec { Serial, Parallel };

Matrix matmul(const Matrix& a, const Matrix& b, Exec exec);
Matrix matmul_at_a(const Matrix& a, Exec exec);  // A^T A
std::vector<double> matvec(const Matrix& a, const std::vector<double>& x);

// In-place lower Cholesky factorization A = L L^T (upper triangle untouched).
// Throws std::runtime_error if A is not positive definite.
void cholesky_factor(Matrix& a, Exec exec);

// Solve L y = b / L^T x = y for a single vector.
void forward_solve(const Matrix& l, std::vector<double>& b);
void back_solve_transpose(const Matrix& l, std::vector<double>& b);

// C = L^{-1} B L^{-T}, symmetrized. B must be symmetric.
Matrix congruence_inverse(const Matrix& l, const Matrix& b, Exec exec);

// Householder reduction of a symmetric matrix to tridiagonal form.
// The reflector vectors are kept in the strict lower triangle of `house`
// so selected eigenvectors can be transformed back.
struct Tridiagonal {
  std::vector<double> diag;  // d[0..n-1]
  std::vector<double> sub;   // e[0..n-2], e[i] couples i and i+1
  Matrix house;              // reflectors (column k holds v_k in rows k+1..)
};
Tridiagonal householder_tridiagonalize(Matrix a, Exec exec);

// Apply the accumulated reflectors to a vector given in tridiagonal
// coordinates, producing the vector in the original coordinates.
void apply_reflectors(const Matrix& house, std::vector<double>& x);

// Eigenvalues of a symmetric tridiagonal matrix, ascending. Implicit-shift
// QL with plane rotations; off-diagonals are annihilated down to relative
// machine scale. If z is non-null (n x n), the rotations are accumulated
// into it (columns of the final z are eigenvectors when z starts as the
// basis the tridiagonal matrix is expressed in).
std::vector<double> tridiag_eigenvalues(std::vector<double> d, std::vector<double> e,
                                        Matrix* z, Exec exec);

// One eigenvector of the tridiagonal matrix for the eigenvalue `lambda`
// by inverse iteration; orthogonalized against `prev` (vectors of nearby
// eigenvalues in a cluster).
std::vector<double> tridiag_eigenvector(const std::vector<double>& d,
                                        const std::vector<double>& e, double lambda,
                                        const std::vector<std::vector<double>>& prev,
                                        std::uint64_t seed);

// Full symmetric eigendecomposition (values ascending). If want_vectors,
// column j of `vectors` is the eigenvector of values[j].
struct SymEigen {
  std::vector<double> values;
  Matrix vectors;
  bool has_vectors = false;
};
SymEigen sym_eigen(Matrix a, bool want_vectors, Exec exec);

}  // namespace mspec::linalg

#endif
