#ifndef METRIC_SPECTRA_KERNELS_HPP
#define METRIC_SPECTRA_KERNELS_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "metric_spectra/graph.hpp"
#include "metric_spectra/linalg.hpp"
#include "metric_spectra/mesh.hpp"

namespace mspec {

// Closed-form expressions in the two arclength coordinates x and y (the
// offset of each point along its edge, measured from the edge's `from`
// endpoint). Grammar: numbers, x, y, pi, + - *, ^ (constant exponent),
// sin, cos, exp, min, abs, parentheses, unary minus.
class KernelExpr {
 public:
  static KernelExpr parse(const std::string& text);

  double eval(double x, double y) const;
  // partial derivative in x, taken symbolically (a.e. for min/abs)
  KernelExpr derivative_x() const;

  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

// Kernel given either as an expression or as dense samples on the nodes of
// a mesh product (row index = x node, column index = y node).
class KernelSpec {
 public:
  static KernelSpec expression(const std::string& text);
  static KernelSpec sampled(linalg::Matrix values, std::uint64_t mesh_hash);
  // parse a sample file: one JSON header line {"mesh_hash":..,"rows":..,
  // "cols":..} followed by rows of whitespace-separated numbers
  static KernelSpec from_sample_file(const std::string& path);

  bool is_expression() const { return expr_.has_value(); }
  const KernelExpr& expr() const { return *expr_; }
  const linalg::Matrix& samples() const { return samples_; }
  std::uint64_t sample_mesh_hash() const { return sample_mesh_hash_; }

 private:
  std::optional<KernelExpr> expr_;
  linalg::Matrix samples_;
  std::uint64_t sample_mesh_hash_ = 0;
};

// Node coordinates and trapezoid weights of a mesh, in dof order.
struct KernelGrid {
  std::vector<GraphPoint> where;
  std::vector<double> weight;  // trapezoid weights, sum = |G|
  std::vector<double> coord;   // arclength coordinate fed to expressions
};
KernelGrid kernel_grid(const Mesh& mesh);

// K sampled on the mesh product.
linalg::Matrix sample_kernel(const KernelSpec& k, const Mesh& mesh, linalg::Exec exec);

// M(K) = int int (|K|^2 + |G|^2 |K'_x|^2) dx dy by composite trapezoid
// quadrature. Expressions are differentiated symbolically; sampled kernels
// use finite differences along each edge with a step-halving consistency
// check (relative disagreement above 1e-3 throws).
struct MFunctional {
  double m = 0.0;
  double derivative_part = 0.0;  // int int |K'_x|^2
  double value_part = 0.0;       // int int |K|^2
};
MFunctional m_functional(const KernelSpec& k, const MetricGraph& g, const Mesh& mesh,
                         linalg::Exec exec);

// Singular values of the integral operator u -> int K(.,y) u(y) dy on the
// mesh: the matrix W^{1/2} [K] W^{1/2} converges to the operator in L^2.
std::vector<double> singular_values(const KernelSpec& k, const MetricGraph& g, const Mesh& mesh,
                                    linalg::Exec exec);

struct KernelReport {
  std::vector<double> s;     // descending
  MFunctional m;
  int truncation = 0;        // reported head length N
  double head = 0.0;         // sum_{n<=N} n^2 s_n^2
  double series_total = 0.0; // full discrete series (all resolved terms)
  double tail_beyond_head = 0.0;
  bool vanishes_at_root = false;
  // margins (rhs - lhs)/rhs; negative = violation
  double margin_weighted_sum = 0.0;   // sum n^2 s_n^2 <= 32 |G|^2 M
  double margin_refined = 0.0;        //              <= 8 |G|^2 int int |K'_x|^2 (flagged kernels)
  double margin_individual = 0.0;     // min over n of s_n <= sqrt(96) n^{-3/2} sqrt(M)
  double best_constant_observed = 0.0;  // series / (|G|^2 M)
  bool decay_ok = true;               // s_n n^{3/2} decreasing over the resolved range
  int violations = 0;
};

// Verifies the weighted s-number series bound, its refinement for kernels
// vanishing at the root, and the individual n^{-3/2} bound.
KernelReport check_kernel_bounds(const KernelSpec& k, const MetricGraph& g,
                                 const GraphPoint& root, double h,
                                 linalg::Exec exec = linalg::Exec::Parallel);

}  // namespace mspec

#endif
