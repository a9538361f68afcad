#ifndef METRIC_SPECTRA_SPECTRAL_HPP
#define METRIC_SPECTRA_SPECTRAL_HPP

#include <cstdint>
#include <vector>

#include "metric_spectra/graph.hpp"
#include "metric_spectra/linalg.hpp"
#include "metric_spectra/mesh.hpp"

namespace mspec {

// Stiffness/weighted-mass pair of the piecewise-linear space on a mesh.
// A comes from int |u'|^2, B from int |u|^2 V; both exact for piecewise
// constant V. Dirichlet points are imposed by eliminating their dofs, so
// the constrained A stays positive definite.
struct DiscreteProblem {
  linalg::Matrix a, b;          // constrained
  std::vector<int> free_dofs;   // constrained index -> mesh dof
  int mesh_dofs = 0;
  double h = 0.0;
};

// Unconstrained assembly (all mesh dofs).
struct AssembledForms {
  linalg::Matrix a, b;
};
AssembledForms assemble_forms(const Mesh& mesh, const Weight& v);

DiscreteProblem assemble(const Mesh& mesh, const Weight& v,
                         const std::vector<GraphPoint>& dirichlet);

struct SolveOptions {
  int vectors_per_sign = 48;       // eigenpairs residual-verified per sign
  double zero_floor_rel = 1e-12;   // |lambda| below this times max|lambda| is dropped
  double residual_tol = 1e-8;
  linalg::Exec exec = linalg::Exec::Parallel;
};

struct Spectrum {
  std::vector<double> lambda_plus;   // descending
  std::vector<double> lambda_minus;  // absolute values of negatives, descending
  int dofs = 0;
  double h = 0.0;
  int residual_checked = 0;
  double max_residual = 0.0;
  std::uint64_t graph_hash = 0;
};

// Solves B u = lambda A u by Cholesky reduction of A, congruence transform
// and rotation-based diagonalization of the transformed matrix. Residuals
// of the leading pairs of each sign are verified against residual_tol.
Spectrum solve_generalized(const DiscreteProblem& p, const SolveOptions& opt = {});

// Convenience pipeline: split an interior root, mesh, assemble, solve.
Spectrum solve_graph(const MetricGraph& g, const Weight& v, const GraphPoint& root, double h,
                     const SolveOptions& opt = {});

// Margins of lambda_n^{pm} <= min(|G|/n^2, diam) * int V_{pm}.
struct BoundReport {
  int checked_plus = 0, checked_minus = 0;
  int violations = 0;
  double worst_margin = 0.0;        // min over n of (rhs - lambda)/rhs
  double form_bound_margin = 0.0;   // (|G| int|V| - lambda_1) / (|G| int|V|)
};
BoundReport bound_check(const Spectrum& s, const MetricGraph& g, const Weight& v, int n_max);

// V == 1 case solved as A u = mu M u through the weighted problem:
// mu_n = 1 / lambda_n. Values ascending. Sound lower-bound check
// |G|^2 mu_n >= n^2 holds at any mesh.
struct LaplaceReport {
  std::vector<double> mu;  // ascending
  int violations = 0;
  double worst_margin = 0.0;  // min of (|G|^2 mu_n - n^2)/n^2
};
LaplaceReport laplacian_spectrum(const MetricGraph& g, const GraphPoint& root, double h,
                                 const SolveOptions& opt = {});

// Counting ratios r_n = n sqrt(lambda_n^pm) pi / int sqrt(V_pm) on a
// refinement ladder. Requires at least 20 nodes per expected wavelength of
// mode n_max; an under-resolved request throws.
struct WeylReport {
  std::vector<double> ratio_plus, ratio_minus;
  double deviation_plus = 0.0, deviation_minus = 0.0;  // |r_{n_max} - 1|
  bool monotone_ok = true;   // lambda_n^h nondecreasing under refinement (V >= 0 only)
  double cauchy_gap = 0.0;   // max relative change of tracked lambda between last two meshes
  int levels = 0;
};
WeylReport weyl_check(const MetricGraph& g, const Weight& v, const GraphPoint& root, int n_max,
                      double h_coarse, int levels, const SolveOptions& opt = {});

// Singular numbers s_n = sqrt(lambda_n(B_{a^2})) of the half-inverse
// composition with multiplication by a; checks s_n <= sqrt(|G|) ||a||_2 / n.
struct SNumberReport {
  std::vector<double> s;  // descending
  int violations = 0;
  double worst_margin = 0.0;
};
SNumberReport snumbers_halfinv(const MetricGraph& g, const Weight& amplitude,
                               const GraphPoint& root, double h, const SolveOptions& opt = {});

// Concentrated weight (unit mass on [0,w]) on [0,L] with the free end at 0:
// lambda_1 / (L int V) approaches 1 as w -> 0.
struct SharpnessReport {
  double ratio = 0.0;      // lambda_1 / (L int V)
  double lambda1 = 0.0;
};
SharpnessReport sharpness_search(double length, double width, const SolveOptions& opt = {});

// Two-point problem on [0,L] (both ends fixed), V == 1: ratios
// 4 n^2 Lambda_n / (L int V), which approach 4/pi^2 from below.
std::vector<double> dirichlet_interval_ratios(double length, int n_max, double h,
                                              const SolveOptions& opt = {});

enum class IntervalProblem { OnePoint, TwoPoint };
// Closed-form weighted spectrum of the V == 1 interval problem:
// one-point: 4 L^2 / ((2n-1)^2 pi^2); two-point: L^2 / (n pi)^2.
double exact_interval_eigenvalue(double length, IntervalProblem kind, int n);
std::vector<double> exact_interval_spectrum(double length, IntervalProblem kind, int count);

}  // namespace mspec

#endif
