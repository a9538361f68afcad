#ifndef METRIC_SPECTRA_TREE_OPS_HPP
#define METRIC_SPECTRA_TREE_OPS_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "metric_spectra/graph.hpp"
#include "metric_spectra/mesh.hpp"
#include "metric_spectra/subtree.hpp"

namespace mspec {

// A tree (connected, acyclic, no parallel joins) with a selected root
// vertex and every edge oriented away from it.
class RootedTree {
 public:
  // Roots the given tree graph at `root`. An interior root splits its edge
  // first, so the root is always a vertex of graph().
  static RootedTree make(const MetricGraph& tree, const Weight& w, const GraphPoint& root);

  const MetricGraph& graph() const { return graph_; }
  const Weight& weight() const { return weight_; }
  GraphPoint root() const { return GraphPoint::at_vertex(root_vertex_); }
  int root_vertex() const { return root_vertex_; }

  // parent vertex on the path to the root (-1 for the root itself)
  int parent(int v) const { return parent_[v]; }
  // true when edge e is declared from->to in the away-from-root direction
  bool oriented_away(int e) const { return away_[e]; }
  // partial order: x <= y iff x lies on the path from the root to y
  bool precedes(const GraphPoint& x, const GraphPoint& y) const;

 private:
  MetricGraph graph_;
  Weight weight_;
  int root_vertex_ = -1;
  std::vector<int> parent_;
  std::vector<int> parent_edge_;
  std::vector<char> away_;
};

// Result of reducing a graph to a tree by cutting cycle edges. Every cut
// replaces an interior point of a cycle edge by a pair of new leaves; the
// map tau sends tree points back to graph points, isometrically on every
// fragment.
class CutReport {
 public:
  MetricGraph tree;
  int cut_count = 0;
  // pairs of tree vertices identified under tau
  std::vector<std::pair<int, int>> identified;

  GraphPoint to_graph(const GraphPoint& tree_point) const;
  Weight pull_back(const Weight& graph_weight) const;
  Subtree map_piece(const Subtree& tree_piece) const;  // image under tau

  struct Trace {
    int orig_edge;
    double start;
    int dir;  // tree offset t maps to graph offset start + dir*t
  };
  const std::vector<Trace>& traces() const { return traces_; }
  const MetricGraph& original() const { return *orig_; }

  friend CutReport cut_cycles(const MetricGraph& g);

 private:
  const MetricGraph* orig_ = nullptr;
  std::vector<Trace> traces_;               // per tree edge
  std::vector<GraphPoint> vertex_image_;    // per tree vertex
};

// Iteratively cuts the smallest-id edge lying on a cycle at its midpoint
// until the graph is a tree. Total length is preserved exactly and the
// number of cuts equals #E - #V + 1.
CutReport cut_cycles(const MetricGraph& g);

// max of phi over the canonical split of {T, x}; 0 for a one-point T.
double phi_tilde(const SubtreeFn& phi, const Subtree& t, const GraphPoint& x);

struct SplitResult {
  PuncturedSubtree kept;  // {T_x^+, x} with phi_tilde(kept) <= eps
  Subtree rest;           // T_x^-  with phi(rest) <= phi(T) - eps
  // F values recorded along the walk (non-increasing), for diagnostics
  std::vector<double> f_trace;
};

// One step of the balanced-split construction: walk from a boundary point
// along locally maximal branches until the forward value F crosses eps;
// the crossing point (a vertex or an interior bisection point) certifies
// both inequalities above.
SplitResult split_once(const Subtree& t, const SubtreeFn& phi, double eps,
                       const GraphPoint& root);
SplitResult split_once(const RootedTree& t, const SubtreeFn& phi, double eps);

struct Partition {
  std::vector<PuncturedSubtree> pieces;
  int target_n = 0;
  double phi_total = 0.0;
  double certificate = 0.0;  // phi_total / (n+1)
  std::vector<double> piece_phi;
  std::vector<double> piece_phi_tilde;

  int achieved_k() const { return int(pieces.size()); }
  double max_phi_tilde() const;
};

// Splits the tree into k <= n punctured pieces with
// max_j phi_tilde(T_j, x_j) <= phi(T)/(n+1).
Partition partition_n(const RootedTree& t, const SubtreeFn& phi, int n);
Partition partition_subtree(const Subtree& t, const SubtreeFn& phi, int n, const GraphPoint& root);

// Randomized audit of superadditivity and monotonicity of phi over random
// subtrees and random partitions of them.
struct SuperadditivityReport {
  int trials = 0;
  double worst_partition_margin = 0.0;  // min over trials of phi(T) - sum phi(T_j), scaled
  double worst_monotonicity_margin = 0.0;
  bool ok(double tol = 1e-12) const {
    return worst_partition_margin >= -tol && worst_monotonicity_margin >= -tol;
  }
};
SuperadditivityReport check_superadditive(const SubtreeFn& phi, const MetricGraph& tree,
                                          int trials, std::uint64_t seed);

// u evaluated at the punctures, frozen piecewise: P u = sum u(x_j) chi_j.
template <typename F>
StepFunction step_projection(const std::vector<PuncturedSubtree>& pieces, const F& u) {
  std::vector<Subtree> ps;
  std::vector<double> vals;
  ps.reserve(pieces.size());
  for (const PuncturedSubtree& p : pieces) {
    ps.push_back(p.piece);
    vals.push_back(u(p.puncture));
  }
  return StepFunction(std::move(ps), std::move(vals));
}

// Randomized check of the step-approximation bound
//   int |u - Pu|^2 V dx <= |G| (int V) (n+1)^{-2} ||u'||^2
// against the partition produced for phi_V (through cycle cutting when the
// graph is not a tree).
struct ApproxReport {
  int trials = 0;
  int violations = 0;
  double max_ratio = 0.0;  // max over trials of lhs/rhs
  int partition_k = 0;
};
ApproxReport approx_bound_check(const MetricGraph& g, const Weight& v, int n, int trials,
                                std::uint64_t seed);

// Constant C(l) = l^{2l} / ((l-1)!)^2 / (2l-1) of the higher-order bound.
double higher_order_constant(int l);

}  // namespace mspec

#endif
