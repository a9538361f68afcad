#ifndef METRIC_SPECTRA_SUBTREE_HPP
#define METRIC_SPECTRA_SUBTREE_HPP

#include <functional>
#include <string>
#include <vector>

#include "metric_spectra/graph.hpp"

namespace mspec {

// Closed sub-interval of an edge; degenerate (a == b) fragments represent
// single points, which carry measure zero.
struct Fragment {
  int edge;
  double a, b;
};

// A connected set of edge fragments of a host graph (in all partition work
// the host is a tree). Fragments on one edge are pairwise disjoint up to
// endpoints; touching fragments are merged on construction.
class Subtree {
 public:
  Subtree() = default;

  static Subtree whole(const MetricGraph& g);
  static Subtree from_fragments(const MetricGraph& g, std::vector<Fragment> frags);
  static Subtree single_point(const MetricGraph& g, const GraphPoint& p);

  const MetricGraph& graph() const { return *g_; }
  const std::vector<Fragment>& fragments() const { return frags_; }
  bool empty() const { return frags_.empty(); }

  double measure() const;
  double weight_integral(const Weight& v) const;
  bool contains(const GraphPoint& p) const;
  bool connected() const;

  // measure of the pairwise intersection with another subtree
  double overlap_measure(const Subtree& o) const;

  // this minus the open interval (a,b) of an edge
  Subtree minus_interval(int edge, double a, double b) const;
  // set difference up to measure zero (other must be fragment-aligned)
  Subtree difference(const Subtree& other) const;

  // smallest point of the fragment set under the canonical point order
  GraphPoint min_point() const;

 private:
  const MetricGraph* g_ = nullptr;
  std::vector<Fragment> frags_;
};

struct PuncturedSubtree {
  Subtree piece;
  GraphPoint puncture;
};

// One branch of the canonical split of {T, x}: the component of T \ {x}
// together with x. `arc_*` describe the fragment of the branch meeting x,
// `far_end` is the node of the branch structure at the other end of that
// fragment (the next stop of a walk entering the branch).
struct Branch {
  Subtree piece;
  int arc_edge = -1;
  double arc_lo = 0.0, arc_hi = 0.0;
  bool x_at_lo = true;
  GraphPoint far_end;
};

// Branches of {T, x}, ordered by (arc edge id, arc interval). Throws if x
// is not a point of T. A one-point subtree has no branches.
std::vector<Branch> branches_at(const Subtree& t, const GraphPoint& x);

// The canonical split of the punctured subtree {T, x}: every branch meets
// x with degree one, branches overlap pairwise in measure zero, and their
// union is T.
std::vector<Subtree> canonical_partition(const Subtree& t, const GraphPoint& x);

// Boundary points of a subtree: nodes of its structure with degree <= 1.
std::vector<GraphPoint> boundary_points(const Subtree& t);

// Nonnegative set function over subtrees. The built-in constructors are the
// superadditive families used throughout: measure, mass of a nonnegative
// weight, Hoelder power combinations, and the two measure/mass blends.
class SubtreeFn {
 public:
  using Eval = std::function<double(const Subtree&)>;

  static SubtreeFn measure();
  static SubtreeFn mass(Weight v);  // v >= 0 required
  static SubtreeFn holder(SubtreeFn f1, double a1, SubtreeFn f2, double a2);
  // |T|^{1/2} (int_T V)^{1/2}
  static SubtreeFn sqrt_measure_mass(Weight v);
  // |T|^{1-1/(2l)} (int_T V)^{1/(2l)}
  static SubtreeFn order_weighted(Weight v, int l);

  double operator()(const Subtree& t) const { return eval_(t); }
  const std::string& name() const { return name_; }

 private:
  SubtreeFn(Eval e, std::string n) : eval_(std::move(e)), name_(std::move(n)) {}
  Eval eval_;
  std::string name_;
};

}  // namespace mspec

#endif
