#ifndef METRIC_SPECTRA_RANDOM_INSTANCES_HPP
#define METRIC_SPECTRA_RANDOM_INSTANCES_HPP

#include <cstdint>
#include <vector>

#include "metric_spectra/common.hpp"
#include "metric_spectra/graph.hpp"
#include "metric_spectra/subtree.hpp"

namespace mspec {

struct RandomGraphOptions {
  int min_edges = 2;
  int max_edges = 15;
  double length_lo = 0.1;
  double length_hi = 3.0;
  int extra_cycle_edges = 0;  // > 0 produces cyclic graphs
};

MetricGraph random_tree(Rng& rng, const RandomGraphOptions& opt);
MetricGraph random_connected_graph(Rng& rng, const RandomGraphOptions& opt);

struct RandomWeightOptions {
  int max_pieces = 3;
  double amplitude = 3.0;
  bool nonnegative = false;
  double zero_chance = 0.1;  // chance an edge keeps the zero weight
};

Weight random_weight(Rng& rng, const MetricGraph& g, const RandomWeightOptions& opt);

GraphPoint random_point(Rng& rng, const MetricGraph& g);

// Connected fragment set grown from a random start with a random length
// budget.
Subtree random_subtree(Rng& rng, const MetricGraph& tree);

// Recursive random split of a subtree into connected, measure-disjoint
// pieces (canonical branches regrouped at random interior points).
std::vector<Subtree> random_subtree_partition(Rng& rng, const Subtree& s, int depth);

}  // namespace mspec

#endif
