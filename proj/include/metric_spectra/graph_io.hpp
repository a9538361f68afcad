#ifndef METRIC_SPECTRA_GRAPH_IO_HPP
#define METRIC_SPECTRA_GRAPH_IO_HPP

#include <string>

#include "metric_spectra/common.hpp"
#include "metric_spectra/graph.hpp"

namespace mspec {

struct ParsedGraph {
  MetricGraph graph;
  Weight weight;     // zero profile when the file has no "weights" entry
  GraphPoint root;   // defaults to the first declared vertex
};

struct GraphFileError : ConfigError {
  using ConfigError::ConfigError;
};

// Parse the JSON graph file format:
//   { "vertices": ["a","b"],
//     "edges":    [{"id":"e1","from":"a","to":"b","length":1.0}, ...],
//     "root":     {"vertex":"a"} | {"edge":"e1","offset":0.25},   (optional)
//     "weights":  {"e1": {"breakpoints":[0,0.5,1], "values":[4,0]}} (optional) }
// The parsed graph is validated; invariant violations raise GraphFileError.
ParsedGraph parse_graph(const std::string& text);
ParsedGraph parse_graph_file(const std::string& path);

// Canonical serialization; parse(emit(g)) round-trips bit-exactly.
std::string emit_graph(const MetricGraph& g, const Weight& w, const GraphPoint& root);

std::uint64_t graph_hash(const MetricGraph& g, const Weight& w, const GraphPoint& root);

}  // namespace mspec

#endif
