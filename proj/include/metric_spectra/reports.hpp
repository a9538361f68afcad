#ifndef METRIC_SPECTRA_REPORTS_HPP
#define METRIC_SPECTRA_REPORTS_HPP

#include <string>

#include <json.hpp>

#include "metric_spectra/graph.hpp"
#include "metric_spectra/kernels.hpp"
#include "metric_spectra/spectral.hpp"
#include "metric_spectra/tree_ops.hpp"

namespace mspec {

// Writes via a temp file in the same directory plus rename, so readers
// never observe a half-written report.
void write_atomic(const std::string& path, const std::string& content);

nlohmann::json spectrum_report(const Spectrum& s, const MetricGraph& g, const Weight& v,
                               const BoundReport& bounds, int n_max);

// CSV columns: n, lambda_plus, lambda_minus, bound_rhs, margin, weyl_ratio.
// bound_rhs/margin/weyl_ratio refer to the positive side; the JSON report
// carries both signs in full.
std::string spectrum_csv(const Spectrum& s, const MetricGraph& g, const Weight& v, int n_max);

// Pieces with fragments, punctures, per-piece phi values and the global
// certificate phi_total/(n+1).
nlohmann::json partition_report(const Partition& p, const MetricGraph& g);

nlohmann::json kernel_report_json(const KernelReport& r);

std::string json_to_string(const nlohmann::json& j);

}  // namespace mspec

#endif
