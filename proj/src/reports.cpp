#include "metric_spectra/reports.hpp"

#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "metric_spectra/common.hpp"
#include "metric_spectra/graph_io.hpp"

namespace mspec {

using nlohmann::json;

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp);
    out << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw ConfigError("cannot rename " + tmp + " to " + path);
}

json spectrum_report(const Spectrum& s, const MetricGraph& g, const Weight& v,
                     const BoundReport& bounds, int n_max) {
  json j;
  j["graph_hash"] = s.graph_hash;
  j["h"] = s.h;
  j["dofs"] = s.dofs;
  j["total_length"] = g.total_length();
  j["diameter"] = diameter(g);
  j["int_v_plus"] = v.positive_part().integral();
  j["int_v_minus"] = v.negative_part().integral();
  j["lambda_plus"] = s.lambda_plus;
  j["lambda_minus"] = s.lambda_minus;
  j["residuals_checked"] = s.residual_checked;
  j["max_residual"] = s.max_residual;
  j["bounds"] = {{"violations", bounds.violations},
                 {"worst_margin", bounds.worst_margin},
                 {"form_bound_margin", bounds.form_bound_margin},
                 {"checked_plus", bounds.checked_plus},
                 {"checked_minus", bounds.checked_minus},
                 {"n_max", n_max}};
  return j;
}

std::string spectrum_csv(const Spectrum& s, const MetricGraph& g, const Weight& v, int n_max) {
  const double len = g.total_length();
  const double diam = diameter(g);
  const double ip = v.positive_part().integral();
  const double sqrtp = v.positive_part().integral_sqrt();
  std::ostringstream out;
  out << "n,lambda_plus,lambda_minus,bound_rhs,margin,weyl_ratio\n";
  const int rows = std::min<int>(n_max, std::max(s.lambda_plus.size(), s.lambda_minus.size()));
  for (int k = 0; k < rows; ++k) {
    const int n = k + 1;
    out << n << ",";
    const bool hp = k < int(s.lambda_plus.size());
    const bool hm = k < int(s.lambda_minus.size());
    if (hp) out << format_double(s.lambda_plus[k]);
    out << ",";
    if (hm) out << format_double(s.lambda_minus[k]);
    out << ",";
    const double rhs = std::min(len / double(n) / double(n), diam) * ip;
    out << format_double(rhs) << ",";
    if (hp) out << format_double(rhs - s.lambda_plus[k]);
    out << ",";
    if (hp && sqrtp > 0.0)
      out << format_double(double(n) * std::sqrt(s.lambda_plus[k]) * std::numbers::pi / sqrtp);
    out << "\n";
  }
  return out.str();
}

namespace {

json point_json(const GraphPoint& p, const MetricGraph& g) {
  if (p.is_vertex()) return {{"vertex", g.vertex_id(p.vertex())}};
  return {{"edge", g.edge(p.edge()).id}, {"offset", p.offset()}};
}

json fragments_json(const Subtree& t, const MetricGraph& g) {
  json arr = json::array();
  for (const Fragment& f : t.fragments())
    arr.push_back({{"edge", g.edge(f.edge).id}, {"a", f.a}, {"b", f.b}});
  return arr;
}

}  // namespace

json partition_report(const Partition& p, const MetricGraph& g) {
  json j;
  j["target_n"] = p.target_n;
  j["achieved_k"] = p.achieved_k();
  j["phi_total"] = p.phi_total;
  j["certificate"] = p.certificate;
  j["max_phi_tilde"] = p.max_phi_tilde();
  json pieces = json::array();
  for (std::size_t i = 0; i < p.pieces.size(); ++i) {
    json piece;
    piece["fragments"] = fragments_json(p.pieces[i].piece, g);
    piece["puncture"] = point_json(p.pieces[i].puncture, g);
    piece["phi"] = p.piece_phi[i];
    piece["phi_tilde"] = p.piece_phi_tilde[i];
    piece["measure"] = p.pieces[i].piece.measure();
    pieces.push_back(std::move(piece));
  }
  j["pieces"] = std::move(pieces);
  return j;
}

json kernel_report_json(const KernelReport& r) {
  json j;
  j["singular_values"] = std::vector<double>(
      r.s.begin(), r.s.begin() + std::min<std::size_t>(r.s.size(), 64));
  j["m_functional"] = r.m.m;
  j["derivative_part"] = r.m.derivative_part;
  j["value_part"] = r.m.value_part;
  j["series_total"] = r.series_total;
  j["head"] = r.head;
  j["truncation"] = r.truncation;
  j["tail_beyond_head"] = r.tail_beyond_head;
  j["vanishes_at_root"] = r.vanishes_at_root;
  j["margin_weighted_sum"] = r.margin_weighted_sum;
  j["margin_refined"] = r.margin_refined;
  j["margin_individual"] = r.margin_individual;
  j["best_constant_observed"] = r.best_constant_observed;
  j["decay_ok"] = r.decay_ok;
  j["violations"] = r.violations;
  return j;
}

std::string json_to_string(const json& j) { return j.dump(2) + "\n"; }

}  // namespace mspec
