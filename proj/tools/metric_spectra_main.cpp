// Command-line driver: every experiment the library supports, reproducible
// from flags and a seed. Exit status: 0 = all asserted inequalities hold,
// 1 = a violation was found (offending instance written for replay),
// 2 = configuration error.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "metric_spectra/common.hpp"
#include "metric_spectra/graph_io.hpp"
#include "metric_spectra/kernels.hpp"
#include "metric_spectra/reports.hpp"
#include "metric_spectra/spectral.hpp"
#include "metric_spectra/suites.hpp"
#include "metric_spectra/tree_ops.hpp"

namespace fs = std::filesystem;
using namespace mspec;

namespace {

struct Common {
  std::string graph_path;
  std::string weight_path;
  std::string out_dir = "reports";
  double h = 0.01;
  int n = 1;
  int n_max = 10;
  int trials = 100;
  std::uint64_t seed = 1;
  double tol = 0.03;
  std::string kernel = "1";
};

void apply_env_seed(Common& c) {
  if (const char* env = std::getenv("METRIC_SPECTRA_SEED")) c.seed = std::strtoull(env, nullptr, 10);
}

void write_report(const Common& c, const std::string& name, const std::string& content) {
  fs::create_directories(c.out_dir);
  write_atomic((fs::path(c.out_dir) / name).string(), content);
}

ParsedGraph load_graph(const Common& c) {
  if (c.graph_path.empty()) throw ConfigError("--graph is required");
  ParsedGraph pg = parse_graph_file(c.graph_path);
  if (!c.weight_path.empty()) {
    // weight override: a graph file whose weights section replaces the one loaded
    ParsedGraph w = parse_graph_file(c.weight_path);
    pg.weight = std::move(w.weight);
  }
  return pg;
}

int cmd_validate(const Common& c) {
  if (c.graph_path.empty()) throw ConfigError("--graph is required");
  ParsedGraph pg = parse_graph_file(c.graph_path);
  // parse_graph_file already validates; reaching here means the file is sound
  std::cout << "ok: " << pg.graph.vertex_count() << " vertices, " << pg.graph.edge_count()
            << " edges, total length " << format_double(pg.graph.total_length()) << "\n";
  return 0;
}

int cmd_spectrum(const Common& c) {
  ParsedGraph pg = load_graph(c);
  SolveOptions opt;
  opt.vectors_per_sign = c.n_max;
  Spectrum s = solve_graph(pg.graph, pg.weight, pg.root, c.h, opt);
  BoundReport bounds = bound_check(s, pg.graph, pg.weight, c.n_max);
  write_report(c, "spectrum.json",
               json_to_string(spectrum_report(s, pg.graph, pg.weight, bounds, c.n_max)));
  write_report(c, "spectrum.csv", spectrum_csv(s, pg.graph, pg.weight, c.n_max));
  std::cout << "dofs " << s.dofs << ", lambda+ count " << s.lambda_plus.size()
            << ", lambda- count " << s.lambda_minus.size() << ", bound violations "
            << bounds.violations << "\n";
  return bounds.violations == 0 ? 0 : 1;
}

int cmd_bounds(const Common& c) {
  ParsedGraph pg = load_graph(c);
  SolveOptions opt;
  opt.vectors_per_sign = c.n_max;
  Spectrum s = solve_graph(pg.graph, pg.weight, pg.root, c.h, opt);
  BoundReport rep = bound_check(s, pg.graph, pg.weight, c.n_max);
  std::cout << "checked +" << rep.checked_plus << " -" << rep.checked_minus
            << ", worst margin " << format_double(rep.worst_margin) << ", violations "
            << rep.violations << "\n";
  return rep.violations == 0 ? 0 : 1;
}

int cmd_weyl(const Common& c) {
  ParsedGraph pg = load_graph(c);
  WeylReport rep = weyl_check(pg.graph, pg.weight, pg.root, c.n_max, c.h * 4.0, 3);
  nlohmann::json j;
  j["ratio_plus"] = rep.ratio_plus;
  j["ratio_minus"] = rep.ratio_minus;
  j["deviation_plus"] = rep.deviation_plus;
  j["deviation_minus"] = rep.deviation_minus;
  j["monotone_ok"] = rep.monotone_ok;
  j["cauchy_gap"] = rep.cauchy_gap;
  write_report(c, "weyl.json", json_to_string(j));
  const double dev = std::max(rep.deviation_plus, rep.deviation_minus);
  std::cout << "deviation+ " << format_double(rep.deviation_plus) << ", deviation- "
            << format_double(rep.deviation_minus) << ", tolerance " << c.tol << "\n";
  return dev <= c.tol && rep.monotone_ok ? 0 : 1;
}

int cmd_partition(const Common& c) {
  if (c.n < 1) throw ConfigError("--n must be at least 1");
  ParsedGraph pg = load_graph(c);
  CutReport cut = cut_cycles(pg.graph);
  Weight tv = cut.pull_back(pg.weight.positive_part());
  Subtree whole = Subtree::whole(cut.tree);
  GraphPoint tree_root =
      cut.cut_count == 0 && pg.root.is_vertex()
          ? GraphPoint::at_vertex(cut.tree.vertex_index(pg.graph.vertex_id(pg.root.vertex())))
          : boundary_points(whole).front();
  Partition part = partition_subtree(whole, SubtreeFn::sqrt_measure_mass(tv), c.n, tree_root);

  // report in the coordinates of the input graph
  Partition mapped = part;
  mapped.pieces.clear();
  for (const PuncturedSubtree& p : part.pieces)
    mapped.pieces.push_back({cut.map_piece(p.piece), cut.to_graph(p.puncture)});
  write_report(c, "partition.json", json_to_string(partition_report(mapped, pg.graph)));
  const double cert = part.certificate + 1e-9 * part.phi_total;
  std::cout << "k " << part.achieved_k() << " <= n " << c.n << ", max phi_tilde "
            << format_double(part.max_phi_tilde()) << " <= certificate "
            << format_double(part.certificate) << "\n";
  return (part.achieved_k() <= c.n && part.max_phi_tilde() <= cert) ? 0 : 1;
}

int cmd_approx(const Common& c) {
  ParsedGraph pg = load_graph(c);
  ApproxReport rep = approx_bound_check(pg.graph, pg.weight.positive_part(), c.n,
                                        c.trials, c.seed);
  std::cout << "trials " << rep.trials << ", max ratio " << format_double(rep.max_ratio)
            << ", violations " << rep.violations << "\n";
  return rep.violations == 0 ? 0 : 1;
}

int cmd_sharpness(const Common& c, double width, double min_ratio) {
  SharpnessReport rep = sharpness_search(1.0, width);
  std::vector<double> dir = dirichlet_interval_ratios(1.0, 5, c.h);
  nlohmann::json j;
  j["width"] = width;
  j["lambda1"] = rep.lambda1;
  j["ratio"] = rep.ratio;
  j["dirichlet_ratios"] = dir;
  write_report(c, "sharpness.json", json_to_string(j));
  bool dir_ok = true;
  for (double r : dir)
    if (r > 1.0 + 1e-9) dir_ok = false;
  std::cout << "bump ratio " << format_double(rep.ratio) << " (want >= " << min_ratio
            << "), dirichlet ratios <= 1: " << (dir_ok ? "yes" : "no") << "\n";
  return rep.ratio >= min_ratio && dir_ok ? 0 : 1;
}

int cmd_snumbers(const Common& c) {
  ParsedGraph pg = load_graph(c);
  SNumberReport rep = snumbers_halfinv(pg.graph, pg.weight, pg.root, c.h);
  nlohmann::json j;
  j["s"] = rep.s;
  j["violations"] = rep.violations;
  j["worst_margin"] = rep.worst_margin;
  write_report(c, "snumbers.json", json_to_string(j));
  std::cout << "resolved " << rep.s.size() << ", worst margin "
            << format_double(rep.worst_margin) << ", violations " << rep.violations << "\n";
  return rep.violations == 0 ? 0 : 1;
}

int cmd_kernel(const Common& c) {
  ParsedGraph pg = load_graph(c);
  KernelSpec spec = fs::exists(c.kernel) ? KernelSpec::from_sample_file(c.kernel)
                                         : KernelSpec::expression(c.kernel);
  KernelReport rep = check_kernel_bounds(spec, pg.graph, pg.root, c.h);
  write_report(c, "kernel.json", json_to_string(kernel_report_json(rep)));
  std::cout << "series " << format_double(rep.series_total) << ", margins: sum "
            << format_double(rep.margin_weighted_sum) << ", individual "
            << format_double(rep.margin_individual) << ", violations " << rep.violations
            << "\n";
  return rep.violations == 0 ? 0 : 1;
}

int cmd_suite(const Common& c, const std::string& name) {
  SuiteResult res = run_suite(name, c.trials, c.seed);
  write_report(c, "suite_" + name + ".json", json_to_string(res.to_json()));
  for (std::size_t i = 0; i < res.failures.size(); ++i)
    write_report(c, "violation_" + name + "_" + std::to_string(i) + ".json",
                 json_to_string(res.failures[i]));
  std::cout << "suite " << name << ": trials " << res.trials << ", violations "
            << res.violations << ", worst margin " << format_double(res.worst_margin) << "\n";
  return res.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"metric-spectra: weighted eigenvalue problems on metric graphs"};
  app.set_help_flag("--help", "print help");  // frees -h for the mesh spacing flag
  app.require_subcommand(1);

  Common c;
  app.add_option("--graph", c.graph_path, "graph file (JSON)");
  app.add_option("--weight", c.weight_path, "weight override file (JSON, weights section)");
  app.add_option("--h", c.h, "target mesh spacing");
  app.add_option("--n", c.n, "partition piece budget");
  app.add_option("--nmax", c.n_max, "number of eigenvalues to check");
  app.add_option("--trials", c.trials, "randomized trial count");
  app.add_option("--seed", c.seed, "master seed (METRIC_SPECTRA_SEED overrides)");
  app.add_option("--out", c.out_dir, "report output directory");
  app.add_option("--tol", c.tol, "acceptance tolerance for ratio checks");
  app.add_option("--kernel", c.kernel, "kernel expression or sample file path");
  double width = 0.01, min_ratio = 0.95;
  app.add_option("--width", width, "bump width for the sharpness experiment");
  app.add_option("--min-ratio", min_ratio, "required bump ratio");

  auto* validate_cmd = app.add_subcommand("validate", "parse and validate a graph file");
  auto* spectrum_cmd = app.add_subcommand("spectrum", "solve and report the weighted spectrum");
  auto* bounds_cmd = app.add_subcommand("bounds", "check the eigenvalue bound on one instance");
  auto* weyl_cmd = app.add_subcommand("weyl", "counting-ratio check on a refinement ladder");
  auto* partition_cmd = app.add_subcommand("partition", "balanced tree partition with certificate");
  auto* approx_cmd = app.add_subcommand("approx", "step-approximation bound on one instance");
  auto* sharp_cmd = app.add_subcommand("sharpness", "concentrated-weight tightness experiment");
  auto* snum_cmd = app.add_subcommand("snumbers", "half-inverse singular number bound");
  auto* kernel_cmd = app.add_subcommand("kernel", "integral-kernel s-number series bounds");
  auto* suite_cmd = app.add_subcommand("suite", "randomized acceptance suites");
  std::string suite_name;
  suite_cmd->add_option("name", suite_name,
                        "bounds|partition|approx|super|snumbers|cycles|scaling")
      ->required();

  for (CLI::App* sub : app.get_subcommands({}))
    sub->fallthrough();  // shared flags may follow the subcommand name

  try {
    app.parse(argc, argv);
    apply_env_seed(c);
    if (validate_cmd->parsed()) return cmd_validate(c);
    if (spectrum_cmd->parsed()) return cmd_spectrum(c);
    if (bounds_cmd->parsed()) return cmd_bounds(c);
    if (weyl_cmd->parsed()) return cmd_weyl(c);
    if (partition_cmd->parsed()) return cmd_partition(c);
    if (approx_cmd->parsed()) return cmd_approx(c);
    if (sharp_cmd->parsed()) return cmd_sharpness(c, width, min_ratio);
    if (snum_cmd->parsed()) return cmd_snumbers(c);
    if (kernel_cmd->parsed()) return cmd_kernel(c);
    if (suite_cmd->parsed()) return cmd_suite(c, suite_name);
    return 2;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
