#include "metric_spectra/kernels.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "metric_spectra/common.hpp"

namespace mspec {

using linalg::Matrix;

// ---------------------------------------------------------------------------
// Expression grammar

struct KernelExpr::Node {
  enum Kind { Num, VarX, VarY, Add, Sub, Mul, Pow, Neg, Sin, Cos, Exp, Min, Abs } kind;
  double num = 0.0;
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const KernelExpr::Node>;
using Kind = KernelExpr::Node::Kind;

NodePtr make_node(Kind k, NodePtr a = nullptr, NodePtr b = nullptr, double num = 0.0) {
  auto n = std::make_shared<KernelExpr::Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  n->num = num;
  return n;
}

NodePtr make_num(double v) { return make_node(Kind::Num, nullptr, nullptr, v); }

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) fail("trailing input");
    return e;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) {
    throw ConfigError("kernel expression, position " + std::to_string(pos_) + ": " + what);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr e = term();
    for (;;) {
      if (eat('+'))
        e = make_node(Kind::Add, e, term());
      else if (eat('-'))
        e = make_node(Kind::Sub, e, term());
      else
        return e;
    }
  }

  NodePtr term() {
    NodePtr e = factor();
    for (;;) {
      if (eat('*'))
        e = make_node(Kind::Mul, e, factor());
      else
        return e;
    }
  }

  NodePtr factor() {
    NodePtr base = atom();
    if (eat('^')) {
      NodePtr e = factor();  // right associative
      if (e->kind != Kind::Num) fail("exponent must be a constant");
      return make_node(Kind::Pow, base, e);
    }
    return base;
  }

  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (c == '-') {
      ++pos_;
      return make_node(Kind::Neg, atom());
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = std::stod(s_.substr(pos_), &used);
      pos_ += used;
      return make_num(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t e = pos_;
      while (e < s_.size() && std::isalnum(static_cast<unsigned char>(s_[e]))) ++e;
      const std::string name = s_.substr(pos_, e - pos_);
      pos_ = e;
      if (name == "x") return make_node(Kind::VarX);
      if (name == "y") return make_node(Kind::VarY);
      if (name == "pi") return make_num(std::numbers::pi);
      auto unary = [&](Kind k) {
        if (!eat('(')) fail("expected '(' after " + name);
        NodePtr arg = expr();
        if (!eat(')')) fail("expected ')'");
        return make_node(k, arg);
      };
      if (name == "sin") return unary(Kind::Sin);
      if (name == "cos") return unary(Kind::Cos);
      if (name == "exp") return unary(Kind::Exp);
      if (name == "abs") return unary(Kind::Abs);
      if (name == "min") {
        if (!eat('(')) fail("expected '(' after min");
        NodePtr a = expr();
        if (!eat(',')) fail("expected ',' in min");
        NodePtr b = expr();
        if (!eat(')')) fail("expected ')'");
        return make_node(Kind::Min, a, b);
      }
      fail("unknown identifier '" + name + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

double eval_node(const KernelExpr::Node* n, double x, double y) {
  switch (n->kind) {
    case Kind::Num: return n->num;
    case Kind::VarX: return x;
    case Kind::VarY: return y;
    case Kind::Add: return eval_node(n->a.get(), x, y) + eval_node(n->b.get(), x, y);
    case Kind::Sub: return eval_node(n->a.get(), x, y) - eval_node(n->b.get(), x, y);
    case Kind::Mul: return eval_node(n->a.get(), x, y) * eval_node(n->b.get(), x, y);
    case Kind::Pow: return std::pow(eval_node(n->a.get(), x, y), n->b->num);
    case Kind::Neg: return -eval_node(n->a.get(), x, y);
    case Kind::Sin: return std::sin(eval_node(n->a.get(), x, y));
    case Kind::Cos: return std::cos(eval_node(n->a.get(), x, y));
    case Kind::Exp: return std::exp(eval_node(n->a.get(), x, y));
    case Kind::Min: return std::min(eval_node(n->a.get(), x, y), eval_node(n->b.get(), x, y));
    case Kind::Abs: {
      if (n->b) {  // derivative marker from diff_x: evaluates as sgn(a) * b
        const double u = eval_node(n->a.get(), x, y);
        return (u >= 0.0 ? 1.0 : -1.0) * eval_node(n->b.get(), x, y);
      }
      return std::abs(eval_node(n->a.get(), x, y));
    }
  }
  return 0.0;
}

NodePtr diff_x(const NodePtr& n) {
  switch (n->kind) {
    case Kind::Num:
    case Kind::VarY: return make_num(0.0);
    case Kind::VarX: return make_num(1.0);
    case Kind::Add: return make_node(Kind::Add, diff_x(n->a), diff_x(n->b));
    case Kind::Sub: return make_node(Kind::Sub, diff_x(n->a), diff_x(n->b));
    case Kind::Mul:
      return make_node(Kind::Add, make_node(Kind::Mul, diff_x(n->a), n->b),
                       make_node(Kind::Mul, n->a, diff_x(n->b)));
    case Kind::Pow: {
      // d/dx u^c = c u^(c-1) u'
      const double c = n->b->num;
      return make_node(Kind::Mul, make_num(c),
                       make_node(Kind::Mul, make_node(Kind::Pow, n->a, make_num(c - 1.0)),
                                 diff_x(n->a)));
    }
    case Kind::Neg: return make_node(Kind::Neg, diff_x(n->a));
    case Kind::Sin: return make_node(Kind::Mul, make_node(Kind::Cos, n->a), diff_x(n->a));
    case Kind::Cos:
      return make_node(Kind::Neg, make_node(Kind::Mul, make_node(Kind::Sin, n->a), diff_x(n->a)));
    case Kind::Exp: return make_node(Kind::Mul, make_node(Kind::Exp, n->a), diff_x(n->a));
    case Kind::Min: {
      // a.e. derivative via min(a,b) = (a + b - |a-b|)/2
      NodePtr diff_ab = make_node(Kind::Sub, n->a, n->b);
      return make_node(
          Kind::Mul, make_num(0.5),
          make_node(Kind::Sub, make_node(Kind::Add, diff_x(n->a), diff_x(n->b)),
                    diff_x(make_node(Kind::Abs, diff_ab))));
    }
    case Kind::Abs:
      // d|u| = sgn(u) u', realized at evaluation time: an Abs node with a
      // non-null b evaluates as sgn(a) * b
      return make_node(Kind::Abs, n->a, diff_x(n->a));
  }
  return make_num(0.0);
}

}  // namespace

KernelExpr KernelExpr::parse(const std::string& text) {
  KernelExpr e;
  e.root_ = Parser(text).parse();
  e.text_ = text;
  return e;
}

double KernelExpr::eval(double x, double y) const { return eval_node(root_.get(), x, y); }

KernelExpr KernelExpr::derivative_x() const {
  KernelExpr e;
  e.root_ = diff_x(root_);
  e.text_ = "d/dx(" + text_ + ")";
  return e;
}

// ---------------------------------------------------------------------------
// KernelSpec

KernelSpec KernelSpec::expression(const std::string& text) {
  KernelSpec k;
  k.expr_ = KernelExpr::parse(text);
  return k;
}

KernelSpec KernelSpec::sampled(Matrix values, std::uint64_t mesh_hash) {
  KernelSpec k;
  k.samples_ = std::move(values);
  k.sample_mesh_hash_ = mesh_hash;
  return k;
}

KernelSpec KernelSpec::from_sample_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open kernel sample file: " + path);
  std::string header;
  std::getline(in, header);
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(header);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("kernel sample file header: ") + e.what());
  }
  const int rows = h.value("rows", 0), cols = h.value("cols", 0);
  if (rows <= 0 || cols <= 0) throw ConfigError("kernel sample file: bad dimensions");
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      if (!(in >> m(i, j))) throw ConfigError("kernel sample file: not enough numbers");
  return sampled(std::move(m), h.value("mesh_hash", std::uint64_t(0)));
}

// ---------------------------------------------------------------------------

KernelGrid kernel_grid(const Mesh& mesh) {
  KernelGrid grid;
  for (const Mesh::NodeInfo& n : mesh.nodes()) {
    grid.where.push_back(n.where);
    grid.weight.push_back(n.quad_weight);
    grid.coord.push_back(n.where.is_vertex() ? 0.0 : n.where.offset());
  }
  // vertex nodes: use the offset on their smallest incident edge
  const MetricGraph& g = mesh.graph();
  for (std::size_t i = 0; i < grid.where.size(); ++i) {
    const GraphPoint& p = grid.where[i];
    if (!p.is_vertex()) continue;
    const int e = g.incident(p.vertex())[0];
    grid.coord[i] = (g.edge(e).from == p.vertex()) ? 0.0 : g.edge(e).length;
  }
  return grid;
}

Matrix sample_kernel(const KernelSpec& k, const Mesh& mesh, linalg::Exec exec) {
  if (!k.is_expression()) {
    if (k.samples().rows() != mesh.dof_count() || k.samples().cols() != mesh.dof_count())
      throw ConfigError("sampled kernel does not match the mesh size");
    if (k.sample_mesh_hash() != 0 && k.sample_mesh_hash() != mesh.signature())
      throw ConfigError("sampled kernel was taken on a different mesh (hash mismatch)");
    return k.samples();
  }
  const KernelGrid grid = kernel_grid(mesh);
  const int n = int(grid.coord.size());
  Matrix m(n, n);
  const KernelExpr& expr = k.expr();
#pragma omp parallel for schedule(static) if (exec == linalg::Exec::Parallel && n > 64)
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = expr.eval(grid.coord[i], grid.coord[j]);
  return m;
}

namespace {

// int int f^2 with trapezoid weights
double quad_double_integral_sq(const Matrix& f, const std::vector<double>& w) {
  double s = 0.0;
  for (int i = 0; i < f.rows(); ++i) {
    double row = 0.0;
    for (int j = 0; j < f.cols(); ++j) row += w[j] * f(i, j) * f(i, j);
    s += w[i] * row;
  }
  return s;
}

// derivative of sampled data along each edge chain by divided differences
// with stride `stride` (1 or 2), central where possible
Matrix sampled_derivative(const Matrix& k, const Mesh& mesh, int stride) {
  Matrix d(k.rows(), k.cols());
  const MetricGraph& g = mesh.graph();
  for (int e = 0; e < g.edge_count(); ++e) {
    const auto& nodes = mesh.edge_nodes(e);
    const int m = int(nodes.size());
    std::vector<int> dof(m);
    for (int i = 0; i < m; ++i)
      dof[i] = mesh.dof_at(GraphPoint::on_edge(g, e, nodes[i]));
    for (int i = 0; i < m; ++i) {
      const int lo = std::max(0, i - stride), hi = std::min(m - 1, i + stride);
      if (hi == lo) continue;
      const double dt = nodes[hi] - nodes[lo];
      for (int j = 0; j < k.cols(); ++j)
        d(dof[i], j) = (k(dof[hi], j) - k(dof[lo], j)) / dt;
    }
  }
  return d;
}

}  // namespace

MFunctional m_functional(const KernelSpec& k, const MetricGraph& g, const Mesh& mesh,
                         linalg::Exec exec) {
  const KernelGrid grid = kernel_grid(mesh);
  const Matrix km = sample_kernel(k, mesh, exec);
  MFunctional out;
  out.value_part = quad_double_integral_sq(km, grid.weight);

  Matrix dm(km.rows(), km.cols());
  if (k.is_expression()) {
    const KernelExpr dk = k.expr().derivative_x();
    const int n = int(grid.coord.size());
#pragma omp parallel for schedule(static) if (exec == linalg::Exec::Parallel && n > 64)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) dm(i, j) = dk.eval(grid.coord[i], grid.coord[j]);
  } else {
    dm = sampled_derivative(km, mesh, 1);
    const Matrix d2 = sampled_derivative(km, mesh, 2);
    const double i1 = quad_double_integral_sq(dm, grid.weight);
    const double i2 = quad_double_integral_sq(d2, grid.weight);
    const double denom = std::max(std::abs(i1), 1e-300);
    if (std::abs(i1 - i2) / denom > 1e-3 && std::abs(i1 - i2) > 1e-12)
      throw ConfigError("m_functional: finite-difference derivative unstable (steps disagree by " +
                        format_double(std::abs(i1 - i2) / denom) + ")");
  }
  out.derivative_part = quad_double_integral_sq(dm, grid.weight);
  const double len = g.total_length();
  out.m = out.value_part + len * len * out.derivative_part;
  return out;
}

std::vector<double> singular_values(const KernelSpec& k, const MetricGraph& g, const Mesh& mesh,
                                    linalg::Exec exec) {
  (void)g;
  const KernelGrid grid = kernel_grid(mesh);
  Matrix m = sample_kernel(k, mesh, exec);
  const int n = m.rows();
  std::vector<double> sq(n);
  for (int i = 0; i < n; ++i) sq[i] = std::sqrt(grid.weight[i]);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) *= sq[i] * sq[j];
  Matrix gram = linalg::matmul_at_a(m, exec);
  linalg::SymEigen eig = linalg::sym_eigen(std::move(gram), false, exec);
  std::vector<double> s;
  for (std::size_t i = eig.values.size(); i-- > 0;)
    s.push_back(std::sqrt(std::max(eig.values[i], 0.0)));
  return s;  // descending
}

KernelReport check_kernel_bounds(const KernelSpec& k, const MetricGraph& g,
                                 const GraphPoint& root, double h, linalg::Exec exec) {
  Mesh mesh = build_mesh(g, Weight::zero(g), root, h);
  KernelReport rep;
  rep.s = singular_values(k, g, mesh, exec);
  rep.m = m_functional(k, g, mesh, exec);

  const double len = g.total_length();
  const double s1 = rep.s.empty() ? 0.0 : rep.s.front();

  // vanishing-at-root detection: max |K(x0, y)| over sampled y
  {
    const KernelGrid grid = kernel_grid(mesh);
    const Matrix km = sample_kernel(k, mesh, exec);
    const int rd = mesh.dof_at(root);
    if (rd < 0) throw ConfigError("check_kernel_bounds: root is not a mesh node");
    double mx = 0.0, overall = 0.0;
    for (int j = 0; j < km.cols(); ++j) {
      mx = std::max(mx, std::abs(km(rd, j)));
      for (int i = 0; i < km.rows(); ++i) overall = std::max(overall, std::abs(km(i, j)));
    }
    rep.vanishes_at_root = mx <= 1e-12 * std::max(overall, 1.0);
  }

  // resolved range: values above the noise floor
  const double noise = std::max(s1 * 1e-13, 1e-300);
  int resolved = 0;
  while (resolved < int(rep.s.size()) && rep.s[resolved] > noise) ++resolved;
  rep.truncation = std::min(resolved, std::max(1, mesh.dof_count() / 4));

  for (int n = 1; n <= resolved; ++n) {
    const double term = double(n) * double(n) * rep.s[n - 1] * rep.s[n - 1];
    rep.series_total += term;
    if (n <= rep.truncation) rep.head += term;
  }
  rep.tail_beyond_head = rep.series_total - rep.head;

  // qualitative decay: s_n n^{3/2} decreasing over the trustworthy head
  // (indices past the truncation are mesh-limited, not kernel-limited)
  for (int n = 1; 2 * n <= rep.truncation; ++n) {
    if (rep.s[2 * n - 1] < s1 * 1e-8) break;
    const double t1 = rep.s[n - 1] * std::pow(double(n), 1.5);
    const double t2 = rep.s[2 * n - 1] * std::pow(2.0 * n, 1.5);
    if (t2 > t1 * (1.0 + 1e-9)) rep.decay_ok = false;
  }

  const double rhs_sum = 32.0 * len * len * rep.m.m;
  rep.margin_weighted_sum = rhs_sum > 0.0 ? (rhs_sum - rep.series_total) / rhs_sum
                                          : (rep.series_total <= 1e-12 ? 0.0 : -1.0);
  if (rep.series_total > rhs_sum * (1.0 + 1e-9)) ++rep.violations;
  rep.best_constant_observed = len > 0.0 && rep.m.m > 0.0
                                   ? rep.series_total / (len * len * rep.m.m)
                                   : 0.0;

  if (rep.vanishes_at_root) {
    const double rhs_ref = 8.0 * len * len * rep.m.derivative_part;
    rep.margin_refined = rhs_ref > 0.0 ? (rhs_ref - rep.series_total) / rhs_ref
                                       : (rep.series_total <= 1e-12 ? 0.0 : -1.0);
    if (rep.series_total > rhs_ref * (1.0 + 1e-9)) ++rep.violations;
  }

  rep.margin_individual = std::numeric_limits<double>::infinity();
  const double c_ind = std::sqrt(96.0) * std::sqrt(std::max(rep.m.m, 0.0));
  for (int n = 1; n <= resolved; ++n) {
    const double rhs = c_ind / std::pow(double(n), 1.5);
    if (rhs <= 0.0) continue;
    const double margin = (rhs - rep.s[n - 1]) / rhs;
    rep.margin_individual = std::min(rep.margin_individual, margin);
    if (rep.s[n - 1] > rhs * (1.0 + 1e-9)) ++rep.violations;
  }
  if (resolved == 0) rep.margin_individual = 0.0;
  return rep;
}

}  // namespace mspec
