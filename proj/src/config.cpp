#include "degel/config.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace degel {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

struct Item {
  std::string value;
  int line;
};

using RawMap = std::map<std::string, Item>;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "problem.dimension", "problem.shape", "problem.topology", "problem.warp",
      "problem.a_tensor", "problem.eta", "problem.psi", "problem.phi",
      "operator.family", "operator.k", "operator.l",
      "solve.tol_residual", "solve.max_newton", "solve.cone_margin_floor",
      "solve.backtrack", "solve.min_step",
      "continuation.eps0", "continuation.ratio", "continuation.levels",
      "continuation.degenerate",
      "subsolution.base_expr", "subsolution.delta0", "subsolution.a_cap",
      "manufactured.u_star", "manufactured.grids",
      "diagnose.collar",
      "output.dir",
      "lemma.n_min", "lemma.n_max", "lemma.count", "lemma.seed"};
  return keys;
}

RawMap parse_raw(const std::string& text) {
  RawMap raw;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(2, lineno, "malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty()) throw ConfigError(2, lineno, "empty section name");
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(2, lineno, "expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError(2, lineno, "empty key");
    if (section.empty()) throw ConfigError(2, lineno, "key outside any [section]");
    const std::string full = section + "." + key;
    if (!known_keys().count(full))
      throw ConfigError(2, lineno, "unknown key '" + full + "'");
    raw[full] = {value, lineno};
  }
  return raw;
}

class Reader {
 public:
  explicit Reader(RawMap raw) : raw_(std::move(raw)) {}

  bool has(const std::string& key) const { return raw_.count(key) > 0; }
  const Item* find(const std::string& key) const {
    auto it = raw_.find(key);
    return it == raw_.end() ? nullptr : &it->second;
  }

  std::string str(const std::string& key, const std::string& dflt) const {
    const Item* it = find(key);
    return it ? it->value : dflt;
  }

  double num(const std::string& key, double dflt) const {
    const Item* it = find(key);
    if (!it) return dflt;
    try {
      std::size_t used = 0;
      const double v = std::stod(it->value, &used);
      if (used != it->value.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      throw ConfigError(2, it->line, "malformed number for " + key);
    }
  }

  long integer(const std::string& key, long dflt) const {
    const Item* it = find(key);
    if (!it) return dflt;
    try {
      std::size_t used = 0;
      const long v = std::stol(it->value, &used);
      if (used != it->value.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      throw ConfigError(2, it->line, "malformed integer for " + key);
    }
  }

  std::vector<int> int_list(const std::string& key, std::vector<int> dflt) const {
    const Item* it = find(key);
    if (!it) return dflt;
    std::vector<int> out;
    std::istringstream ss(it->value);
    int v;
    while (ss >> v) out.push_back(v);
    if (out.empty() || !ss.eof())
      throw ConfigError(2, it->line, "malformed integer list for " + key);
    return out;
  }

  Expression expr(const std::string& key, int n, const std::string& dflt) const {
    const Item* it = find(key);
    const std::string text = it ? it->value : dflt;
    const int line = it ? it->line : 0;
    try {
      return Expression::parse(text, n);
    } catch (const ExprError& e) {
      throw ConfigError(2, line, std::string("expression error in ") + key + ": " +
                                     e.what());
    }
  }

  int line_of(const std::string& key) const {
    const Item* it = find(key);
    return it ? it->line : 0;
  }

 private:
  RawMap raw_;
};

std::vector<Expression> parse_expr_list(const std::string& value, int n, int line,
                                        const std::string& key) {
  std::vector<Expression> out;
  std::stringstream ss(value);
  std::string piece;
  while (std::getline(ss, piece, ';')) {
    piece = trim(piece);
    if (piece.empty()) continue;
    try {
      out.push_back(Expression::parse(piece, n));
    } catch (const ExprError& e) {
      throw ConfigError(2, line, std::string("expression error in ") + key + ": " +
                                     e.what());
    }
  }
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& text,
                       const std::vector<std::string>& overrides) {
  RawMap raw = parse_raw(text);
  for (const std::string& ov : overrides) {
    const std::size_t eq = ov.find('=');
    if (eq == std::string::npos)
      throw ConfigError(2, 0, "override must be section.key=value: " + ov);
    const std::string key = trim(ov.substr(0, eq));
    if (!known_keys().count(key))
      throw ConfigError(2, 0, "unknown key '" + key + "'");
    raw[key] = {trim(ov.substr(eq + 1)), 0};
  }
  Reader r(std::move(raw));

  RunConfig cfg;
  cfg.dimension = static_cast<int>(r.integer("problem.dimension", 3));
  if (cfg.dimension < 3)
    throw ConfigError(3, r.line_of("problem.dimension"), "dimension must be >= 3");
  const int n = cfg.dimension;

  cfg.shape = r.int_list("problem.shape", std::vector<int>(n, 17));
  if (static_cast<int>(cfg.shape.size()) == 1)
    cfg.shape.assign(n, cfg.shape[0]);
  if (static_cast<int>(cfg.shape.size()) != n)
    throw ConfigError(3, r.line_of("problem.shape"),
                      "shape needs one extent per axis");
  for (int s : cfg.shape)
    if (s < 5)
      throw ConfigError(3, r.line_of("problem.shape"), "each axis needs >= 5 nodes");

  const std::string topo = r.str("problem.topology", "slab");
  if (topo == "slab")
    cfg.topology = Topology::slab;
  else if (topo == "box")
    cfg.topology = Topology::box;
  else
    throw ConfigError(3, r.line_of("problem.topology"), "topology must be slab or box");

  cfg.warp = r.expr("problem.warp", n, "0");
  cfg.psi = r.expr("problem.psi", n, "1");
  cfg.phi = r.expr("problem.phi", n, "0");

  {
    const std::string a = r.str("problem.a_tensor", "zero");
    const int line = r.line_of("problem.a_tensor");
    if (a == "zero") {
      cfg.a_kind = ATensorKind::zero;
    } else if (a.rfind("scale_g:", 0) == 0) {
      cfg.a_kind = ATensorKind::scale_g;
      try {
        cfg.a_scale = Expression::parse(trim(a.substr(8)), n);
      } catch (const ExprError& e) {
        throw ConfigError(2, line, std::string("a_tensor expression: ") + e.what());
      }
    } else if (a.rfind("diag:", 0) == 0) {
      cfg.a_kind = ATensorKind::diag;
      cfg.a_diag = parse_expr_list(a.substr(5), n, line, "problem.a_tensor");
      if (static_cast<int>(cfg.a_diag.size()) != n)
        throw ConfigError(3, line, "a_tensor diag needs n expressions");
    } else {
      throw ConfigError(3, line, "a_tensor must be zero, scale_g:<expr> or diag:<e1;..>");
    }
  }

  {
    const std::string e = r.str("problem.eta", "zero");
    const int line = r.line_of("problem.eta");
    if (e == "zero") {
      cfg.eta_kind = EtaKind::zero;
    } else if (e.rfind("zeta:", 0) == 0) {
      cfg.eta_kind = EtaKind::zeta;
      cfg.eta_zeta = parse_expr_list(e.substr(5), n, line, "problem.eta");
      if (static_cast<int>(cfg.eta_zeta.size()) != n)
        throw ConfigError(3, line, "eta zeta needs n expressions");
    } else {
      throw ConfigError(3, line, "eta must be zero or zeta:<e1;..>");
    }
  }

  {
    const std::string fam = r.str("operator.family", "sigma_k_root");
    const int k = static_cast<int>(r.integer("operator.k", n));
    const int l = static_cast<int>(r.integer("operator.l", 1));
    const int line = r.line_of("operator.family");
    try {
      if (fam == "sigma_k_root")
        cfg.f = SpectralFunction::sigma_root(n, k);
      else if (fam == "log_sigma_n")
        cfg.f = SpectralFunction::log_sigma(n);
      else if (fam == "quotient_root")
        cfg.f = SpectralFunction::quotient(n, k, l);
      else
        throw ConfigError(3, line, "unknown operator family '" + fam + "'");
    } catch (const std::invalid_argument& e) {
      throw ConfigError(3, line, e.what());
    }
  }

  cfg.solve.tol_residual = r.num("solve.tol_residual", 1e-10);
  cfg.solve.max_newton = static_cast<int>(r.integer("solve.max_newton", 60));
  cfg.solve.cone_margin_floor = r.num("solve.cone_margin_floor", 1e-10);
  cfg.solve.line_search.backtrack = r.num("solve.backtrack", 0.5);
  cfg.solve.line_search.min_step = r.num("solve.min_step", 1e-10);
  if (!(cfg.solve.cone_margin_floor > 0.0))
    throw ConfigError(3, r.line_of("solve.cone_margin_floor"),
                      "cone_margin_floor must be positive");

  cfg.solve.continuation.eps0 = r.num("continuation.eps0", 0.5);
  cfg.solve.continuation.ratio = r.num("continuation.ratio", 0.5);
  cfg.solve.continuation.levels = static_cast<int>(r.integer("continuation.levels", 8));
  if (!(cfg.solve.continuation.eps0 > 0.0))
    throw ConfigError(3, r.line_of("continuation.eps0"), "eps0 must be positive");
  if (!(cfg.solve.continuation.ratio > 0.0 && cfg.solve.continuation.ratio < 1.0))
    throw ConfigError(3, r.line_of("continuation.ratio"), "ratio must be in (0,1)");
  cfg.degenerate_continuation = r.str("continuation.degenerate", "true") == "true";

  if (cfg.degenerate_continuation && !cfg.f.finite_boundary_sup())
    throw ConfigError(3, r.line_of("operator.family"),
                      "degenerate continuation requires finite sup_{dGamma} f; "
                      "log_sigma_n has sup = -inf");

  if (r.has("subsolution.base_expr"))
    cfg.base_expr = r.expr("subsolution.base_expr", n, "0");
  if (r.has("subsolution.delta0")) cfg.delta0 = r.num("subsolution.delta0", 0.0);
  cfg.A_cap = r.num("subsolution.a_cap", 1e12);

  if (r.has("manufactured.u_star"))
    cfg.u_star = r.expr("manufactured.u_star", n, "0");
  cfg.conv_grids = r.int_list("manufactured.grids", {9, 17, 33});

  cfg.collar_widths = r.num("diagnose.collar", 5.0);
  cfg.out_dir = r.str("output.dir", "out");

  cfg.lemma_n_min = static_cast<int>(r.integer("lemma.n_min", 3));
  cfg.lemma_n_max = static_cast<int>(r.integer("lemma.n_max", 8));
  cfg.lemma_count = static_cast<int>(r.integer("lemma.count", 10000));
  cfg.lemma_seed = static_cast<std::uint64_t>(r.integer("lemma.seed", 7));
  if (cfg.lemma_n_min < 3 || cfg.lemma_n_max < cfg.lemma_n_min)
    throw ConfigError(3, r.line_of("lemma.n_min"), "lemma dimensions need 3 <= n_min <= n_max");

  return cfg;
}

}  // namespace degel
