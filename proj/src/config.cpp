#include "volterra/config.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "volterra/error.hpp"

namespace volterra {

namespace {

const std::map<std::string, std::set<std::string>, std::less<>>& known_keys() {
  static const std::map<std::string, std::set<std::string>, std::less<>> keys = {
      {"domain",
       {"dim", "omega_lower", "omega_upper", "exhaust_lower", "exhaust_upper", "lambda_lower", "lambda_upper", "tau"}},
      {"kernel", {"k"}},
      {"F", {"components", "f", "h1", "h2", "b", "eta"}},
      {"outer", {"form", "g", "G_lower", "G_upper", "phi", "theta", "vartheta"}},
      {"goursat", {"u0"}},
      {"solve", {"n", "h", "h_weights", "tol_fix", "max_iter", "strategy", "a_n"}},
  };
  return keys;
}

const std::vector<std::string>& section_order() {
  static const std::vector<std::string> order = {"domain", "kernel", "F", "outer", "goursat", "solve"};
  return order;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool is_trace_key(std::string_view key) {
  if (key.rfind("trace_", 0) != 0 || key.size() == 6) return false;
  for (char c : key.substr(6)) {
    if (c != '0' && c != '1') return false;
  }
  return true;
}

std::vector<std::string> parse_values(const std::string& text, const std::string& section, const std::string& key,
                                      std::size_t line) {
  std::vector<std::string> out;
  if (text.empty()) throw ConfigError(section, key, line, "missing value");
  if (text.front() != '"') {
    const auto hash = text.find_first_of("#;");
    const std::string bare = trim(std::string_view(text).substr(0, hash));
    if (bare.empty()) throw ConfigError(section, key, line, "missing value");
    out.push_back(bare);
    return out;
  }
  std::size_t i = 0;
  for (;;) {
    if (i >= text.size() || text[i] != '"') throw ConfigError(section, key, line, "expected a quoted string");
    const auto close = text.find('"', i + 1);
    if (close == std::string::npos) throw ConfigError(section, key, line, "unterminated quoted string");
    out.push_back(text.substr(i + 1, close - i - 1));
    i = close + 1;
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    if (i == text.size() || text[i] == '#' || text[i] == ';') return out;
    if (text[i] != ',') throw ConfigError(section, key, line, "expected ',' between quoted values");
    ++i;
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
  }
}

class Reader {
 public:
  explicit Reader(const Config& cfg) : cfg_(cfg) {}

  const Config::Entry& require(const std::string& section, const std::string& key) const {
    if (!cfg_.has_section(section)) throw ConfigError(section, "", 0, "missing section");
    const auto* e = cfg_.find(section, key);
    if (!e) throw ConfigError(section, key, 0, "missing key");
    return *e;
  }

  const Config::Entry* optional(const std::string& section, const std::string& key) const {
    return cfg_.find(section, key);
  }

  std::vector<Expr> exprs(const std::string& section, const std::string& key, const Config::Entry& e,
                          const Scope& scope, std::size_t count) const {
    if (e.values.size() != count) {
      throw ConfigError(section, key, e.line,
                        "expected " + std::to_string(count) + " value(s), got " + std::to_string(e.values.size()));
    }
    std::vector<Expr> out;
    for (const auto& text : e.values) out.push_back(expr(section, key, e.line, text, scope));
    return out;
  }

  Expr expr(const std::string& section, const std::string& key, std::size_t line, const std::string& text,
            const Scope& scope) const {
    try {
      Expr e = parse(text);
      CompiledExpr check(e, scope);
      return e;
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& err) {
      throw ConfigError(section, key, line, "'" + text + "': " + err.what());
    }
  }

  Expr single(const std::string& section, const std::string& key, const Scope& scope) const {
    const auto& e = require(section, key);
    return exprs(section, key, e, scope, 1).front();
  }

  double number(const std::string& section, const std::string& key, const Config::Entry& e) const {
    if (e.values.size() != 1) throw ConfigError(section, key, e.line, "expected a single value");
    return constant(section, key, e.line, e.values[0]);
  }

  double constant(const std::string& section, const std::string& key, std::size_t line, const std::string& text) const {
    const std::string t = trim(text);
    if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
    if (t == "-inf") return -std::numeric_limits<double>::infinity();
    const Expr e = expr(section, key, line, t, Scope());
    try {
      return e.eval({});
    } catch (const Error& err) {
      throw ConfigError(section, key, line, err.what());
    }
  }

  int integer(const std::string& section, const std::string& key, const Config::Entry& e) const {
    const double v = number(section, key, e);
    if (v != std::floor(v) || std::fabs(v) > 1e9) throw ConfigError(section, key, e.line, "expected an integer");
    return static_cast<int>(v);
  }

 private:
  const Config& cfg_;
};

std::string quote(const std::vector<std::string>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) s += (i ? ", \"" : "\"") + values[i] + "\"";
  return s;
}

}  // namespace

Config Config::parse(std::string_view text) {
  Config cfg;
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("", "", line_no, "malformed section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!known_keys().contains(section)) throw ConfigError(section, "", line_no, "unknown section");
      cfg.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(section, "", line_no, "expected 'key = value'");
    if (section.empty()) throw ConfigError("", "", line_no, "key outside of any section");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const auto& allowed = known_keys().find(section)->second;
    if (!allowed.contains(key) && !(section == "goursat" && is_trace_key(key))) {
      throw ConfigError(section, key, line_no, "unknown key");
    }
    auto& keys = cfg.sections_[section];
    if (keys.contains(key)) throw ConfigError(section, key, line_no, "duplicate key");
    keys[key] = Entry{parse_values(value, section, key, line_no), line_no};
  }
  return cfg;
}

bool Config::has_section(std::string_view section) const { return sections_.find(section) != sections_.end(); }

const Config::Entry* Config::find(std::string_view section, std::string_view key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return nullptr;
  const auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

void Config::set(const std::string& section, const std::string& key, std::vector<std::string> values) {
  sections_[section][key] = Entry{std::move(values), 0};
}

void Config::erase(const std::string& section, const std::string& key) {
  const auto s = sections_.find(section);
  if (s != sections_.end()) s->second.erase(key);
}

std::vector<std::string> Config::keys(std::string_view section) const {
  std::vector<std::string> out;
  const auto s = sections_.find(section);
  if (s == sections_.end()) return out;
  for (const auto& [k, e] : s->second) out.push_back(k);
  return out;
}

std::string Config::dump() const {
  std::string out;
  for (const auto& name : section_order()) {
    const auto s = sections_.find(name);
    if (s == sections_.end()) continue;
    if (!out.empty()) out += "\n";
    out += "[" + name + "]\n";
    for (const auto& [key, entry] : s->second) out += key + " = " + quote(entry.values) + "\n";
  }
  return out;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "", 0, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return Config::parse(ss.str());
}

OuterMap goursat_outer(const std::map<std::string, Expr>& traces, double u0, std::size_t dim) {
  if (dim < 2) throw Error("Goursat data need dimension N >= 2");
  const std::size_t faces = std::size_t{1} << dim;
  auto bits_of = [&](std::size_t mask) {
    std::string s(dim, '0');
    for (std::size_t i = 0; i < dim; ++i) s[i] = (mask >> i) & 1 ? '1' : '0';
    return s;
  };
  for (const auto& [key, e] : traces) {
    if (key.size() != dim || key == std::string(dim, '0') || key == std::string(dim, '1')) {
      throw Error("trace_" + key + " does not name a boundary face of a " + std::to_string(dim) + "-dimensional quadrant");
    }
  }
  auto trace = [&](std::size_t mask) {
    const auto it = traces.find(bits_of(mask));
    return it == traces.end() ? Expr::number(0.0) : it->second;
  };
  // Value of u on face `mask`, the trace evaluated with the zero coordinates set.
  auto on_face = [&](std::size_t mask) {
    std::map<std::string, Expr, std::less<>> zeros;
    for (std::size_t i = 0; i < dim; ++i) {
      if (!((mask >> i) & 1)) zeros["x" + std::to_string(i + 1)] = Expr::number(0.0);
    }
    return trace(mask).substitute(zeros);
  };

  const Scope scope = point_scope(dim);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coord(0.0, 2.0);
  for (std::size_t s = 1; s + 1 < faces; ++s) {
    const CompiledExpr us(on_face(s), scope);
    for (std::size_t r = s; r > 0;) {
      r = (r - 1) & s;  // proper sub-faces of s, down to the origin
      const CompiledExpr ur(on_face(r), scope);
      for (int k = 0; k < 16; ++k) {
        std::vector<double> x(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i) x[i] = (r >> i) & 1 ? coord(rng) : 0.0;
        const double a = us(x);
        const double b = r == 0 ? u0 : ur(x);
        if (std::fabs(a - b) > 1e-9 * std::max(1.0, std::fabs(b))) {
          std::string where;
          for (std::size_t i = 0; i < dim; ++i) where += (i ? ", " : "") + format_shortest(x[i]);
          throw IncompatibleTraces("trace_" + bits_of(s) + " = " + format_shortest(a) + " but " +
                                   (r == 0 ? std::string("u0") : "trace_" + bits_of(r)) + " = " +
                                   format_shortest(b) + " at (" + where + ")");
        }
      }
      if (r == 0) break;
    }
  }

  Expr g = Expr::number((dim + 1) % 2 == 0 ? u0 : -u0);
  for (std::size_t s = 1; s + 1 < faces; ++s) {
    const std::size_t zeros = dim - static_cast<std::size_t>(std::popcount(s));
    const Expr term = on_face(s);
    g = Expr::binary((zeros + 1) % 2 == 0 ? '+' : '-', g, term);
  }
  OuterMap outer;
  outer.form = Form::single;
  outer.g = {g};
  outer.phi = Expr::number(0.0);
  return outer;
}

ProblemSpec make_spec(const Config& cfg) {
  const Reader rd(cfg);
  ProblemSpec spec;
  const bool goursat = cfg.has_section("goursat");

  const int dim_i = rd.integer("domain", "dim", rd.require("domain", "dim"));
  if (dim_i < 1) throw ConfigError("domain", "dim", rd.require("domain", "dim").line, "dim must be >= 1");
  const auto N = static_cast<std::size_t>(dim_i);
  const Scope points = point_scope(N);

  Box omega{std::vector<double>(N), std::vector<double>(N)};
  for (const char* key : {"omega_lower", "omega_upper"}) {
    const auto& e = rd.require("domain", key);
    if (e.values.size() != N) throw ConfigError("domain", key, e.line, "expected " + std::to_string(N) + " bounds");
    for (std::size_t i = 0; i < N; ++i) {
      (key[6] == 'l' ? omega.lower : omega.upper)[i] = rd.constant("domain", key, e.line, e.values[i]);
    }
  }
  for (std::size_t i = 0; i < N; ++i) {
    if (!(omega.lower[i] < omega.upper[i])) {
      throw ConfigError("domain", "omega_upper", rd.require("domain", "omega_upper").line, "empty domain");
    }
  }

  const auto* ex_lo = rd.optional("domain", "exhaust_lower");
  const auto* ex_hi = rd.optional("domain", "exhaust_upper");
  if (ex_lo && ex_hi) {
    const Scope ns({"n"});
    spec.domain.exhaustion = Exhaustion(rd.exprs("domain", "exhaust_lower", *ex_lo, ns, N),
                                        rd.exprs("domain", "exhaust_upper", *ex_hi, ns, N), omega);
  } else if (ex_lo || ex_hi) {
    throw ConfigError("domain", ex_lo ? "exhaust_upper" : "exhaust_lower", (ex_lo ? ex_lo : ex_hi)->line,
                      "exhaust_lower and exhaust_upper go together");
  } else {
    spec.domain.exhaustion = Exhaustion::standard(omega);
  }

  std::vector<Expr> lam_lo;
  std::vector<Expr> lam_hi;
  const auto* l_lo = rd.optional("domain", "lambda_lower");
  const auto* l_hi = rd.optional("domain", "lambda_upper");
  if (l_lo || l_hi || !goursat) {
    lam_lo = rd.exprs("domain", "lambda_lower", l_lo ? *l_lo : rd.require("domain", "lambda_lower"), points, N);
    lam_hi = rd.exprs("domain", "lambda_upper", l_hi ? *l_hi : rd.require("domain", "lambda_upper"), points, N);
  } else {
    for (std::size_t i = 0; i < N; ++i) {
      lam_lo.push_back(Expr::number(0.0));
      lam_hi.push_back(Expr::variable("x" + std::to_string(i + 1)));
    }
  }
  spec.domain.omega = omega;
  spec.domain.region = Region(lam_lo, lam_hi, omega);
  spec.domain.tau = TauMap(rd.single("domain", "tau", points), N);

  std::size_t M = 1;
  if (const auto* e = rd.optional("F", "components")) {
    const int m = rd.integer("F", "components", *e);
    if (m < 1) throw ConfigError("F", "components", e->line, "components must be >= 1");
    M = static_cast<std::size_t>(m);
  }
  spec.components = M;

  if (const auto* e = rd.optional("kernel", "k")) {
    spec.kernel = rd.exprs("kernel", "k", *e, pair_scope(N), M * M);
  } else if (goursat) {
    for (std::size_t r = 0; r < M; ++r) {
      for (std::size_t c = 0; c < M; ++c) spec.kernel.push_back(Expr::number(r == c ? 1.0 : 0.0));
    }
  } else {
    rd.require("kernel", "k");
  }

  const Scope values = value_scope(N, M);
  if (!cfg.has_section("F")) throw ConfigError("F", "", 0, "missing section");
  if (const auto* f = rd.optional("F", "f")) {
    if (rd.optional("F", "h1") || rd.optional("F", "h2")) {
      throw ConfigError("F", "f", f->line, "give either f or the envelopes h1 and h2, not both");
    }
    spec.F.lower = rd.exprs("F", "f", *f, values, M);
    spec.F.upper = spec.F.lower;
  } else {
    spec.F.lower = rd.exprs("F", "h1", rd.require("F", "h1"), values, M);
    spec.F.upper = rd.exprs("F", "h2", rd.require("F", "h2"), values, M);
  }
  spec.F.b = rd.single("F", "b", points);
  spec.F.eta = rd.single("F", "eta", points);

  Form form = Form::single;
  if (const auto* e = rd.optional("outer", "form")) {
    const int f = rd.integer("outer", "form", *e);
    if (f != 13 && f != 21 && f != 24) throw ConfigError("outer", "form", e->line, "form must be 13, 21 or 24");
    form = static_cast<Form>(f);
  }
  const Scope mod = modulus_scope();
  if (goursat) {
    if (form != Form::single) throw ConfigError("outer", "form", 0, "Goursat data use form 13");
    if (rd.optional("outer", "g")) throw ConfigError("outer", "g", rd.optional("outer", "g")->line, "g is built from [goursat] traces");
    std::map<std::string, Expr> traces;
    for (const auto& key : cfg.keys("goursat")) {
      if (!is_trace_key(key)) continue;
      const auto* e = cfg.find("goursat", key);
      traces[key.substr(6)] = rd.exprs("goursat", key, *e, points, 1).front();
      if (key.size() - 6 != N) throw ConfigError("goursat", key, e->line, "face bit string must have length dim");
    }
    double u0 = 0.0;
    if (const auto* e = rd.optional("goursat", "u0")) u0 = rd.number("goursat", "u0", *e);
    if (M != 1) throw ConfigError("F", "components", 0, "Goursat data are scalar");
    spec.outer = goursat_outer(traces, u0, N);
    if (const auto* e = rd.optional("outer", "phi")) spec.outer.phi = rd.exprs("outer", "phi", *e, mod, 1).front();
  } else {
    spec.outer.form = form;
    const Scope outer = outer_scope(form, N, M);
    if (form == Form::set_valued) {
      spec.outer.G_lower = rd.exprs("outer", "G_lower", rd.require("outer", "G_lower"), outer, M);
      spec.outer.G_upper = rd.exprs("outer", "G_upper", rd.require("outer", "G_upper"), outer, M);
    } else {
      spec.outer.g = rd.exprs("outer", "g", rd.require("outer", "g"), outer, form == Form::composite ? 1 : M);
    }
    spec.outer.phi = rd.single("outer", "phi", mod);
  }
  if (const auto* e = rd.optional("outer", "theta")) spec.outer.theta = rd.exprs("outer", "theta", *e, mod, 1).front();
  if (const auto* e = rd.optional("outer", "vartheta")) {
    spec.outer.vartheta = rd.exprs("outer", "vartheta", *e, mod, 1).front();
  }
  if (form == Form::composite && !spec.outer.vartheta) rd.require("outer", "vartheta");

  if (const auto* e = rd.optional("solve", "n")) spec.n = rd.integer("solve", "n", *e);
  if (const auto* e = rd.optional("solve", "h")) spec.h = rd.number("solve", "h", *e);
  if (const auto* e = rd.optional("solve", "h_weights")) spec.h_weights = rd.number("solve", "h_weights", *e);
  if (const auto* e = rd.optional("solve", "tol_fix")) spec.tol_fix = rd.number("solve", "tol_fix", *e);
  if (const auto* e = rd.optional("solve", "max_iter")) spec.max_iter = rd.integer("solve", "max_iter", *e);
  if (const auto* e = rd.optional("solve", "strategy")) {
    const auto s = e->values.size() == 1 ? strategy_from_name(trim(e->values[0])) : std::nullopt;
    if (!s) throw ConfigError("solve", "strategy", e->line, "strategy must be midpoint, lower or upper");
    spec.strategy = *s;
  }
  if (const auto* e = rd.optional("solve", "a_n")) spec.a_n = rd.exprs("solve", "a_n", *e, Scope({"n"}), 1).front();

  try {
    spec.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& err) {
    throw ConfigError("", "", 0, err.what());
  }
  return spec;
}

}  // namespace volterra
