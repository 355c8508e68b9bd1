#include "volterra/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "volterra/builtin_configs.hpp"
#include "volterra/config.hpp"
#include "volterra/error.hpp"
#include "volterra/operators.hpp"
#include "volterra/parallel.hpp"
#include "volterra/solver.hpp"
#include "volterra/weights.hpp"

namespace volterra {

namespace {

struct Overrides {
  std::string config;
  std::string out;
  std::string schedule;
  std::optional<int> n;
  std::optional<double> h;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<std::string> strategy;
};

void add_overrides(CLI::App* app, Overrides& o, bool with_config) {
  if (with_config) app->add_option("--config", o.config, "problem file")->required();
  app->add_option("--n", o.n, "exhaustion index");
  app->add_option("--h", o.h, "grid step");
  app->add_option("--tol", o.tol, "Picard stopping threshold");
  app->add_option("--max-iter", o.max_iter, "iteration cap");
  app->add_option("--strategy", o.strategy, "selection: midpoint, lower or upper")
      ->check(CLI::IsMember({"midpoint", "lower", "upper"}));
}

void apply_overrides(Config& cfg, const Overrides& o) {
  if (o.n) cfg.set("solve", "n", {std::to_string(*o.n)});
  if (o.h) cfg.set("solve", "h", {format_shortest(*o.h)});
  if (o.tol) cfg.set("solve", "tol_fix", {format_shortest(*o.tol)});
  if (o.max_iter) cfg.set("solve", "max_iter", {std::to_string(*o.max_iter)});
  if (o.strategy) cfg.set("solve", "strategy", {*o.strategy});
}

class OutputFile {
 public:
  OutputFile(const std::string& path, std::ostream& fallback) {
    if (path.empty()) {
      stream_ = &fallback;
      return;
    }
    file_.open(path);
    if (!file_) throw Error("cannot write '" + path + "'");
    stream_ = &file_;
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
};

WeightSchedule schedule_for(const ProblemSpec& spec, const std::string& path) {
  if (path.empty()) return build_schedule(spec, spec.n);
  std::ifstream in(path);
  if (!in) throw Error("cannot open schedule '" + path + "'");
  return read_schedule_csv(in);
}

void write_summary(std::ostream& os, const SolveReport& rep) {
  os << "iterations: " << rep.iterations << "\n";
  os << "converged: " << (rep.converged ? "yes" : "no") << "\n";
  os << "final step: " << format_shortest(rep.sup_deltas.empty() ? 0.0 : rep.sup_deltas.back()) << "\n";
  os << "residual: " << format_shortest(rep.residual) << "\n";
  os << "quadrature tolerance: " << format_shortest(rep.quadrature_tolerance) << "\n";
  os << "observed ratio: " << format_shortest(rep.ratio) << "\n";
  os << "L_n: " << format_shortest(rep.schedule.L) << ", a_n: " << format_shortest(rep.schedule.a)
     << ", k_n: " << format_shortest(rep.schedule.k) << ", r_n: " << format_shortest(rep.schedule.r) << "\n";
  os << "note: a solution of the selected equation, hence of the inclusion\n";
}

int check_command(const ProblemSpec& spec, std::size_t samples, std::ostream& out) {
  const HypothesisReport rep = check_hypotheses(spec, spec.n, samples);
  bool pass = rep.pass;
  for (const auto& item : rep.items) {
    out << (item.pass ? "PASS " : "FAIL ") << item.name << " (" << item.checked << " checked";
    if (!item.pass) out << ", " << item.violations << " violated";
    out << ")";
    if (!item.pass && !item.witness.empty()) out << ": " << item.witness;
    out << "\n";
  }
  const int n_max = std::max(spec.n, 1);
  const std::vector<double> offsets = boundary_offsets(spec, n_max);
  const std::vector<double> a = default_a_sequence(spec, n_max);
  const Expr phi = spec.outer.form == Form::set_valued ? Expr::number(0.0) : spec.outer.phi;
  const BoundaryConditionReport b = check_boundary_condition(offsets, phi, a, n_max);
  out << (b.pass ? "PASS " : "FAIL ") << "boundary condition on a_n (n = " << b.window_lo << ".." << b.window_hi
      << ", min margin " << format_shortest(b.window_min) << ")";
  if (!b.message.empty()) out << ": " << b.message;
  out << "\n";
  pass = pass && b.pass;
  out << (pass ? "all hypotheses hold on the samples\n" : "some hypotheses fail\n");
  return pass ? 0 : 2;
}

int solve_command(const ProblemSpec& spec, const Overrides& o, std::ostream& out, std::ostream& err,
                  SolveReport* keep = nullptr) {
  const WeightSchedule sched = schedule_for(spec, o.schedule);
  SolveReport rep = picard_solve(spec, sched);
  if (!o.out.empty()) {
    OutputFile f(o.out, out);
    write_solution_csv(f.get(), rep.solution);
    write_summary(out, rep);
  } else if (!keep) {
    write_solution_csv(out, rep.solution);
    write_summary(err, rep);
  } else {
    write_summary(out, rep);
  }
  const bool ok = rep.converged;
  if (keep) *keep = std::move(rep);
  return ok ? 0 : 2;
}

std::string_view builtin_text(const std::string& name) {
  if (name == "second-kind") return builtin::second_kind;
  if (name == "nonlinear") return builtin::nonlinear;
  if (name == "goursat") return builtin::goursat;
  throw Error("unknown example '" + name + "' (expected nonlinear, second-kind or goursat)");
}

bool second_kind_golden(const GridFunction& u, std::ostream& out) {
  double worst = 0.0;
  std::vector<double> x(1);
  for (std::size_t node = 0; node < u.grid().size(); ++node) {
    u.grid().point(node, x);
    if (!(x[0] > 0.0)) continue;
    worst = std::max(worst, std::fabs(u.at(node) - std::exp(x[0])) / std::exp(x[0]));
  }
  const bool ok = worst <= 5e-4;
  out << "max relative error vs e^x: " << format_shortest(worst) << (ok ? " (ok)" : " (exceeds 5e-4)") << "\n";
  return ok;
}

bool goursat_golden(const ProblemSpec& spec, const GridFunction& u, std::ostream& out) {
  const GridDesc& grid = u.grid();
  bool ok = true;
  const Scope values = value_scope(spec.dim(), 1);
  const CompiledExpr f(spec.F.lower[0], values);
  std::vector<double> slots(values.size(), 0.0);
  if (f.is_constant() && spec.dim() == 2) {
    const CompiledExpr g(spec.outer.g[0], values);
    const double c = f(slots);
    double worst = 0.0;
    for (std::size_t node = 0; node < grid.size(); ++node) {
      grid.point(node, std::span<double>(slots.data(), 2));
      worst = std::max(worst, std::fabs(u.at(node) - g(slots) - c * slots[0] * slots[1]));
    }
    const bool pass = worst <= 1e-3;
    out << "max |u - (g + " << format_shortest(c) << " x1 x2)|: " << format_shortest(worst)
        << (pass ? " (ok)" : " (exceeds 1e-3)") << "\n";
    ok = ok && pass;
  }
  if (spec.dim() == 2 && grid.count(0) > 1 && grid.count(1) > 1) {
    const double hx = grid.step(0);
    const double hy = grid.step(1);
    double worst = 0.0;
    for (std::size_t i = 1; i < grid.count(0); ++i) {
      for (std::size_t j = 1; j < grid.count(1); ++j) {
        const std::size_t a = i * grid.stride(0) + j;
        const std::size_t b = a - grid.stride(0);
        const double mixed = (u.at(a) - u.at(a - 1) - u.at(b) + u.at(b - 1)) / (hx * hy);
        slots[0] = grid.coord(0, i) - 0.5 * hx;
        slots[1] = grid.coord(1, j) - 0.5 * hy;
        slots[2] = 0.25 * (u.at(a) + u.at(a - 1) + u.at(b) + u.at(b - 1));
        worst = std::max(worst, std::fabs(mixed - f(slots)));
      }
    }
    const bool pass = worst <= 5e-2;
    out << "max |mixed difference - f|: " << format_shortest(worst) << (pass ? " (ok)" : " (exceeds 5e-2)") << "\n";
    ok = ok && pass;
  }
  return ok;
}

int expr_eval_command(const std::string& text, const std::vector<std::string>& binds, std::ostream& out) {
  Bindings b;
  for (const auto& item : binds) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw Error("--bind expects name=value, got '" + item + "'");
    const Expr v = parse(item.substr(eq + 1));
    b[item.substr(0, eq)] = v.eval({});
  }
  out << format_shortest(parse(text).eval(b)) << "\n";
  return 0;
}

int verification_code(const Error& e) {
  if (dynamic_cast<const NonContractive*>(&e) || dynamic_cast<const BoundaryConditionFailed*>(&e) ||
      dynamic_cast<const WeightSelectionFailed*>(&e) || dynamic_cast<const IncompatibleTraces*>(&e)) {
    return 2;
  }
  return 1;
}

}  // namespace

void write_solution_csv(std::ostream& out, const GridFunction& u) {
  const GridDesc& grid = u.grid();
  const std::size_t dim = grid.dim();
  const std::size_t m = u.components();
  std::string header;
  for (std::size_t i = 0; i < dim; ++i) header += (i ? ",x" : "x") + (dim == 1 ? std::string() : std::to_string(i + 1));
  if (m == 1) {
    header += ",u";
  } else {
    for (std::size_t c = 0; c < m; ++c) header += ",u" + std::to_string(c + 1);
  }
  out << header << "\n";
  std::vector<double> x(dim);
  for (std::size_t node = 0; node < grid.size(); ++node) {
    grid.point(node, x);
    std::string line;
    for (std::size_t i = 0; i < dim; ++i) line += (i ? "," : "") + format_g17(x[i]);
    for (double v : u.value(node)) line += "," + format_g17(v);
    out << line << "\n";
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (const char* env = std::getenv("VOLTERRA_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) set_worker_count(t);
  }

  CLI::App app("Solver and hypothesis checker for nonlinear Volterra integral equations and inclusions", "volterra");
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);

  Overrides o;
  std::size_t samples = 200;
  auto* check = app.add_subcommand("check", "sample the hypotheses and the boundary condition");
  add_overrides(check, o, true);
  check->add_option("--samples", samples, "random samples per hypothesis");

  auto* weights = app.add_subcommand("weights", "print the weight schedule n = N .. n as CSV");
  add_overrides(weights, o, true);
  weights->add_option("--out", o.out, "CSV path");

  auto* solve = app.add_subcommand("solve", "run the weighted Picard iteration");
  add_overrides(solve, o, true);
  solve->add_option("--out", o.out, "solution CSV path");
  solve->add_option("--schedule", o.schedule, "weight schedule CSV from `weights`");

  std::string example_name;
  std::optional<std::string> example_f;
  bool zero_boundary = false;
  bool dump_config = false;
  auto* example = app.add_subcommand("example", "solve a built-in example and compare with its closed form");
  example->add_option("name", example_name, "nonlinear, second-kind or goursat")->required();
  add_overrides(example, o, false);
  example->add_option("--out", o.out, "solution CSV path");
  example->add_option("--f", example_f, "replace the right-hand side f");
  example->add_flag("--zero-boundary", zero_boundary, "set every Goursat trace and u0 to zero");
  example->add_flag("--dump-config", dump_config, "print the effective config and stop");

  std::string expr_text;
  std::vector<std::string> binds;
  auto* expr_eval = app.add_subcommand("expr-eval", "evaluate one expression");
  expr_eval->add_option("expr", expr_text, "expression")->required();
  expr_eval->add_option("--bind", binds, "name=value");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (expr_eval->parsed()) return expr_eval_command(expr_text, binds, out);

    Config cfg;
    if (example->parsed()) {
      cfg = Config::parse(builtin_text(example_name));
      if (example_f) {
        cfg.set("F", "f", {*example_f});
        cfg.erase("F", "h1");
        cfg.erase("F", "h2");
      }
      if (zero_boundary) {
        if (!cfg.has_section("goursat")) throw Error("--zero-boundary applies to the goursat example only");
        for (const auto& key : cfg.keys("goursat")) cfg.erase("goursat", key);
        cfg.set("goursat", "u0", {"0"});
      }
    } else {
      cfg = load_config(o.config);
    }
    apply_overrides(cfg, o);
    if (dump_config) {
      out << cfg.dump();
      return 0;
    }
    const ProblemSpec spec = make_spec(cfg);

    if (check->parsed()) return check_command(spec, samples, out);
    if (weights->parsed()) {
      const WeightSchedule s = build_schedule(spec, spec.n);
      OutputFile f(o.out, out);
      write_schedule_csv(f.get(), s);
      return 0;
    }
    if (solve->parsed()) return solve_command(spec, o, out, err);

    SolveReport rep;
    int code = solve_command(spec, o, out, err, &rep);
    bool golden = true;
    if (example_name == "second-kind" && !example_f) golden = second_kind_golden(rep.solution, out);
    if (example_name == "goursat") golden = goursat_golden(spec, rep.solution, out);
    if (example_name == "nonlinear") out << "no closed form; residual and contraction above are the check\n";
    return code != 0 ? code : (golden ? 0 : 2);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return verification_code(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace volterra
