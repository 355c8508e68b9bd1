// Wall-clock comparison of the OpenMP sweeps with their serial references.
//
//   volterra_bench [--reps N] [--threads T]

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "volterra/builtin_configs.hpp"
#include "volterra/config.hpp"
#include "volterra/parallel.hpp"
#include "volterra/sweep.hpp"

using namespace volterra;

namespace {

double best_of(int reps, const std::function<void()>& body) {
  double best = INFINITY;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    body();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const std::string& name, double serial, double parallel) {
  std::printf("%-34s %12.4f %12.4f %8.2fx\n", name.c_str(), serial * 1e3, parallel * 1e3, serial / parallel);
}

Region region(std::vector<const char*> lo, std::vector<const char*> hi, Box omega) {
  std::vector<Expr> l;
  std::vector<Expr> u;
  for (const char* t : lo) l.push_back(parse(t));
  for (const char* t : hi) u.push_back(parse(t));
  return Region(std::move(l), std::move(u), std::move(omega));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("Serial vs OpenMP sweep timings", "volterra_bench");
  int reps = 3;
  int threads = 0;
  app.add_option("--reps", reps, "repetitions, best time is reported")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "OpenMP workers (default: runtime choice)");
  CLI11_PARSE(app, argc, argv);
  if (threads > 0) set_worker_count(threads);

  std::printf("workers: %d\n", worker_count());
  std::printf("%-34s %12s %12s %9s\n", "sweep", "serial ms", "parallel ms", "speedup");

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double inf = INFINITY;

  struct Case {
    std::string name;
    Region r;
    GridDesc grid;
    std::vector<const char*> kernel;
  };
  const std::vector<Case> cases = {
      {"volterra 1-D constant, 1025 nodes", region({"0"}, {"x"}, Box{{0.0}, {inf}}), GridDesc({0.0}, {4.0}, {1025}),
       {"1"}},
      {"volterra 1-D general, 513 nodes", region({"sin(t)"}, {"abs(t)"}, Box{{-inf}, {inf}}),
       GridDesc({-2.0}, {2.0}, {513}), {"exp(t^2) * cos(s)"}},
      {"volterra 2-D x only, 65x65", region({"0", "0"}, {"x1", "x2"}, Box{{0.0, 0.0}, {inf, inf}}),
       GridDesc({0.0, 0.0}, {1.0, 1.0}, {65, 65}), {"exp(x1 - x2)"}},
      {"volterra 2-D general, 33x33", region({"0", "0"}, {"x1", "x2"}, Box{{0.0, 0.0}, {inf, inf}}),
       GridDesc({0.0, 0.0}, {1.0, 1.0}, {33, 33}), {"cos(x1*y2)"}},
  };
  for (const Case& c : cases) {
    std::vector<Expr> k;
    for (const char* t : c.kernel) k.push_back(parse(t));
    const Kernel kernel(k, c.grid.dim(), 1);
    GridFunction w(c.grid, 1);
    for (double& v : w.data()) v = unit(rng);
    const VolterraPlan plan = make_volterra_plan(c.r, c.grid, 1e-9);
    const double ser = best_of(reps, [&] { (void)volterra_sweep_serial(kernel, c.r, w, 1e-9); });
    const double par = best_of(reps, [&] { (void)volterra_sweep(kernel, plan, w); });
    row(c.name, ser, par);
  }

  for (const auto& [name, text] : {std::pair{"phi second-kind, n = 3", builtin::second_kind},
                                   std::pair{"phi nonlinear, n = 3", builtin::nonlinear}}) {
    Config cfg = Config::parse(text);
    cfg.set("solve", "n", {"3"});
    const ProblemSpec spec = make_spec(cfg);
    const PhiTables t = make_phi_tables(spec.domain, spec.domain.grid(3, 1.0 / 256.0), parse("1 + x^2"), 1e-9);
    const std::vector<double> ladder{1.0, 16.0, 256.0, 4096.0};
    const double ser = best_of(reps, [&] {
      for (double L : ladder) (void)phi_sweep_serial(t, L);
    });
    const double par = best_of(reps, [&] {
      for (double L : ladder) (void)phi_sweep(t, L);
    });
    row(name, ser, par);
  }
  return 0;
}
