#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "volterra/error.hpp"
#include "volterra/operators.hpp"
#include "volterra/weights.hpp"

using namespace volterra;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Domain half_line(const char* tau, const char* lam_hi = "x") {
  const Box omega{{0.0}, {kInf}};
  Domain d;
  d.omega = omega;
  d.exhaustion = Exhaustion({parse("0")}, {parse("n")}, omega);
  d.region = Region({parse("0")}, {parse(lam_hi)}, omega);
  d.tau = TauMap(parse(tau), 1);
  return d;
}

// e^{-L tau(x)} int_0^x e^{L tau(y)} dy by composite Simpson on a fine mesh.
double simpson_phi(const std::function<double(double)>& tau, double L, double x, int panels = 20000) {
  if (x <= 0.0) return 0.0;
  const double h = x / panels;
  double s = 0.0;
  for (int i = 0; i <= panels; ++i) {
    const double y = i * h;
    const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * std::exp(L * (tau(y) - tau(x)));
  }
  return s * h / 3.0;
}

std::string with_phi(std::string_view text, const char* phi) {
  Config cfg = Config::parse(text);
  cfg.set("outer", "phi", {phi});
  return cfg.dump();
}

}  // namespace

TEST_SUITE("weights") {
  TEST_CASE("phi examples") {
    const Domain d = half_line("x");
    CHECK(std::fabs(phi(10.0, parse("1"), 1, d, 1.0 / 512.0) - (1.0 - std::exp(-10.0)) / 10.0) < 1e-4);
    CHECK(std::fabs(phi(10.0, parse("1"), 1, d, 1.0 / 512.0) - 0.0999546) < 1e-4);
    CHECK(phi(3.0, parse("0"), 1, d, 1.0 / 64.0) == 0.0);
    CHECK(phi(1.0, parse("1"), 1, half_line("1"), 1.0 / 64.0) == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("phi is exact for affine tau and constant zeta") {
    const Domain d = half_line("2*x + 1");
    for (double L : {0.5, 3.0, 40.0, 1000.0, 1e5}) {
      const double expect = -std::expm1(-2.0 * L * 1.0) / (2.0 * L);
      CHECK(phi(L, parse("1"), 1, d, 1.0 / 32.0) == doctest::Approx(expect).epsilon(1e-12));
    }
  }

  TEST_CASE("phi against a Simpson oracle for curved tau") {
    const Domain d = half_line("x + sin(3*x)/4 + 1");
    auto tau = [](double y) { return y + std::sin(3.0 * y) / 4.0 + 1.0; };
    const GridDesc grid = d.grid(2, 1.0 / 256.0);
    for (double L : {1.0, 8.0, 64.0}) {
      double oracle = 0.0;
      std::vector<double> x(1);
      for (std::size_t node = 0; node < grid.size(); node += 8) {
        grid.point(node, x);
        oracle = std::max(oracle, simpson_phi(tau, L, x[0]));
      }
      CHECK(phi(L, parse("1"), 2, d, 1.0 / 256.0) == doctest::Approx(oracle).epsilon(2e-3));
    }
  }

  TEST_CASE("negative weight functions are rejected") {
    CHECK_THROWS_AS(phi(1.0, parse("x - 0.5"), 1, half_line("x"), 1.0 / 16.0), NegativeWeightFunction);
  }

  TEST_CASE("select_L examples") {
    const Domain d = half_line("x");
    const double L = select_L(0.05, parse("1"), 1, d, 1.0 / 256.0);
    CHECK(L <= 32.0);
    CHECK(phi(L, parse("1"), 1, d, 1.0 / 256.0) <= 0.05);
    CHECK(L == doctest::Approx(20.0).epsilon(1e-3));  // (1 - e^{-L})/L = 0.05 at L ~ 20
    CHECK(select_L(10.0, parse("1"), 1, d, 1.0 / 256.0) == 1.0);
    CHECK(select_L(kInf, parse("1"), 1, d, 1.0 / 256.0) == 1.0);
    CHECK_THROWS_AS(select_L(0.05, parse("1"), 1, half_line("1"), 1.0 / 64.0), WeightSelectionFailed);
  }

  TEST_CASE("check_boundary_condition examples") {
    const int n_max = 20;
    std::vector<double> R(n_max, 3.0);
    std::vector<double> a(n_max);
    for (int n = 1; n <= n_max; ++n) a[n - 1] = n;
    const BoundaryConditionReport lin = check_boundary_condition(R, parse("0.25*x"), a, n_max);
    CHECK(lin.pass);
    CHECK(lin.window_lo == 10);
    CHECK(lin.window_hi == 20);
    CHECK(lin.d[19] == doctest::Approx(0.75 * 20 - 3.0));

    const auto spec = fixtures::nonlinear(1, 1.0 / 64.0);
    const int m = 8;
    std::vector<double> an(m);
    for (int n = 1; n <= m; ++n) an[n - 1] = 2.0 * n;  // k = 2 > lambda e^{-1}/(lambda - 1)
    CHECK(check_boundary_condition(boundary_offsets(spec, m), spec.outer.phi, an, m).pass);

    std::vector<double> bounded(n_max, 5.0);
    const BoundaryConditionReport bad = check_boundary_condition(R, parse("x"), bounded, n_max);
    CHECK_FALSE(bad.pass);
    CHECK(bad.window_min == doctest::Approx(-3.0));
    CHECK_THROWS_AS(check_boundary_condition(std::vector<double>(3, 0.0), parse("x"), bounded, n_max), LengthMismatch);
  }

  TEST_CASE("boundary offsets for the nonlinear example") {
    const auto spec = fixtures::nonlinear(1, 1.0 / 256.0);
    const auto off = boundary_offsets(spec, 3);
    // sup over (-n, n) of |t e^{-(1+t^2)} + ln 2|; the first term peaks at t = 1/sqrt(2).
    const double peak = std::exp(-1.5) / std::sqrt(2.0) + std::log(2.0);
    CHECK(off[0] == doctest::Approx(peak).epsilon(1e-4));
    CHECK(off[0] <= peak + 1e-15);
    CHECK(off[2] == doctest::Approx(peak).epsilon(1e-4));
  }

  TEST_CASE("build_schedule examples") {
    const auto spec = fixtures::spec_from(with_phi(builtin::second_kind, "0.5*x"), {{"h", "0.0625"}});
    const WeightSchedule s = build_schedule(spec, 5);
    CHECK(s.N == 1);
    REQUIRE(s.rows.size() == 5);
    for (const auto& r : s.rows) {
      CHECK(std::isfinite(r.L));
      CHECK(r.L > 0.0);
      CHECK(r.Lhat > 0.0);
      CHECK(r.k > 0.0);
      CHECK(r.k < 1.0);
      CHECK(r.r >= r.a);
    }
    for (std::size_t i = 1; i < s.rows.size(); ++i) {
      CHECK(s.rows[i].L >= s.rows[i - 1].L);
      CHECK(s.rows[i].Lhat >= s.rows[i - 1].Lhat);
    }

    Config zero = Config::parse(builtin::second_kind);
    zero.set("F", "f", {"0"});
    zero.set("F", "b", {"0"});
    zero.set("F", "eta", {"0"});
    zero.set("solve", "h", {"0.0625"});
    const WeightSchedule z = build_schedule(make_spec(zero), 3);
    for (const auto& r : z.rows) {
      CHECK(r.L == 1.0);
      CHECK(r.Lhat == 1.0);
      CHECK(r.k == 0.5);
    }

    Config no_kernel = Config::parse(builtin::second_kind);
    no_kernel.set("kernel", "k", {"0"});
    no_kernel.set("solve", "h", {"0.0625"});
    const WeightSchedule nk = build_schedule(make_spec(no_kernel), 2);
    for (const auto& r : nk.rows) {
      CHECK(r.sup_K == 0.0);
      CHECK(r.L == 1.0);
    }
  }

  TEST_CASE("boundary failure is reported") {
    Config cfg = Config::parse(builtin::second_kind);
    cfg.set("outer", "phi", {"x"});
    cfg.set("solve", "h", {"0.0625"});
    CHECK_THROWS_AS(build_schedule(make_spec(cfg), 3), BoundaryConditionFailed);
  }

  TEST_CASE("bielecki_norm examples") {
    const Domain d = half_line("x");
    const GridDesc grid = d.grid(2, 1.0 / 64.0);
    CHECK(bielecki_norm(GridFunction(grid, 1, 1.0), 0.0, d.tau) == 1.0);
    CHECK(bielecki_norm(GridFunction(grid, 1, 0.0), 3.0, d.tau) == 0.0);
    const GridFunction e = fixtures::sample(grid, [](auto x) { return std::exp(2.5 * x[0]); });
    CHECK(bielecki_norm(e, 2.5, d.tau) == doctest::Approx(1.0).epsilon(1e-15));
    GridFunction vec(grid, 2, 0.0);
    vec.at(3, 0) = 3.0;
    vec.at(3, 1) = 4.0;
    CHECK(sup_norm(vec) == 5.0);
  }

  TEST_CASE("psi examples") {
    WeightSchedule s;
    s.N = 1;
    ScheduleRow r;
    r.n = 1;
    r.k = 0.4;
    s.rows.push_back(r);
    CHECK(psi(1, 1.0, s, parse("x/2")) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(psi(1, 0.0, s, parse("x/2")) == 0.0);
    const double v = psi(1, 2.0, s, parse("arctan(0.5*x)"));
    CHECK(v == doctest::Approx(std::atan(1.0) + 0.8).epsilon(1e-15));
    CHECK(v < 2.0);
  }

  TEST_CASE("monotone vanishing of phi on the nonlinear example domain") {
    const auto spec = fixtures::nonlinear(1, 1.0 / 256.0);
    const PhiEvaluator ev(spec.domain, spec.domain.grid(1, 1.0 / 256.0), spec.F.b);
    double prev = kInf;
    for (int k = 0; k <= 10; ++k) {
      const double v = ev(std::ldexp(1.0, k));
      CHECK(v <= prev);
      prev = v;
    }
    const PhiEvaluator unit(spec.domain, spec.domain.grid(1, 1.0 / 256.0), parse("1"));
    CHECK(unit(1024.0) < 1e-3);
    CHECK(prev < 1e-3);
  }

  TEST_CASE("norm sandwich on random grid functions") {
    std::mt19937_64 rng(61);
    for (const auto& spec : {fixtures::second_kind(3, 1.0 / 64.0), fixtures::nonlinear(1, 1.0 / 64.0)}) {
      const WeightSchedule s = build_schedule(spec, spec.n);
      const ScheduleRow& row = s.at(spec.n);
      const GridDesc grid = spec.grid();
      for (int i = 0; i < 100; ++i) {
        const GridFunction u = fixtures::random_function(grid, 1, rng, -10.0, 10.0);
        const double weighted = bielecki_norm(u, row.L, spec.domain.tau);
        const double plain = sup_norm(u);
        CHECK(weighted <= plain + 1e-12);
        CHECK(plain <= std::exp(row.L * row.sup_tau) * weighted * (1.0 + 1e-12));
      }
    }
  }

  TEST_CASE("psi contracts on (0, r_n]") {
    for (const auto& spec : {fixtures::second_kind(3, 1.0 / 64.0), fixtures::nonlinear(2, 1.0 / 64.0)}) {
      const WeightSchedule s = build_schedule(spec, spec.n);
      for (const auto& row : s.rows) {
        // r_n overflows to inf once L_n sup tau passes ~709.
        const double top = std::isfinite(row.r) ? row.r : std::numeric_limits<double>::max();
        for (int i = 0; i < 1000; ++i) {
          const double x = std::min(std::exp(std::log(1e-9) + (std::log(top) - std::log(1e-9)) * (i + 1) / 1000.0), top);
          CHECK(psi(row.n, x, s, spec.outer.phi) < x);
        }
      }
    }
  }

  TEST_CASE("invariance estimate holds for built schedules") {
    for (const auto& spec : {fixtures::second_kind(3, 1.0 / 64.0), fixtures::nonlinear(2, 1.0 / 64.0)}) {
      const WeightSchedule s = build_schedule(spec, spec.n);
      const auto offsets = boundary_offsets(spec, spec.n);
      const CompiledExpr phi_fun(spec.outer.phi, modulus_scope());
      for (const auto& row : s.rows) {
        const double lhs = phi_fun(std::span<const double>(&row.a, 1)) + offsets[row.n - 1] +
                           row.sup_K * row.phi_b * (1.0 + row.a);
        CHECK(lhs <= row.a);
        CHECK(4.0 * row.sup_K * row.phi_eta < row.k);
      }
    }
  }

  TEST_CASE("schedule csv round trip") {
    const auto spec = fixtures::second_kind(3, 1.0 / 64.0);
    const WeightSchedule s = build_schedule(spec, 3);
    std::stringstream buf;
    write_schedule_csv(buf, s);
    const WeightSchedule back = read_schedule_csv(buf);
    REQUIRE(back.rows.size() == s.rows.size());
    CHECK(back.N == s.N);
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
      CHECK(back.rows[i].L == s.rows[i].L);
      CHECK(back.rows[i].k == s.rows[i].k);
      CHECK(back.rows[i].r == s.rows[i].r);
    }
    std::stringstream bad("n,L\n1,2\n");
    CHECK_THROWS_AS(read_schedule_csv(bad), Error);
  }
}
