#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "volterra/error.hpp"
#include "volterra/operators.hpp"

using namespace volterra;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Region half_line_region(const char* lo, const char* hi) {
  return Region({parse(lo)}, {parse(hi)}, Box{{0.0}, {kInf}});
}

Kernel scalar_kernel(const char* k) { return Kernel({parse(k)}, 1, 1); }

double apply_at(const Kernel& k, const Region& r, const GridFunction& w, double x) {
  return volterra_apply(k, r, w, std::span<const double>(&x, 1))[0];
}

MultiMapF interval_F(const char* lo, const char* hi) {
  return MultiMapF{{parse(lo)}, {parse(hi)}, parse("1"), parse("1")};
}

constexpr const char* kForm13 = R"(
[domain]
dim = 1
omega_lower = "0"
omega_upper = "inf"
exhaust_lower = "0"
exhaust_upper = "n"
lambda_lower = "0"
lambda_upper = "x"
tau = "x"
[kernel]
k = "1"
[F]
f = "u"
b = "1"
eta = "1"
[outer]
g = "3"
phi = "0"
[solve]
n = 2
h = 0.0625
)";

constexpr const char* kForm24 = R"(
[domain]
dim = 1
omega_lower = "0"
omega_upper = "inf"
exhaust_lower = "0"
exhaust_upper = "n"
lambda_lower = "0"
lambda_upper = "x"
tau = "x"
[kernel]
k = "1"
[F]
h1 = "0"
h2 = "0"
b = "1"
eta = "1"
[outer]
form = 24
G_lower = "u - 1"
G_upper = "u + 1"
phi = "x/2"
[solve]
n = 2
h = 0.0625
)";

}  // namespace

TEST_SUITE("operators") {
  TEST_CASE("volterra_apply examples") {
    const GridDesc grid({0.0}, {4.0}, {65});
    const Region r = half_line_region("0", "x");
    const Kernel one = scalar_kernel("1");
    CHECK(apply_at(one, r, GridFunction(grid, 1, 1.0), 2.0) == doctest::Approx(2.0).epsilon(1e-15));
    const GridFunction y = fixtures::sample(grid, [](auto x) { return x[0]; });
    CHECK(apply_at(one, r, y, 2.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(apply_at(one, r, y, 0.0) == 0.0);

    const GridDesc line({-4.0}, {4.0}, {129});
    const Region line_region({parse("sin(t)")}, {parse("abs(t)")}, Box{{-kInf}, {kInf}});
    const double pi = std::numbers::pi;
    const double got = apply_at(scalar_kernel("exp(t^2)"), line_region, GridFunction(line, 1, 1.0), pi);
    CHECK(got == doctest::Approx(pi * std::exp(pi * pi)).epsilon(1e-12));
  }

  TEST_CASE("grid coverage and kernel errors") {
    const GridDesc grid({0.0}, {1.0}, {17});
    CHECK_THROWS_AS(apply_at(scalar_kernel("1"), half_line_region("0", "2*x"), GridFunction(grid, 1, 1.0), 1.0),
                    GridCoverage);
    CHECK_THROWS_AS(apply_at(scalar_kernel("exp(1000*y)"), half_line_region("0", "x"), GridFunction(grid, 1, 1.0), 1.0),
                    KernelEval);
  }

  TEST_CASE("linearity on random instances") {
    std::mt19937_64 rng(41);
    const GridDesc grid({-1.0, 0.0}, {1.0, 2.0}, {17, 21});
    const Box omega{{-kInf, -kInf}, {kInf, kInf}};
    const Region r({parse("-abs(x1)"), parse("0")}, {parse("x1^2"), parse("x2")}, omega);
    const Kernel k({parse("cos(x1*y2) + y1"), parse("x2"), parse("1"), parse("exp(-y1^2)")}, 2, 2);
    for (int i = 0; i < 50; ++i) {
      const GridFunction w1 = fixtures::random_function(grid, 2, rng, -3.0, 3.0);
      const GridFunction w2 = fixtures::random_function(grid, 2, rng, -3.0, 3.0);
      const double alpha = fixtures::uniform(rng, -2.0, 2.0);
      GridFunction mix(grid, 2);
      for (std::size_t j = 0; j < mix.data().size(); ++j) mix.data()[j] = alpha * w1.data()[j] + w2.data()[j];
      const double x[2] = {fixtures::uniform(rng, -1.0, 1.0), fixtures::uniform(rng, 0.0, 2.0)};
      const auto a = volterra_apply(k, r, mix, x);
      const auto b1 = volterra_apply(k, r, w1, x);
      const auto b2 = volterra_apply(k, r, w2, x);
      for (int c = 0; c < 2; ++c) CHECK(std::fabs(a[c] - (alpha * b1[c] + b2[c])) <= 1e-12 * (1.0 + std::fabs(a[c])));
    }
  }

  TEST_CASE("quadrature is second order") {
    const Region r = half_line_region("0", "x");
    const Kernel one = scalar_kernel("1");
    const double x = 1.7;  // not a node: exercises the fractional end cell
    double prev = 0.0;
    for (int level = 0; level < 5; ++level) {
      const std::size_t cells = std::size_t{16} << level;
      const GridDesc grid({0.0}, {2.0}, {cells + 1});
      const GridFunction w = fixtures::sample(grid, [](auto y) { return y[0] * y[0]; });
      const double err = std::fabs(apply_at(one, r, w, x) - x * x * x / 3.0);
      if (level > 0) {
        const double ratio = prev / err;
        CHECK(ratio >= 3.5);
        CHECK(ratio <= 4.5);
      }
      prev = err;
    }
  }

  TEST_CASE("nemytskii_select examples and containment") {
    const GridDesc grid({0.0}, {1.0}, {33});
    std::mt19937_64 rng(43);
    const GridFunction u = fixtures::random_function(grid, 1, rng, -5.0, 5.0);
    const MultiMapF F = interval_F("u - 1", "u + 1");
    const GridFunction mid = nemytskii_select(F, u, Strategy::midpoint);
    const GridFunction lo = nemytskii_select(F, u, Strategy::lower);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(mid.at(i) == u.at(i));
      CHECK(lo.at(i) == u.at(i) - 1.0);
    }
    const MultiMapF single = interval_F("cos(u) + 2", "cos(u) + 2");
    CHECK(single.singleton());
    for (Strategy s : {Strategy::midpoint, Strategy::lower, Strategy::upper}) {
      const GridFunction w = nemytskii_select(single, u, s);
      for (std::size_t i = 0; i < grid.size(); ++i) CHECK(w.at(i) == std::cos(u.at(i)) + 2.0);
    }
    const MultiMapF wide = interval_F("sin(x) - u^2", "sin(x) + abs(u) + x");
    for (Strategy s : {Strategy::midpoint, Strategy::lower, Strategy::upper}) {
      const GridFunction w = nemytskii_select(wide, u, s);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.coord(0, i);
        CHECK(w.at(i) >= std::sin(x) - u.at(i) * u.at(i));
        CHECK(w.at(i) <= std::sin(x) + std::fabs(u.at(i)) + x);
      }
    }
    CHECK_THROWS_AS(nemytskii_select(interval_F("u + 1", "u"), u, Strategy::midpoint), InvalidMultimap);
  }

  TEST_CASE("H_apply examples") {
    const ProblemSpec a = fixtures::spec_from(kForm13);
    const GridDesc grid = a.grid();
    const GridFunction v = H_apply(a, GridFunction(grid, 1, 1.0));
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(v.at(i) == doctest::Approx(3.0 + grid.coord(0, i)));

    const ProblemSpec e52 = fixtures::second_kind(3, 1.0 / 64.0);
    const GridFunction v52 = H_apply(e52, GridFunction(e52.grid(), 1, 1.0));
    for (std::size_t i = 0; i < v52.grid().size(); ++i) {
      CHECK(v52.at(i) == doctest::Approx(1.0 + v52.grid().coord(0, i)));
    }

    const ProblemSpec g24 = fixtures::spec_from(kForm24);
    const GridFunction s = H_apply(g24, GridFunction(g24.grid(), 1, 4.0));
    for (std::size_t i = 0; i < s.grid().size(); ++i) CHECK(s.at(i) == 0.0);
  }

  TEST_CASE("form 24 output lies in the G interval") {
    Config cfg = Config::parse(kForm24);
    cfg.set("F", "h1", {"u - 1"});
    cfg.set("F", "h2", {"u + 2*x"});
    cfg.set("outer", "G_lower", {"sin(x) + u/2"});
    cfg.set("outer", "G_upper", {"sin(x) + u/2 + 1 + x"});
    const ProblemSpec spec = make_spec(cfg);
    const Operator op(spec, spec.grid());
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 10; ++trial) {
      const GridFunction u = fixtures::random_function(op.grid(), 1, rng, -2.0, 2.0);
      const GridFunction v = op.volterra(op.select(u, spec.strategy));
      const GridFunction out = op.apply(u);
      for (std::size_t i = 0; i < out.grid().size(); ++i) {
        const double x = out.grid().coord(0, i);
        const double lo = std::sin(x) + v.at(i) / 2.0;
        CHECK(out.at(i) >= lo - 1e-9);
        CHECK(out.at(i) <= lo + 1.0 + x + 1e-9);
      }
    }
  }

  TEST_CASE("sup_kernel_norm examples") {
    const GridDesc grid({0.0}, {2.0}, {33});
    CHECK(sup_kernel_norm(scalar_kernel("1"), half_line_region("0", "x"), grid) == 1.0);

    const GridDesc line({-1.0}, {1.0}, {257});
    const Region line_region({parse("sin(t)")}, {parse("abs(t)")}, Box{{-kInf}, {kInf}});
    CHECK(sup_kernel_norm(scalar_kernel("exp(t^2)"), line_region, line) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));

    const Kernel three({parse("3"), parse("0"), parse("0"), parse("3")}, 1, 2);
    CHECK(sup_kernel_norm(three, half_line_region("0", "x"), grid) == doctest::Approx(3.0).epsilon(1e-14));
  }

  TEST_CASE("matrix norm") {
    const double rot[4] = {0.0, -2.0, 2.0, 0.0};
    CHECK(matrix_norm(rot, 2) == doctest::Approx(2.0).epsilon(1e-12));
    const double upper[4] = {1.0, 1.0, 0.0, 1.0};
    CHECK(matrix_norm(upper, 2) == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-12));
    const double scalar[1] = {-4.0};
    CHECK(matrix_norm(scalar, 1) == 4.0);
  }

  TEST_CASE("check_hypotheses examples") {
    const HypothesisReport ok = check_hypotheses(fixtures::nonlinear(1, 1.0 / 64.0), 1, 200);
    CHECK(ok.pass);
    for (const auto& item : ok.items) CHECK_MESSAGE(item.pass, item.name << ": " << item.witness);

    Config doubled = Config::parse(kForm13);
    doubled.set("outer", "g", {"2*u"});
    doubled.set("outer", "phi", {"x"});
    const HypothesisReport bad = check_hypotheses(make_spec(doubled), 2, 100);
    CHECK_FALSE(bad.pass);
    bool saw = false;
    for (const auto& item : bad.items) {
      if (item.name == "outer map modulus") {
        saw = true;
        CHECK_FALSE(item.pass);
        CHECK(item.violations > 0);
        CHECK(item.witness.find("u = ") != std::string::npos);
      }
    }
    CHECK(saw);

    Config no_growth = Config::parse(builtin::nonlinear);
    no_growth.set("F", "b", {"0"});
    const HypothesisReport growth = check_hypotheses(make_spec(no_growth), 1, 100);
    for (const auto& item : growth.items) {
      if (item.name == "F growth bound") CHECK_FALSE(item.pass);
    }
    CHECK_FALSE(growth.pass);
  }

  TEST_CASE("crossed envelopes surface at the check stage") {
    Config cfg = Config::parse(kForm13);
    cfg.erase("F", "f");
    cfg.set("F", "h1", {"u + 1"});
    cfg.set("F", "h2", {"u"});
    const ProblemSpec spec = make_spec(cfg);
    const HypothesisReport r = check_hypotheses(spec, 2, 50);
    CHECK_FALSE(r.pass);
    CHECK_THROWS_AS(H_apply(spec, GridFunction(spec.grid(), 1, 0.0)), InvalidMultimap);
  }
}
