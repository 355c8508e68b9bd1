#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "volterra/cli.hpp"
#include "volterra/error.hpp"

using namespace volterra;

namespace {

struct RunResult {
  int code = 0;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  TempDir() {
    path_ = std::filesystem::temp_directory_path() /
            ("volterra-test-" + std::to_string(std::hash<const void*>{}(this)) + "-" +
             std::to_string(counter_++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string write(const std::string& name, std::string_view text) const {
    std::ofstream(file(name)) << text;
    return file(name);
  }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

double eval_g(const OuterMap& outer, std::vector<double> x) {
  const Scope scope = value_scope(x.size(), 1);
  x.push_back(0.0);
  return CompiledExpr(outer.g[0], scope)(x);
}

constexpr const char* kSmall = R"(
# u = 1 + int_0^x u
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
g = "1"
phi = "0"

[solve]
n = 1
h = 0.03125
)";

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("parse values and comments") {
    const Config c = Config::parse("[domain]\n; note\ndim = 2  # trailing\nomega_lower = \"0\", \"-inf\"\n");
    const auto* dim = c.find("domain", "dim");
    REQUIRE(dim != nullptr);
    CHECK(dim->values == std::vector<std::string>{"2"});
    CHECK(dim->line == 3);
    const auto* lo = c.find("domain", "omega_lower");
    REQUIRE(lo != nullptr);
    CHECK(lo->values == std::vector<std::string>{"0", "-inf"});
    CHECK(c.find("domain", "tau") == nullptr);
    CHECK(c.has_section("domain"));
    CHECK_FALSE(c.has_section("kernel"));
  }

  TEST_CASE("parse errors carry section, key and line") {
    try {
      (void)Config::parse("[domain]\ndim = 1\nshape = \"box\"\n");
      FAIL("no error");
    } catch (const ConfigError& e) {
      CHECK(e.section() == "domain");
      CHECK(e.key() == "shape");
      CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(Config::parse("[mystery]\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("[domain]\ndim = 1\ndim = 2\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("[domain]\ndim 1\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("dim = 1\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("[domain]\ntau = \"x\n"), ConfigError);
  }

  TEST_CASE("empty exhaustion member is rejected") {
    Config c = Config::parse(kSmall);
    c.erase("domain", "exhaust_lower");
    c.erase("domain", "exhaust_upper");
    CHECK_THROWS_AS(make_spec(c), ConfigError);
    c.set("solve", "n", {"2"});
    CHECK_NOTHROW(make_spec(c));
  }

  TEST_CASE("missing section is named") {
    Config c = Config::parse(kSmall);
    c.erase("kernel", "k");
    try {
      (void)make_spec(c);
      FAIL("no error");
    } catch (const ConfigError& e) {
      CHECK(e.section() == "kernel");
    }
  }

  TEST_CASE("bad expressions report their line") {
    Config c = Config::parse(kSmall);
    const std::size_t line = c.find("F", "f")->line;
    c.set("F", "f", {"u +* 2"});
    try {
      (void)make_spec(c);
      FAIL("no error");
    } catch (const ConfigError& e) {
      CHECK(e.section() == "F");
      CHECK(e.key() == "f");
      CHECK(std::string(e.what()).find("u +* 2") != std::string::npos);
    }
    CHECK(line == 17);
    c.set("F", "f", {"u + z"});
    CHECK_THROWS_AS(make_spec(c), ConfigError);
    c.set("F", "f", {"u"});
    CHECK_NOTHROW(make_spec(c));
  }

  TEST_CASE("dump round trips") {
    for (std::string_view text : {builtin::second_kind, builtin::nonlinear, builtin::goursat}) {
      const Config a = Config::parse(text);
      const Config b = Config::parse(a.dump());
      CHECK(a.dump() == b.dump());
    }
  }

  TEST_CASE("goursat traces in two dimensions") {
    const OuterMap outer = goursat_outer({{"10", parse("x1")}, {"01", parse("x2^2")}}, 0.0, 2);
    CHECK(outer.form == Form::single);
    fixtures::Rng rng(97);
    for (int i = 0; i < 100; ++i) {
      const double a = fixtures::uniform(rng, 0.0, 5.0);
      const double b = fixtures::uniform(rng, 0.0, 5.0);
      CHECK(eval_g(outer, {a, b}) == doctest::Approx(a + b * b).epsilon(1e-14));
    }
    const OuterMap shifted = goursat_outer({{"10", parse("3 + x1")}, {"01", parse("3 + sin(x2)")}}, 3.0, 2);
    CHECK(eval_g(shifted, {1.0, 2.0}) == doctest::Approx(3.0 + 1.0 + std::sin(2.0)).epsilon(1e-14));
    CHECK(eval_g(shifted, {0.0, 0.0}) == doctest::Approx(3.0).epsilon(1e-14));
  }

  TEST_CASE("goursat traces in three dimensions") {
    const OuterMap zero = goursat_outer({}, 0.0, 3);
    CHECK(eval_g(zero, {0.3, 0.7, 1.1}) == 0.0);
    // u = 1 + x1 + x2 x3 restricted to the faces.
    const OuterMap lin = goursat_outer({{"110", parse("1 + x1")},
                                        {"101", parse("1 + x1")},
                                        {"011", parse("1 + x2*x3")},
                                        {"100", parse("1 + x1")},
                                        {"010", parse("1")},
                                        {"001", parse("1")}},
                                       1.0, 3);
    CHECK(eval_g(lin, {0.5, 2.0, 3.0}) == doctest::Approx(1.0 + 0.5 + 6.0).epsilon(1e-14));
  }

  TEST_CASE("incompatible traces") {
    CHECK_THROWS_AS(goursat_outer({{"10", parse("1 + x1")}, {"01", parse("x2")}}, 0.0, 2), IncompatibleTraces);
    CHECK_NOTHROW(goursat_outer({{"10", parse("x1 + x2")}}, 0.0, 2));
    CHECK_THROWS_AS(goursat_outer({{"110", parse("x1*x2")}, {"100", parse("x1 + 1")}}, 1.0, 3), IncompatibleTraces);
    CHECK_THROWS_AS(goursat_outer({{"11", parse("x1")}}, 0.0, 2), Error);
    CHECK_THROWS_AS(goursat_outer({}, 0.0, 1), Error);
  }

  TEST_CASE("goursat config defaults") {
    const ProblemSpec spec = make_spec(Config::parse(builtin::goursat));
    CHECK(spec.dim() == 2);
    CHECK(eval_g(spec.outer, {1.5, 2.0}) == doctest::Approx(1.5 + 4.0).epsilon(1e-14));
  }
}

TEST_SUITE("cli") {
  TEST_CASE("expr-eval") {
    const RunResult a = run_cli({"expr-eval", "exp(1)"});
    CHECK(a.code == 0);
    CHECK(a.out == "2.718281828459045\n");
    const RunResult b = run_cli({"expr-eval", "x*y + 1", "--bind", "x=2", "--bind", "y=3"});
    CHECK(b.code == 0);
    CHECK(b.out == "7\n");
    CHECK(run_cli({"expr-eval", "1 + "}).code == 1);
    CHECK(run_cli({"expr-eval", "q + 1"}).code == 1);
  }

  TEST_CASE("usage errors") {
    CHECK(run_cli({}).code == 1);
    CHECK(run_cli({"frobnicate"}).code == 1);
    CHECK(run_cli({"solve"}).code == 1);
    CHECK(run_cli({"--help"}).code == 0);
    CHECK(run_cli({"solve", "--config", "/nonexistent/volterra.cfg"}).code == 1);
    CHECK(run_cli({"example", "nothing"}).code == 1);
  }

  TEST_CASE("solve writes the solution csv") {
    TempDir dir;
    const std::string cfg = dir.write("small.cfg", kSmall);
    const std::string csv = dir.file("u.csv");
    const RunResult r = run_cli({"solve", "--config", cfg, "--out", csv});
    CHECK(r.code == 0);
    CHECK(r.out.find("converged") != std::string::npos);
    const std::string text = slurp(csv);
    std::istringstream lines(text);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "x,u");
    int rows = 0;
    double last_x = 0.0;
    double last_u = 0.0;
    while (std::getline(lines, line)) {
      ++rows;
      const auto comma = line.find(',');
      last_x = std::stod(line.substr(0, comma));
      last_u = std::stod(line.substr(comma + 1));
    }
    CHECK(rows == 33);
    CHECK(last_x == 1.0);
    CHECK(last_u == doctest::Approx(std::exp(1.0)).epsilon(1e-3));

    const RunResult to_stdout = run_cli({"solve", "--config", cfg});
    CHECK(to_stdout.code == 0);
    CHECK(to_stdout.out == text);
    CHECK(to_stdout.err.find("converged") != std::string::npos);
  }

  TEST_CASE("saved schedule reproduces the solve") {
    TempDir dir;
    const std::string cfg = dir.write("small.cfg", kSmall);
    CHECK(run_cli({"weights", "--config", cfg, "--out", dir.file("w.csv")}).code == 0);
    CHECK(run_cli({"solve", "--config", cfg, "--out", dir.file("a.csv")}).code == 0);
    CHECK(run_cli({"solve", "--config", cfg, "--schedule", dir.file("w.csv"), "--out", dir.file("b.csv")}).code == 0);
    CHECK(run_cli({"solve", "--config", cfg, "--out", dir.file("c.csv")}).code == 0);
    CHECK(slurp(dir.file("a.csv")) == slurp(dir.file("b.csv")));
    CHECK(slurp(dir.file("a.csv")) == slurp(dir.file("c.csv")));
  }

  TEST_CASE("overrides") {
    TempDir dir;
    const std::string cfg = dir.write("small.cfg", kSmall);
    const RunResult r = run_cli({"solve", "--config", cfg, "--h", "0.0625", "--n", "2"});
    CHECK(r.code == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 1 + 33);
    CHECK(run_cli({"solve", "--config", cfg, "--strategy", "sideways"}).code == 1);
    CHECK(run_cli({"solve", "--config", cfg, "--max-iter", "2"}).code == 2);
  }

  TEST_CASE("verification failures exit with 2") {
    TempDir dir;
    std::string bad = kSmall;
    bad.replace(bad.find("g = \"1\""), 7, "g = \"1 + 3*u\"");
    const std::string cfg = dir.write("bad.cfg", bad);
    const RunResult chk = run_cli({"check", "--config", cfg, "--samples", "50"});
    CHECK(chk.code == 2);
    CHECK(chk.out.find("FAIL") != std::string::npos);
    CHECK(chk.out.find("some hypotheses fail") != std::string::npos);

    const RunResult good = run_cli({"check", "--config", dir.write("good.cfg", kSmall), "--samples", "50"});
    CHECK(good.code == 0);
    CHECK(good.out.find("all hypotheses hold on the samples") != std::string::npos);

    Config c = Config::parse(builtin::goursat);
    c.set("goursat", "trace_10", {"1 + x1"});
    const RunResult traces = run_cli({"solve", "--config", dir.write("traces.cfg", c.dump())});
    CHECK(traces.code == 2);
    CHECK(traces.err.find("trace_") != std::string::npos);
  }

  TEST_CASE("goursat example with zero boundary") {
    const RunResult r =
        run_cli({"example", "goursat", "--f", "1", "--zero-boundary", "--n", "1", "--h", "0.0078125"});
    CHECK(r.code == 0);
    CHECK(r.out.find("max |u - (g + 1 x1 x2)|: 0") != std::string::npos);
  }

  TEST_CASE("second-kind example meets its closed form") {
    const RunResult r = run_cli({"example", "second-kind", "--h", "0.015625", "--n", "1"});
    CHECK(r.code == 0);
    CHECK(r.out.find("(ok)") != std::string::npos);
  }

  TEST_CASE("dump-config prints a parsable config") {
    const RunResult r = run_cli({"example", "nonlinear", "--dump-config", "--n", "2"});
    CHECK(r.code == 0);
    const Config c = Config::parse(r.out);
    CHECK(c.find("solve", "n")->values == std::vector<std::string>{"2"});
  }

  TEST_CASE("solution csv headers") {
    std::ostringstream one;
    write_solution_csv(one, GridFunction(GridDesc({0.0}, {1.0}, {2}), 1, 0.5));
    CHECK(one.str() == "x,u\n0,0.5\n1,0.5\n");
    std::ostringstream two;
    write_solution_csv(two, GridFunction(GridDesc({0.0, 0.0}, {1.0, 2.0}, {2, 1}), 2, 1.0));
    CHECK(two.str() == "x1,x2,u1,u2\n0,2,1,1\n1,2,1,1\n");
  }
}
