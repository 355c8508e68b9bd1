#pragma once

// Scalar arithmetic expressions used by configuration files to define kernels,
// right-hand sides, bounds and weights.
//
// Grammar (lowest to highest precedence):
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | name | name '(' args ')' | '(' sum ')'
//
// Unary minus binds looser than '^', so "-2^2" is -4. There is no implicit
// multiplication. All arithmetic is IEEE binary64.

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace volterra {

enum class Function : std::uint8_t { sin, cos, tan, exp, ln, abs, sqrt, min, max, arctan };

std::optional<Function> function_from_name(std::string_view name);
std::string_view function_name(Function f);
std::size_t function_arity(Function f);

using Bindings = std::map<std::string, double, std::less<>>;

class Expr {
 public:
  enum class Kind : std::uint8_t { number, variable, negate, binary, call };

  struct Node {
    Kind kind = Kind::number;
    double value = 0.0;
    std::string name;  // variable name
    char op = 0;       // '+', '-', '*', '/', '^' for binary nodes
    Function func = Function::sin;
    std::vector<std::shared_ptr<const Node>> args;
  };

  /// The default expression is the literal 0.
  Expr();

  static Expr number(double value);
  static Expr variable(std::string name);
  static Expr negate(Expr operand);
  static Expr binary(char op, Expr lhs, Expr rhs);
  static Expr call(Function f, std::vector<Expr> args);

  double eval(const Bindings& bindings) const;

  /// Fully parenthesised text that parses back to an identical tree.
  std::string render() const;

  std::set<std::string> variables() const;
  bool is_constant() const { return variables().empty(); }

  Expr substitute(const std::map<std::string, Expr, std::less<>>& replacements) const;

  const Node& root() const { return *root_; }

 private:
  explicit Expr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

  std::shared_ptr<const Node> root_;
};

Expr parse(std::string_view text);

inline double eval(const Expr& e, const Bindings& bindings) { return e.eval(bindings); }

/// Ordered set of variable names mapped to slots of a value array. Several names
/// may share a slot (e.g. "t" and "x1" in one-dimensional problems).
class Scope {
 public:
  Scope() = default;
  explicit Scope(const std::vector<std::string>& names);

  std::size_t add(const std::string& name);
  void alias(const std::string& name, std::size_t slot);

  std::optional<std::size_t> slot(std::string_view name) const;
  std::size_t size() const { return size_; }
  std::vector<std::string> names() const;

 private:
  std::map<std::string, std::size_t, std::less<>> slots_;
  std::size_t size_ = 0;
};

/// Flat stack-machine form of an Expr bound to a Scope. Evaluation is reentrant
/// and produces the same bits as Expr::eval for the same inputs.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  CompiledExpr(const Expr& expr, const Scope& scope);

  double operator()(std::span<const double> slots) const;

  bool uses_slot(std::size_t slot) const;
  bool is_constant() const { return used_slots_.empty(); }
  const std::string& text() const { return text_; }

 private:
  enum class Op : std::uint8_t { constant, load, negate, add, sub, mul, div, pow, call1, call2 };
  struct Instr {
    Op op;
    Function func;
    std::uint32_t slot;
    double value;
  };

  void emit(const Expr::Node& node, const Scope& scope, std::size_t depth);

  std::vector<Instr> code_;
  std::vector<std::size_t> used_slots_;
  std::size_t max_depth_ = 0;
  std::string text_;
};

/// Shortest decimal text that reads back to the same double.
std::string format_shortest(double value);

/// Seventeen significant digits, the CSV convention.
std::string format_g17(double value);

}  // namespace volterra
