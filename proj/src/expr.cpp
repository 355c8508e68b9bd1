#include "volterra/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "volterra/error.hpp"

namespace volterra {

namespace {

struct FunctionInfo {
  std::string_view name;
  Function func;
  std::size_t arity;
};

constexpr std::array<FunctionInfo, 10> kFunctions{{
    {"sin", Function::sin, 1},
    {"cos", Function::cos, 1},
    {"tan", Function::tan, 1},
    {"exp", Function::exp, 1},
    {"ln", Function::ln, 1},
    {"abs", Function::abs, 1},
    {"sqrt", Function::sqrt, 1},
    {"min", Function::min, 2},
    {"max", Function::max, 2},
    {"arctan", Function::arctan, 1},
}};

double apply_function(Function f, double a, double b) {
  switch (f) {
    case Function::sin:
      return std::sin(a);
    case Function::cos:
      return std::cos(a);
    case Function::tan:
      return std::tan(a);
    case Function::exp:
      return std::exp(a);
    case Function::ln:
      if (!(a > 0.0)) throw DomainError("ln of nonpositive argument " + format_shortest(a));
      return std::log(a);
    case Function::abs:
      return std::fabs(a);
    case Function::sqrt:
      if (a < 0.0) throw DomainError("sqrt of negative argument " + format_shortest(a));
      return std::sqrt(a);
    case Function::min:
      return std::fmin(a, b);
    case Function::max:
      return std::fmax(a, b);
    case Function::arctan:
      return std::atan(a);
  }
  return 0.0;
}

double apply_binary(char op, double a, double b) {
  switch (op) {
    case '+':
      return a + b;
    case '-':
      return a - b;
    case '*':
      return a * b;
    case '/':
      if (b == 0.0) throw DomainError("division by zero");
      return a / b;
    case '^': {
      if (a < 0.0 && std::trunc(b) != b) {
        throw DomainError("negative base " + format_shortest(a) + " raised to non-integer power " +
                          format_shortest(b));
      }
      return std::pow(a, b);
    }
  }
  return 0.0;
}

double eval_node(const Expr::Node& node, const Bindings& bindings) {
  switch (node.kind) {
    case Expr::Kind::number:
      return node.value;
    case Expr::Kind::variable: {
      auto it = bindings.find(node.name);
      if (it == bindings.end()) throw UnboundVariable("unbound variable '" + node.name + "'");
      return it->second;
    }
    case Expr::Kind::negate:
      return -eval_node(*node.args[0], bindings);
    case Expr::Kind::binary: {
      const double lhs = eval_node(*node.args[0], bindings);
      const double rhs = eval_node(*node.args[1], bindings);
      return apply_binary(node.op, lhs, rhs);
    }
    case Expr::Kind::call: {
      const double a = eval_node(*node.args[0], bindings);
      const double b = node.args.size() > 1 ? eval_node(*node.args[1], bindings) : 0.0;
      return apply_function(node.func, a, b);
    }
  }
  return 0.0;
}

void render_node(const Expr::Node& node, std::string& out) {
  switch (node.kind) {
    case Expr::Kind::number: {
      const std::string text = format_shortest(node.value);
      if (std::signbit(node.value)) {
        out += '(';
        out += text;
        out += ')';
      } else {
        out += text;
      }
      return;
    }
    case Expr::Kind::variable:
      out += node.name;
      return;
    case Expr::Kind::negate:
      out += "(-";
      render_node(*node.args[0], out);
      out += ')';
      return;
    case Expr::Kind::binary:
      out += '(';
      render_node(*node.args[0], out);
      out += node.op;
      render_node(*node.args[1], out);
      out += ')';
      return;
    case Expr::Kind::call:
      out += function_name(node.func);
      out += '(';
      for (std::size_t i = 0; i < node.args.size(); ++i) {
        if (i > 0) out += ',';
        render_node(*node.args[i], out);
      }
      out += ')';
      return;
  }
}

void collect_variables(const Expr::Node& node, std::set<std::string>& out) {
  if (node.kind == Expr::Kind::variable) out.insert(node.name);
  for (const auto& arg : node.args) collect_variables(*arg, out);
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse_all() {
    skip_space();
    if (pos_ >= text_.size()) throw SyntaxError(pos_, "empty expression");
    Expr e = parse_sum();
    skip_space();
    if (pos_ < text_.size()) {
      throw SyntaxError(pos_, std::string("expected operator or end of input, found '") +
                                  text_[pos_] + "'");
    }
    return e;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      std::string found = pos_ < text_.size() ? std::string("'") + text_[pos_] + "'" : "end of input";
      throw SyntaxError(pos_, std::string("expected '") + c + "', found " + found);
    }
  }

  Expr parse_sum() {
    Expr lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = Expr::binary('+', lhs, parse_product());
      } else if (accept('-')) {
        lhs = Expr::binary('-', lhs, parse_product());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_product() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = Expr::binary('*', lhs, parse_unary());
      } else if (accept('/')) {
        lhs = Expr::binary('/', lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return Expr::negate(parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (accept('^')) return Expr::binary('^', base, parse_unary());
    return base;
  }

  Expr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) throw SyntaxError(pos_, "expected a number, name or '(', found end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = parse_sum();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
    throw SyntaxError(pos_, std::string("expected a number, name or '(', found '") + c + "'");
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
        pos_ = look;
        digits();
      }
    }
    double value = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) throw SyntaxError(start, "malformed number");
    return Expr::number(value);
  }

  Expr parse_name() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string name(text_.substr(start, pos_ - start));
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      auto func = function_from_name(name);
      if (!func) throw UnknownFunction("unknown function '" + name + "' at position " + std::to_string(start));
      ++pos_;
      std::vector<Expr> args;
      args.push_back(parse_sum());
      while (accept(',')) args.push_back(parse_sum());
      expect(')');
      if (args.size() != function_arity(*func)) {
        throw SyntaxError(start, "function '" + name + "' expects " +
                                     std::to_string(function_arity(*func)) + " argument(s), got " +
                                     std::to_string(args.size()));
      }
      return Expr::call(*func, std::move(args));
    }
    if (name == "pi") return Expr::number(std::numbers::pi);
    if (name == "e") return Expr::number(std::numbers::e);
    return Expr::variable(name);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::optional<Function> function_from_name(std::string_view name) {
  for (const auto& info : kFunctions) {
    if (info.name == name) return info.func;
  }
  return std::nullopt;
}

std::string_view function_name(Function f) {
  for (const auto& info : kFunctions) {
    if (info.func == f) return info.name;
  }
  return "?";
}

std::size_t function_arity(Function f) {
  for (const auto& info : kFunctions) {
    if (info.func == f) return info.arity;
  }
  return 1;
}

Expr::Expr() : Expr(number(0.0)) {}

Expr Expr::number(double value) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::number;
  node->value = value;
  return Expr(std::move(node));
}

Expr Expr::variable(std::string name) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::variable;
  node->name = std::move(name);
  return Expr(std::move(node));
}

Expr Expr::negate(Expr operand) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::negate;
  node->args.push_back(std::move(operand.root_));
  return Expr(std::move(node));
}

Expr Expr::binary(char op, Expr lhs, Expr rhs) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::binary;
  node->op = op;
  node->args.push_back(std::move(lhs.root_));
  node->args.push_back(std::move(rhs.root_));
  return Expr(std::move(node));
}

Expr Expr::call(Function f, std::vector<Expr> args) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::call;
  node->func = f;
  for (auto& a : args) node->args.push_back(std::move(a.root_));
  return Expr(std::move(node));
}

double Expr::eval(const Bindings& bindings) const { return eval_node(*root_, bindings); }

std::string Expr::render() const {
  std::string out;
  render_node(*root_, out);
  return out;
}

std::set<std::string> Expr::variables() const {
  std::set<std::string> out;
  collect_variables(*root_, out);
  return out;
}

Expr Expr::substitute(const std::map<std::string, Expr, std::less<>>& replacements) const {
  if (root_->kind == Kind::variable) {
    auto it = replacements.find(root_->name);
    return it == replacements.end() ? *this : it->second;
  }
  if (root_->args.empty()) return *this;
  auto node = std::make_shared<Node>(*root_);
  for (auto& arg : node->args) arg = Expr(arg).substitute(replacements).root_;
  return Expr(std::move(node));
}

Expr parse(std::string_view text) { return Parser(text).parse_all(); }

Scope::Scope(const std::vector<std::string>& names) {
  for (const auto& n : names) add(n);
}

std::size_t Scope::add(const std::string& name) {
  const std::size_t slot = size_++;
  slots_[name] = slot;
  return slot;
}

void Scope::alias(const std::string& name, std::size_t slot) { slots_[name] = slot; }

std::optional<std::size_t> Scope::slot(std::string_view name) const {
  auto it = slots_.find(name);
  if (it == slots_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Scope::names() const {
  std::vector<std::string> out;
  for (const auto& [name, slot] : slots_) out.push_back(name);
  return out;
}

CompiledExpr::CompiledExpr(const Expr& expr, const Scope& scope) : text_(expr.render()) {
  emit(expr.root(), scope, 0);
}

void CompiledExpr::emit(const Expr::Node& node, const Scope& scope, std::size_t depth) {
  max_depth_ = std::max(max_depth_, depth + 1);
  switch (node.kind) {
    case Expr::Kind::number:
      code_.push_back({Op::constant, Function::sin, 0, node.value});
      return;
    case Expr::Kind::variable: {
      auto slot = scope.slot(node.name);
      if (!slot) {
        std::string known;
        for (const auto& n : scope.names()) known += (known.empty() ? "" : ", ") + n;
        throw UnboundVariable("unknown variable '" + node.name + "' (allowed: " + known + ")");
      }
      code_.push_back({Op::load, Function::sin, static_cast<std::uint32_t>(*slot), 0.0});
      if (std::find(used_slots_.begin(), used_slots_.end(), *slot) == used_slots_.end()) {
        used_slots_.push_back(*slot);
      }
      return;
    }
    case Expr::Kind::negate:
      emit(*node.args[0], scope, depth);
      code_.push_back({Op::negate, Function::sin, 0, 0.0});
      return;
    case Expr::Kind::binary: {
      emit(*node.args[0], scope, depth);
      emit(*node.args[1], scope, depth + 1);
      Op op = Op::add;
      switch (node.op) {
        case '+': op = Op::add; break;
        case '-': op = Op::sub; break;
        case '*': op = Op::mul; break;
        case '/': op = Op::div; break;
        case '^': op = Op::pow; break;
      }
      code_.push_back({op, Function::sin, 0, 0.0});
      return;
    }
    case Expr::Kind::call:
      emit(*node.args[0], scope, depth);
      if (node.args.size() > 1) {
        emit(*node.args[1], scope, depth + 1);
        code_.push_back({Op::call2, node.func, 0, 0.0});
      } else {
        code_.push_back({Op::call1, node.func, 0, 0.0});
      }
      return;
  }
}

double CompiledExpr::operator()(std::span<const double> slots) const {
  if (code_.empty()) return 0.0;
  std::array<double, 64> small{};
  std::vector<double> large;
  double* stack = small.data();
  if (max_depth_ > small.size()) {
    large.resize(max_depth_);
    stack = large.data();
  }
  std::size_t top = 0;
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::constant:
        stack[top++] = in.value;
        break;
      case Op::load:
        stack[top++] = slots[in.slot];
        break;
      case Op::negate:
        stack[top - 1] = -stack[top - 1];
        break;
      case Op::add:
        --top;
        stack[top - 1] = stack[top - 1] + stack[top];
        break;
      case Op::sub:
        --top;
        stack[top - 1] = stack[top - 1] - stack[top];
        break;
      case Op::mul:
        --top;
        stack[top - 1] = stack[top - 1] * stack[top];
        break;
      case Op::div:
        --top;
        stack[top - 1] = apply_binary('/', stack[top - 1], stack[top]);
        break;
      case Op::pow:
        --top;
        stack[top - 1] = apply_binary('^', stack[top - 1], stack[top]);
        break;
      case Op::call1:
        stack[top - 1] = apply_function(in.func, stack[top - 1], 0.0);
        break;
      case Op::call2:
        --top;
        stack[top - 1] = apply_function(in.func, stack[top - 1], stack[top]);
        break;
    }
  }
  return stack[0];
}

bool CompiledExpr::uses_slot(std::size_t slot) const {
  return std::find(used_slots_.begin(), used_slots_.end(), slot) != used_slots_.end();
}

std::string format_shortest(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

std::string format_g17(double value) {
  std::array<char, 64> buf{};
  const int n = std::snprintf(buf.data(), buf.size(), "%.17g", value);
  return std::string(buf.data(), static_cast<std::size_t>(n));
}

}  // namespace volterra
