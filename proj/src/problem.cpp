#include "volterra/problem.hpp"

#include <string>

#include "volterra/error.hpp"

namespace volterra {

std::optional<Strategy> strategy_from_name(std::string_view name) {
  if (name == "midpoint") return Strategy::midpoint;
  if (name == "lower") return Strategy::lower;
  if (name == "upper") return Strategy::upper;
  return std::nullopt;
}

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::midpoint:
      return "midpoint";
    case Strategy::lower:
      return "lower";
    case Strategy::upper:
      return "upper";
  }
  return "midpoint";
}

bool MultiMapF::singleton() const {
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (lower[i].render() != upper[i].render()) return false;
  }
  return true;
}

Scope value_scope(std::size_t dim, std::size_t components) {
  Scope s = point_scope(dim);
  if (components == 1) {
    const std::size_t slot = s.add("u");
    s.alias("u1", slot);
  } else {
    for (std::size_t i = 0; i < components; ++i) s.add("u" + std::to_string(i + 1));
  }
  return s;
}

Scope outer_scope(Form form, std::size_t dim, std::size_t components) {
  if (form != Form::composite) return value_scope(dim, components);
  Scope s = point_scope(dim);
  const std::size_t u1 = s.add("u1");
  s.alias("u", u1);
  const std::size_t u2 = s.add("u2");
  s.alias("w", u2);
  return s;
}

Scope modulus_scope() { return Scope({"x"}); }

void ProblemSpec::validate() const {
  const std::size_t m = components;
  if (m == 0) throw Error("problem needs at least one component");
  if (kernel.size() != m * m) throw Error("kernel needs " + std::to_string(m * m) + " entries");
  if (F.lower.size() != m || F.upper.size() != m) throw Error("F needs one envelope pair per component");
  if (domain.region.dim() != dim() || domain.exhaustion.dim() != dim()) {
    throw Error("domain, region and exhaustion differ in dimension");
  }
  switch (outer.form) {
    case Form::single:
      if (outer.g.size() != m) throw Error("form 13 needs one g expression per component");
      break;
    case Form::composite:
      if (m != 1) throw Error("form 21 is implemented for scalar problems only");
      if (outer.g.size() != 1) throw Error("form 21 needs a single g expression");
      if (!outer.vartheta) throw Error("form 21 needs the modulus vartheta of g in its integral argument");
      break;
    case Form::set_valued:
      if (outer.G_lower.size() != m || outer.G_upper.size() != m) {
        throw Error("form 24 needs G_lower and G_upper per component");
      }
      break;
  }
  if (n < 1) throw Error("exhaustion index n must be >= 1");
  if (domain.exhaustion.member(n).empty()) {
    throw Error("exhaustion member Omega_" + std::to_string(n) + " is empty; raise n or set exhaust_lower/exhaust_upper");
  }
  if (!(h > 0.0)) throw Error("grid step h must be positive");
  if (!(tol_fix >= 0.0)) throw Error("tol_fix must be >= 0");
  if (max_iter < 1) throw Error("max_iter must be >= 1");
}

}  // namespace volterra
