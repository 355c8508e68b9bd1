#pragma once

// Problem files: `[section]` headers, `key = value` lines, `#` comments.
// Expressions are double-quoted; lists are comma-separated quoted strings.
//
//   [domain]  dim, omega_lower, omega_upper, exhaust_lower, exhaust_upper,
//             lambda_lower, lambda_upper, tau
//   [kernel]  k (M*M entries, row-major)
//   [F]       components, f or h1 + h2, b, eta
//   [outer]   form (13, 21, 24), g or G_lower + G_upper, phi, theta, vartheta
//   [goursat] u0, trace_<s> for bit strings s (e.g. trace_10 is u(x1, 0))
//   [solve]   n, h, h_weights, tol_fix, max_iter, strategy, a_n

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "volterra/problem.hpp"

namespace volterra {

class Config {
 public:
  struct Entry {
    std::vector<std::string> values;
    std::size_t line = 0;
  };

  /// Throws ConfigError on malformed lines, unknown sections or keys, duplicates.
  static Config parse(std::string_view text);

  bool has_section(std::string_view section) const;
  const Entry* find(std::string_view section, std::string_view key) const;
  void set(const std::string& section, const std::string& key, std::vector<std::string> values);
  void erase(const std::string& section, const std::string& key);
  std::vector<std::string> keys(std::string_view section) const;

  /// Canonical text: sections and keys in a fixed order, every value quoted.
  std::string dump() const;

 private:
  std::map<std::string, std::map<std::string, Entry, std::less<>>, std::less<>> sections_;
};

Config load_config(const std::string& path);

/// Validated problem. Missing required sections or keys, unparsable
/// expressions and unknown variables raise ConfigError.
ProblemSpec make_spec(const Config& cfg);

/// g(x) = sum over faces s of (-1)^{#zeros(s)+1} u_s(x_s) + (-1)^{N+1} u0, keyed by
/// bit strings of length N other than all zeros and all ones. Missing faces are 0.
/// Throws IncompatibleTraces when traces disagree where faces meet.
OuterMap goursat_outer(const std::map<std::string, Expr>& traces, double u0, std::size_t dim);

}  // namespace volterra
