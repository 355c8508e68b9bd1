#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "volterra/grid.hpp"

namespace volterra {

/// Entry point of the `volterra` tool; `args` excludes the program name.
/// Returns 0 on success, 1 on operational errors and 2 on failed verification.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Solution CSV: node coordinates then components, rows in flat grid order.
void write_solution_csv(std::ostream& out, const GridFunction& u);

}  // namespace volterra
