#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace msnlab::cli {

// Dispatches one subcommand. Returns the process exit code:
//   0 success, 1 input/parse error, 2 infeasible request,
//   3 internal invariant violation.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace msnlab::cli
