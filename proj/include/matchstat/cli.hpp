#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace matchstat::cli {

// Runs one command-line invocation; args excludes the program name. Results
// go to out (or the --out file), diagnostics to err. Returns 0 on success,
// 1 on usage errors, 2 on data errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace matchstat::cli
