#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dntk::cli {

/// Runs one subcommand. `args` excludes the program name. Returns 0 on
/// success, 1 on validation errors and 2 on numerical failures; failures also
/// print `error_code=<name>` on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace dntk::cli
