#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sabrfem {

/// Entry point of the sabrfem tool. args excludes the program name.
/// Subcommands: price, converge, masszero, validate. Returns 0 on success,
/// 1 on a validation or runtime failure, 2 on a usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sabrfem
