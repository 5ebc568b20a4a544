#pragma once

#include <iosfwd>

#include "manydsl/error.hpp"

namespace manydsl::cli {

/// Entry point of the `manydsl` command. Data goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Process exit status for an error of the given kind.
int exit_code(ErrorKind kind);

}  // namespace manydsl::cli
