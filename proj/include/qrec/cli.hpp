#pragma once

#include <ostream>

namespace qrec::cli {

/// Entry point of the `qrec` tool. Reports go to `out`, diagnostics to
/// `err`. Returns 0 on success, 1 on a precondition failure, 2 on a parse
/// failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qrec::cli
