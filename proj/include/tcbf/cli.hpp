#pragma once

namespace tcbf::cli {

/// Entry point behind the tcbf binary; exposed so tests can drive commands
/// in-process. Returns 0 on success, 1 on validation failure, 2 on runtime
/// errors.
int run(int argc, const char* const* argv);

}  // namespace tcbf::cli
