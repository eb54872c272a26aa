#pragma once

namespace cbdt {

// Entry point behind the `cbdt` binary; exposed so tests can drive commands
// in-process. Exit codes: 0 success, 2 validation/config error, 3 I/O or
// runtime error, 4 numerical error.
int cli_main(int argc, const char* const* argv);

}  // namespace cbdt
