#pragma once

namespace pba {

// Full command-line surface. Exit codes: 0 success, 1 usage or invalid
// input, 2 numerical failure, 3 I/O failure.
int run_cli(int argc, const char* const* argv);

}  // namespace pba
