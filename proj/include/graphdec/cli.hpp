#pragma once

namespace graphdec {

/// Exit codes: 0 success, 1 contract violation, 2 I/O error, 3 configuration or usage error.
int run_cli(int argc, const char* const* argv);

}  // namespace graphdec
