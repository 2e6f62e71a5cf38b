#pragma once

namespace qprec {

// Command-line front end over the experiment engine; returns the process exit
// code: 0 success, 1 validation failure, 2 configuration or usage error.
int run_cli(int argc, const char* const* argv);

}  // namespace qprec
