#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ssdeconv {

/// Entry point of the `ssdeconv` tool. Returns the process exit code:
/// 0 success, 2 usage error, 3 data error, 4 numeric error. Failures print a
/// single "ssdeconv: error kind=<kind>: <message>" line to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ssdeconv
