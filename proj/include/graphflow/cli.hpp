#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace graphflow::cli {

// args = argv without the program name. Returns the process exit code:
// 0 success, 1 domain error, 2 usage error. Output goes to the injected
// streams so tests can capture it.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace graphflow::cli
