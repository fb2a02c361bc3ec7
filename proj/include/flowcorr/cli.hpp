#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace flowcorr {

/// Exit codes: 0 success, 1 runtime error (error JSON on stderr), 2 usage.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace flowcorr
