#pragma once

#include "marle/solver.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace marle::cli {

enum ExitCode { kOk = 0, kMonitorFailure = 1, kConfigError = 2 };

std::vector<std::string> commands();

// configuration used when --config is absent
RunConfig default_config(const std::string& command);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace marle::cli
