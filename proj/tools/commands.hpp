// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace obbeval::cli {

/// Runs the command line `args` (args[0] is the program name). Returns the
/// process exit code: 0 on success, 1 on a library error, CLI11's code on a
/// usage error. Nothing is written to disk before all flags validate.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace obbeval::cli
