#pragma once

// The `pragma` command line: translate, eval, survey and oracle.

#include "pragma/model.hpp"

#include <chrono>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace pragma::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,  // runtime or model failure
  kExitUsage = 2,
};

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Model specs: "stdio:COMMAND", "tcp:HOST:PORT", "fixture:NAME" for an
/// embedded table, or a path to a tabular file.
std::shared_ptr<const ConditionalSequenceModel> open_model(std::string_view spec, std::chrono::milliseconds timeout);

}  // namespace pragma::cli
