#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace storebound {

// Exit codes of the command-line runner.
inline constexpr int kExitSuccess = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// Runs one invocation. args excludes the program name. Subcommands:
// sw-sweep, dom-find, dom-experiment, undersample, evaluate.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace storebound
