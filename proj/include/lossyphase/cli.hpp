#pragma once

// Command-line front end. Subcommands: bounds, fringes, simulate, estimate,
// replay. Every command writes its tables and a <command>_manifest.json into
// the output directory.
//
// Exit codes: 0 success, 1 input or parse error, 2 domain error,
// 3 internal invariant violation.

#include <iosfwd>
#include <string>
#include <vector>

namespace lossyphase {

inline constexpr const char* kVersion = "1.0.0";

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lossyphase
