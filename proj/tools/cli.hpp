#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace phasered::cli {

enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_config = 2 };

/// Runs the command line `args` (without the program name). Data files go to
/// --out; diagnostics and error JSON go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

/// 64-bit FNV-1a, used for the config hash in run manifests.
std::uint64_t fnv1a(std::string_view data);

}  // namespace phasered::cli
