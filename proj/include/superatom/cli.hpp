#pragma once

#include <string>
#include <vector>

// superatom-lab <spectra|rabi|detect|optimize|ensemble|replay> [flags]
//
// Exit codes: 0 success, 1 I/O failure, 2 usage or configuration error,
// 3 numerical failure.
namespace superatom::cli {

inline constexpr const char* tool_version = "0.1.0";

enum ExitCode : int { ok = 0, io_failure = 1, usage_error = 2, numerical_failure = 3 };

/// args[0] is the program name.
int run(const std::vector<std::string>& args);

}  // namespace superatom::cli
