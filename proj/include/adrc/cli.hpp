#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace adrc {

/// Exit codes: 0 success, 1 usage or I/O problem, 2 domain error
/// (InfeasibleSplit, Unobservable, ...), 3 simulation blowup.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDomain = 2;
inline constexpr int kExitBlowup = 3;

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
/// `args` excludes the program name.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace adrc
