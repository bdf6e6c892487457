#pragma once
// The `rtnet` command line: synth, train, evaluate, sample, fit-latent,
// interpolate and gradcheck.

#include <iosfwd>
#include <string>
#include <vector>

namespace rtnet::cli {

enum ExitCode : int { kExitOk = 0, kExitUserError = 1, kExitInternalError = 2 };

// Environment variable naming the default base directory for relative paths.
inline constexpr const char* kDataDirEnv = "RTNET_DATA_DIR";

// `args` excludes the program name. Normal output goes to `out`, progress
// and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace rtnet::cli
