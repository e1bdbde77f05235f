// Command-line front end. `run` is the whole program minus process setup,
// so tests can drive it with in-memory streams.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tauber::cli {

inline constexpr const char* kVersion = "1.0.0";

/// args excludes the program name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// `lo:hi:step` in dB, inclusive of hi when it lies on the step lattice.
std::vector<double> parse_grid(const std::string& text);

}  // namespace tauber::cli
