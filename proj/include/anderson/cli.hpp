#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace anderson {

inline constexpr const char* kToolName = "anderson_dos";
inline constexpr const char* kToolVersion = "0.1.0";

// Full command line (without argv[0]). Primary data goes to `out`,
// diagnostics to `err`. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace anderson
