#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bmf::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kBadInput = 2,
  kIoError = 3,
  kNotFactorizable = 10,
  kForgeRefused = 11,
  kVerifyFailed = 12,
};

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bmf::cli
