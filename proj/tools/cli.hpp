#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace boxmodel::cli {

enum ExitCode : int {
    kOk = 0,
    kCheckFailed = 1,  // verify: a property suite reported a failure
    kUsage = 2,
    kConfig = 3,
    kCapacity = 4,
    kInternal = 5,
};

/// Entry point of the boxmodel tool; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace boxmodel::cli
