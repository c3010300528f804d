#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace boxmodel::suites {

struct Options {
    std::uint64_t seed = 1;
    std::size_t trials = 100;
    unsigned threads = 1;
};

struct Result {
    std::string name;
    bool pass = true;
    std::size_t checks = 0;
    std::size_t failures = 0;
    double worst_margin = 0.0;  // smallest (allowed − observed) slack over the checks
    std::string detail;
};

/// Everything except the injected-violation fixture.
std::vector<std::string> default_suites();
bool known(const std::string& name);
Result run(const std::string& name, const Options& opt);

}  // namespace boxmodel::suites
