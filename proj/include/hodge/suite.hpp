#pragma once

#include "hodge/validate.hpp"

#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace hodge {

/// One pass/fail comparison of a computed quantity against a pinned tolerance.
struct Check {
    int criterion = 0; // acceptance criterion number
    std::string name;
    bool pass = false;
    std::string detail;
};

struct SuiteCase {
    std::string id;
    std::string summary;
    std::function<std::vector<Check>(const SolverSettings&, std::ostream&)> run;
};

/// Registered ids: arnold, shell_spectrum, annulus, ball, shell, torus, betti, exactness.
/// Every case writes progress to the stream and returns its checks.
const std::vector<SuiteCase>& acceptance_suite();

/// Throws std::invalid_argument for unknown ids.
const SuiteCase& suite_case(const std::string& id);

} // namespace hodge
