#pragma once

#include "pathot/instance.hpp"

#include <string>
#include <vector>

namespace pathot {

enum class CheckStatus { pass, fail, uncertified };

struct CheckResult {
    std::string name;
    CheckStatus status = CheckStatus::fail;
    double observed = 0.0;
    double allowed = 0.0;
    std::string note;
};

/// Named invariant battery at the instance's own scale (its grid, potential,
/// interaction strength, and seed). Checks whose hypotheses the instance does
/// not meet (e.g. twist margins with too strong a potential) are reported as
/// `uncertified` rather than failed.
std::vector<CheckResult> run_verification(const InstanceSpec& spec);

std::string to_string(CheckStatus s);

}  // namespace pathot
