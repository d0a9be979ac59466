#pragma once

#include "pathot/plan.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace pathot {

/// Deterministic (Monge) representation of a plan: every source atom ships all
/// of its mass to a single target atom.
struct PathMap {
    std::vector<int> assignment;       // source index -> target index
    std::vector<DiscretePath> paths;   // one per source atom
    double monge_value = 0.0;          // sum_i mu0_i * C(i, T(i)) when cost given
};

class NonDeterministicPlanError : public std::runtime_error {
public:
    NonDeterministicPlanError(const std::string& what, std::vector<int> rows)
        : std::runtime_error(what), rows_(std::move(rows)) {}
    const std::vector<int>& split_rows() const { return rows_; }

private:
    std::vector<int> rows_;
};

/// Extracts the map hiding in a plan whose rows are single-supported: row i
/// must have exactly one entry above tol * mu0_i. Rows splitting mass across
/// several targets raise NonDeterministicPlanError listing the offenders.
PathMap extract_map(const PathPlan& plan, const CostMatrix* cost = nullptr,
                    double tol = 1e-9);

struct PushforwardReport {
    double max_mismatch = 0.0;
    std::vector<int> mismatched_targets;
    bool ok = false;
};

/// Verifies that the map transports mu0 onto mu1: for each target j the mass
/// of sources mapped to j must equal mu1's weight within 1e-10.
PushforwardReport pushforward_check(const PathMap& map, const DiscreteMeasure& mu0,
                                    const DiscreteMeasure& mu1);

}  // namespace pathot
