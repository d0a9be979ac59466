#pragma once

#include "pathot/core.hpp"
#include "pathot/measure.hpp"

#include <map>
#include <utility>

namespace pathot {

/// Endpoint cost table between two atomic measures: entries(i, j) is the cost
/// of moving source atom i to target atom j.
struct CostMatrix {
    Mat entries;  // n0 x n1
    DiscreteMeasure source;
    DiscreteMeasure target;
};

/// Transport plan matrix. Feasible when entries are nonnegative and marginal
/// sums reproduce the two weight vectors within 1e-10.
struct Coupling {
    Mat matrix;  // n0 x n1
};

/// Kantorovich dual variables: phi on source atoms, psi on target atoms.
/// Feasible when phi_i + psi_j <= C_ij + 1e-9 for every pair.
struct DualPotentials {
    Vec phi;
    Vec psi;
};

/// Coupling together with one sampled path per supported pair. Pairs carrying
/// more than 1e-12 mass must have a stored path whose endpoints equal the
/// atoms exactly.
struct PathPlan {
    Coupling coupling;
    std::map<std::pair<int, int>, DiscretePath> paths;
    DiscreteMeasure source;
    DiscreteMeasure target;
    GridPtr grid;

    static constexpr double kSupportTol = 1e-12;
};

/// Pairs a coupling with stored paths for its supported entries, drawn from a
/// path table keyed by (source, target) index. Throws std::invalid_argument
/// when a supported pair has no path in the table.
PathPlan assemble_plan(const Coupling& coupling,
                       const std::map<std::pair<int, int>, DiscretePath>& paths,
                       const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                       const GridPtr& grid);

/// Largest deviation of the coupling's row/column sums from the measures'
/// weights (also infinity if any entry is negative beyond -1e-15).
double coupling_marginal_error(const Coupling& coupling, const DiscreteMeasure& mu0,
                               const DiscreteMeasure& mu1);

/// Largest positive value of phi_i + psi_j - C_ij over all pairs.
double dual_feasibility_violation(const DualPotentials& duals, const CostMatrix& cost);

}  // namespace pathot
