#pragma once

#include "pathot/plan.hpp"
#include "pathot/potential.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace pathot {

class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TransportSolution {
    Coupling coupling;
    DualPotentials duals;
    double value = 0.0;
    int pivots = 0;
};

/// Exact solve of the discrete transportation problem
///   min sum_ij P_ij C_ij  s.t.  row sums = source weights,
///                               column sums = target weights, P >= 0
/// by the transportation simplex on the bipartite tree basis. Degeneracy is
/// handled by an internal epsilon-perturbation of the weights carried in
/// exact (value, epsilon-coefficient) pairs and dropped on extraction; entering
/// and leaving arcs break ties toward the lexicographically smallest (i, j).
/// Returns a vertex coupling together with optimal dual potentials.
TransportSolution solve_exact(const CostMatrix& cost);

/// Reference value for uniform marginals of equal size n <= 8: minimum of
/// (1/n) sum_i C_{i, tau(i)} over all n! permutations tau. Refuses anything
/// larger or non-uniform.
double brute_force_oracle(const CostMatrix& cost);

/// c-transform of a source potential: phi*(j) = min_i (C_ij - phi_i).
Vec c_transform(const Vec& phi, const CostMatrix& cost);

/// Reverse transform of a target potential: psi*(i) = min_j (C_ij - psi_j).
Vec c_transform_rev(const Vec& psi, const CostMatrix& cost);

/// Primal cost of the coupling minus the dual objective. Both arguments are
/// validated (marginals within 1e-10, dual feasibility within 1e-9) before
/// the gap is formed; it is nonnegative up to roundoff and zero exactly at
/// optimal pairs.
double duality_gap(const Coupling& coupling, const DualPotentials& duals,
                   const CostMatrix& cost);

struct CycleViolation {
    std::vector<std::pair<int, int>> pairs;  // support pairs in the cycle
    std::vector<int> permutation;            // target reassignment
    double direct_cost = 0.0;
    double permuted_cost = 0.0;
};

struct MonotonicityReport {
    long long combinations_checked = 0;
    std::vector<CycleViolation> violations;
    bool ok = false;
};

/// Enumerates every subset of support pairs up to max_cycle (<= 6) and every
/// permutation of targets within the subset; records one violation per
/// combination whose direct cost exceeds the permuted cost by more than 1e-9.
MonotonicityReport check_cyclical_monotonicity(const Coupling& coupling,
                                               const CostMatrix& cost, int max_cycle);

struct MinimalityIssue {
    int i = 0;
    int j = 0;
    double stored_cost = 0.0;
    double resolved_cost = 0.0;
};

struct MinimalityReport {
    double max_excess = 0.0;  // max stored - resolved over support
    std::vector<MinimalityIssue> issues;
    bool ok = false;
};

/// Re-solves the boundary value problem for every supported pair of the plan
/// under the given potential and checks that each stored path's action is
/// within 1e-8 of the resolved minimal action.
MinimalityReport minimality_audit(const PathPlan& plan, const Potential& V);

}  // namespace pathot
