#pragma once

#include "pathot/core.hpp"
#include "pathot/potential.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace pathot {

struct BvpOptions {
    double tol = 1e-10;
    int max_iter = 10000;
};

struct BvpSolveReport {
    DiscretePath path;
    int iterations = 0;
    double final_change = 0.0;
    double newton_residual = 0.0;
    bool converged = false;
    /// Set when the declared gradient Lipschitz bound is >= 1, i.e. the
    /// fixed-point iteration is not guaranteed to contract.
    bool contraction_warning = false;
    /// Sup-norm update sizes, one entry per iteration.
    std::vector<double> changes;
};

/// Thrown when the fixed-point iteration fails to settle: either the update
/// grows for several consecutive sweeps or max_iter is exhausted.
class BvpDivergenceError : public std::runtime_error {
public:
    BvpDivergenceError(const std::string& what, BvpSolveReport report)
        : std::runtime_error(what), report_(std::move(report)) {}
    const BvpSolveReport& report() const { return report_; }
    double last_change() const { return report_.final_change; }

private:
    BvpSolveReport report_;
};

/// Discrete action of a sampled path: sum over intervals of
/// h * 0.5 * |forward difference / h|^2, minus the trapezoid rule applied to
/// V at the nodes. Exact kinetic energy of the piecewise-linear interpolant.
double action_cost(const DiscretePath& path, const Potential& V);

/// Fixed-point solve of the two-point boundary value problem
///   w(t) = (1-t) x + t y + t * I1[w] - I2[w](t),
/// where I1 integrates (1-s) grad V(w(s), s) over [0,1] and I2(t) integrates
/// (t-s) grad V(w(s), s) over [0,t], both by the trapezoid rule on the grid.
/// Starts from the straight line; stops when the sup-norm update is <= tol.
BvpSolveReport solve_bvp(const Vec& x, const Vec& y, const Potential& V,
                         const GridPtr& grid, const BvpOptions& opts = {});

/// Max over interior nodes of |second difference / h^2 + grad V|: how far the
/// discrete path is from satisfying the Euler-Lagrange equation.
double euler_lagrange_residual(const DiscretePath& path, const Potential& V);

}  // namespace pathot
