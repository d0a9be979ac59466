#pragma once

#include "pathot/bvp.hpp"
#include "pathot/lp.hpp"
#include "pathot/measure.hpp"

#include <map>
#include <utility>

namespace pathot {

/// Minimal action between two points together with the minimizing path and
/// the y-gradient of the cost.
struct EndpointCostEval {
    double value = 0.0;
    Vec grad_y;
    DiscretePath path;
    BvpSolveReport bvp;
};

/// Solves the boundary value problem from x to y and evaluates the action and
/// the endpoint gradient grad_y c(x, y) = y - x - int_0^1 t grad V(path(t), t) dt.
EndpointCostEval endpoint_cost(const Vec& x, const Vec& y, const Potential& V,
                               const GridPtr& grid, const BvpOptions& opts = {});

/// The gradient formula above evaluated on an arbitrary sampled path.
Vec grad_y_formula(const DiscretePath& path, const Potential& V);

/// |grad_y c(x1, y) - grad_y c(x2, y)|: how far apart the two endpoint
/// gradients are, which lower-bounds injectivity of y -> grad_y c(., y).
/// Requires x1 != x2 and a gradient Lipschitz bound below 2/3.
double twist_margin(const Vec& x1, const Vec& x2, const Vec& y, const Potential& V,
                    const GridPtr& grid, const BvpOptions& opts = {});

struct EndpointCostTable {
    CostMatrix cost;
    std::map<std::pair<int, int>, DiscretePath> paths;
};

/// Evaluates the endpoint cost for every pair of atoms, solving each pair's
/// boundary value problem exactly once; downstream consumers reuse the table.
EndpointCostTable assemble_endpoint_cost_matrix(const DiscreteMeasure& mu0,
                                                const DiscreteMeasure& mu1,
                                                const Potential& V, const GridPtr& grid,
                                                const BvpOptions& opts = {});

}  // namespace pathot
