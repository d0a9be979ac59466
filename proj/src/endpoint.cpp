#include "pathot/endpoint.hpp"

#include <cmath>

namespace pathot {

Vec grad_y_formula(const DiscretePath& path, const Potential& V) {
    const TimeGrid& g = *path.grid;
    const int last = g.nodes() - 1;
    Vec integral = Vec::Zero(path.dim());
    for (int j = 0; j <= last; ++j) {
        integral += g.weight(j) * g.node(j) * V.gradient(path.at(j), g.node(j));
    }
    return path.at(last) - path.at(0) - integral;
}

EndpointCostEval endpoint_cost(const Vec& x, const Vec& y, const Potential& V,
                               const GridPtr& grid, const BvpOptions& opts) {
    EndpointCostEval eval;
    eval.bvp = solve_bvp(x, y, V, grid, opts);
    eval.path = eval.bvp.path;
    eval.value = action_cost(eval.path, V);
    eval.grad_y = grad_y_formula(eval.path, V);
    return eval;
}

double twist_margin(const Vec& x1, const Vec& x2, const Vec& y, const Potential& V,
                    const GridPtr& grid, const BvpOptions& opts) {
    if ((x1 - x2).norm() == 0.0) {
        throw std::invalid_argument("twist_margin: x1 and x2 must differ");
    }
    const double L = V.lipschitz_L();
    if (L >= 2.0 / 3.0) {
        throw std::invalid_argument(
            "twist_margin: gradient Lipschitz bound must be below 2/3, got " +
            std::to_string(L));
    }
    const EndpointCostEval e1 = endpoint_cost(x1, y, V, grid, opts);
    const EndpointCostEval e2 = endpoint_cost(x2, y, V, grid, opts);
    return (e1.grad_y - e2.grad_y).norm();
}

EndpointCostTable assemble_endpoint_cost_matrix(const DiscreteMeasure& mu0,
                                                const DiscreteMeasure& mu1,
                                                const Potential& V, const GridPtr& grid,
                                                const BvpOptions& opts) {
    if (mu0.dim() != mu1.dim()) {
        throw std::invalid_argument("assemble_endpoint_cost_matrix: dimension mismatch");
    }
    EndpointCostTable table{CostMatrix{Mat(mu0.size(), mu1.size()), mu0, mu1}, {}};
    for (int i = 0; i < mu0.size(); ++i) {
        for (int j = 0; j < mu1.size(); ++j) {
            EndpointCostEval eval = endpoint_cost(mu0.point(i), mu1.point(j), V, grid, opts);
            table.cost.entries(i, j) = eval.value;
            table.paths.emplace(std::make_pair(i, j), std::move(eval.path));
        }
    }
    return table;
}

}  // namespace pathot
