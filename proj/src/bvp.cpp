#include "pathot/bvp.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace pathot {

namespace {
std::string short_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3e", v);
    return buf;
}
}  // namespace

double action_cost(const DiscretePath& path, const Potential& V) {
    const TimeGrid& g = *path.grid;
    const double h = g.h();
    double kinetic = 0.0;
    for (int j = 0; j < g.intervals(); ++j) {
        kinetic += (path.points.row(j + 1) - path.points.row(j)).squaredNorm() / (2.0 * h);
    }
    double potential = 0.0;
    for (int j = 0; j < g.nodes(); ++j) {
        potential += g.weight(j) * V.value(path.at(j), g.node(j));
    }
    return kinetic - potential;
}

BvpSolveReport solve_bvp(const Vec& x, const Vec& y, const Potential& V,
                         const GridPtr& grid, const BvpOptions& opts) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("solve_bvp: endpoint dimensions differ");
    }
    if (opts.tol <= 0.0) throw std::invalid_argument("solve_bvp: tol must be positive");
    if (opts.max_iter < 1) throw std::invalid_argument("solve_bvp: max_iter must be >= 1");

    const TimeGrid& g = *grid;
    const int n = g.nodes();
    const int d = static_cast<int>(x.size());
    const double h = g.h();

    BvpSolveReport rep;
    rep.contraction_warning = V.lipschitz_L() >= 1.0;
    rep.path = linear_path(x, y, grid);

    Mat grads(n, d);
    Mat next(n, d);
    int growth_streak = 0;
    double prev_change = std::numeric_limits<double>::infinity();

    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        for (int j = 0; j < n; ++j) {
            grads.row(j) = V.gradient(rep.path.at(j), g.node(j)).transpose();
        }

        // Full-interval trapezoid of (1-s) grad V.
        Eigen::RowVectorXd q1 = Eigen::RowVectorXd::Zero(d);
        for (int j = 0; j < n; ++j) {
            q1 += g.weight(j) * (1.0 - g.node(j)) * grads.row(j);
        }

        // Prefix sums with half weight on node 0: the trapezoid rule on
        // [0, t_j] of (t_j - s) grad V reduces to h * (t_j * P1 - P2) taken at
        // j-1, because the integrand vanishes at the upper endpoint.
        Eigen::RowVectorXd p1 = 0.5 * grads.row(0);
        Eigen::RowVectorXd p2 = 0.5 * g.node(0) * grads.row(0);

        next.row(0) = x.transpose();
        for (int j = 1; j < n; ++j) {
            const double t = g.node(j);
            const Eigen::RowVectorXd q2 = h * (t * p1 - p2);
            next.row(j) = (1.0 - t) * x.transpose() + t * y.transpose() + t * q1 - q2;
            p1 += grads.row(j);
            p2 += g.node(j) * grads.row(j);
        }
        next.row(n - 1) = y.transpose();

        double change = 0.0;
        for (int j = 0; j < n; ++j) {
            change = std::max(change, (next.row(j) - rep.path.points.row(j)).norm());
        }
        rep.path.points.swap(next);
        rep.iterations = iter;
        rep.final_change = change;
        rep.changes.push_back(change);

        if (change <= opts.tol) {
            rep.converged = true;
            break;
        }
        growth_streak = change > prev_change ? growth_streak + 1 : 0;
        prev_change = change;
        if (growth_streak >= 5) {
            rep.newton_residual = euler_lagrange_residual(rep.path, V);
            throw BvpDivergenceError(
                "solve_bvp: update grew for 5 consecutive iterations (last change " +
                    short_sci(change) + ")",
                rep);
        }
    }

    rep.newton_residual = euler_lagrange_residual(rep.path, V);
    if (!rep.converged) {
        throw BvpDivergenceError("solve_bvp: no convergence after " +
                                     std::to_string(opts.max_iter) +
                                     " iterations (last change " +
                                     short_sci(rep.final_change) + ")",
                                 rep);
    }
    return rep;
}

double euler_lagrange_residual(const DiscretePath& path, const Potential& V) {
    const TimeGrid& g = *path.grid;
    const double h2 = g.h() * g.h();
    double worst = 0.0;
    for (int j = 1; j < g.nodes() - 1; ++j) {
        const Eigen::RowVectorXd second =
            (path.points.row(j + 1) - 2.0 * path.points.row(j) + path.points.row(j - 1)) / h2;
        const Vec grad = V.gradient(path.at(j), g.node(j));
        worst = std::max(worst, (second + grad.transpose()).norm());
    }
    return worst;
}

}  // namespace pathot
