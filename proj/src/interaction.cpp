#include "pathot/interaction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pathot {

void validate(const InteractionParams& params) {
    if (params.theta < 0.0 || !std::isfinite(params.theta)) {
        throw std::invalid_argument("InteractionParams: theta must be >= 0");
    }
    if (params.beta <= 0.0 || !std::isfinite(params.beta)) {
        throw std::invalid_argument("InteractionParams: beta must be > 0");
    }
    if (params.coulomb_smoothing < 0.0 || !std::isfinite(params.coulomb_smoothing)) {
        throw std::invalid_argument("InteractionParams: coulomb_smoothing must be >= 0");
    }
}

double interaction_lipschitz_factor() { return 2.0 * std::exp(-0.5); }

double kernel_value(const DiscretePath& a, const DiscretePath& b,
                    const InteractionParams& params) {
    validate(params);
    if (params.kernel == KernelKind::none || params.theta == 0.0) return 0.0;
    const TimeGrid& g = *a.grid;
    if (b.grid->intervals() != g.intervals() || a.dim() != b.dim()) {
        throw std::invalid_argument("kernel_value: paths live on different grids");
    }
    const int d = a.dim();
    if (params.kernel == KernelKind::coulomb && d < 3) {
        throw std::invalid_argument("kernel_value: coulomb kernel needs dimension >= 3");
    }
    double acc = 0.0;
    if (params.kernel == KernelKind::gaussian) {
        for (int j = 0; j < g.nodes(); ++j) {
            const double r2 = (a.points.row(j) - b.points.row(j)).squaredNorm();
            acc += g.weight(j) * std::exp(-params.beta * r2);
        }
    } else {
        const double eps2 = params.coulomb_smoothing * params.coulomb_smoothing;
        const double expo = 0.5 * (2.0 - d);
        for (int j = 0; j < g.nodes(); ++j) {
            const double r2 = (a.points.row(j) - b.points.row(j)).squaredNorm();
            if (params.coulomb_smoothing == 0.0 && r2 < 1e-16) {
                throw SingularityError(
                    "kernel_value: coulomb kernel without smoothing hit coincident samples");
            }
            acc += g.weight(j) * std::pow(r2 + eps2, expo);
        }
    }
    return params.theta * acc;
}

double interaction_potential_U(const DiscretePath& gamma, const PathPlan& plan,
                               const InteractionParams& params) {
    double u = 0.0;
    for (const auto& [key, path] : plan.paths) {
        const double w = plan.coupling.matrix(key.first, key.second);
        if (w <= PathPlan::kSupportTol) continue;
        u += w * kernel_value(gamma, path, params);
    }
    return u;
}

EffectivePotential::EffectivePotential(const PathPlan& plan, const InteractionParams& params)
    : grid_(plan.grid), theta_(params.theta), beta_(params.beta) {
    validate(params);
    if (params.kernel == KernelKind::coulomb) {
        throw std::invalid_argument(
            "EffectivePotential: closed form available for the gaussian kernel only");
    }
    if (params.kernel == KernelKind::none) theta_ = 0.0;
    for (int i = 0; i < plan.coupling.matrix.rows(); ++i) {
        for (int j = 0; j < plan.coupling.matrix.cols(); ++j) {
            const double w = plan.coupling.matrix(i, j);
            if (w <= PathPlan::kSupportTol) continue;
            const auto it = plan.paths.find({i, j});
            if (it == plan.paths.end()) {
                throw std::invalid_argument("EffectivePotential: supported pair (" +
                                            std::to_string(i) + ", " + std::to_string(j) +
                                            ") has no stored path");
            }
            weights_.push_back(w);
            paths_.push_back(it->second.points);
        }
    }
}

int EffectivePotential::snap(double t) const {
    const int j = static_cast<int>(std::lround(t * grid_->intervals()));
    return std::clamp(j, 0, grid_->intervals());
}

double EffectivePotential::value(const Vec& x, double t) const {
    if (theta_ == 0.0) return 0.0;
    const int j = snap(t);
    double acc = 0.0;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        const double r2 = (x.transpose() - paths_[k].row(j)).squaredNorm();
        acc += weights_[k] * std::exp(-beta_ * r2);
    }
    return -2.0 * theta_ * acc;
}

Vec EffectivePotential::gradient(const Vec& x, double t) const {
    if (theta_ == 0.0) return Vec::Zero(x.size());
    const int j = snap(t);
    Vec g = Vec::Zero(x.size());
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        const Vec dx = x - paths_[k].row(j).transpose();
        g += weights_[k] * std::exp(-beta_ * dx.squaredNorm()) * dx;
    }
    return 4.0 * theta_ * beta_ * g;
}

Mat EffectivePotential::hessian(const Vec& x, double t) const {
    const int d = static_cast<int>(x.size());
    if (theta_ == 0.0) return Mat::Zero(d, d);
    const int j = snap(t);
    Mat H = Mat::Zero(d, d);
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        const Vec dx = x - paths_[k].row(j).transpose();
        const double e = std::exp(-beta_ * dx.squaredNorm());
        H += weights_[k] * e * (Mat::Identity(d, d) - 2.0 * beta_ * dx * dx.transpose());
    }
    return 4.0 * theta_ * beta_ * H;
}

double EffectivePotential::bound_K() const {
    double mass = 0.0;
    for (double w : weights_) mass += w;
    return 2.0 * theta_ * mass;
}

double EffectivePotential::lipschitz_L() const {
    if (theta_ == 0.0) return 0.0;
    double mass = 0.0;
    for (double w : weights_) mass += w;
    return 4.0 * theta_ * beta_ * mass * interaction_lipschitz_factor();
}

PotentialPtr effective_potential(const PathPlan& plan, const InteractionParams& params) {
    return std::make_shared<EffectivePotential>(plan, params);
}

EndpointCostTable effective_cost_matrix(const PathPlan& plan, const PotentialPtr& base,
                                        const InteractionParams& params, const GridPtr& grid,
                                        const BvpOptions& opts) {
    validate(params);
    if (!base) throw std::invalid_argument("effective_cost_matrix: null base potential");
    const double l_eff = 4.0 * params.theta * params.beta * interaction_lipschitz_factor();
    if (params.kernel != KernelKind::none && l_eff >= 1.0) {
        throw std::invalid_argument(
            "effective_cost_matrix: interaction too strong for a contractive solve "
            "(4 theta beta factor = " +
            std::to_string(l_eff) + " >= 1)");
    }
    const PotentialPtr eff = effective_potential(plan, params);
    const auto combined = std::make_shared<SumPotential>(std::vector<PotentialPtr>{base, eff});
    return assemble_endpoint_cost_matrix(plan.source, plan.target, *combined, grid, opts);
}

InteractionEnergyBreakdown total_energy(const PathPlan& plan, const Potential& base,
                                        const InteractionParams& params) {
    InteractionEnergyBreakdown e;
    std::vector<double> weights;
    std::vector<const DiscretePath*> atoms;
    for (const auto& [key, path] : plan.paths) {
        const double w = plan.coupling.matrix(key.first, key.second);
        if (w <= PathPlan::kSupportTol) continue;
        weights.push_back(w);
        atoms.push_back(&path);
        e.base += w * action_cost(path, base);
    }
    for (std::size_t u = 0; u < atoms.size(); ++u) {
        for (std::size_t v = 0; v < atoms.size(); ++v) {
            e.quadratic += weights[u] * weights[v] * kernel_value(*atoms[u], *atoms[v], params);
        }
    }
    e.total = e.base + e.quadratic;
    return e;
}

namespace {

double table_sup_change(const std::map<std::pair<int, int>, DiscretePath>& a,
                        const std::map<std::pair<int, int>, DiscretePath>& b) {
    double worst = 0.0;
    for (const auto& [key, path] : a) {
        const auto it = b.find(key);
        if (it == b.end()) continue;
        worst = std::max(worst, path.sup_distance(it->second));
    }
    return worst;
}

}  // namespace

ProblemBResult solve_problem_b(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                               const PotentialPtr& base, const InteractionParams& params,
                               const GridPtr& grid, const ProblemBOptions& opts) {
    validate(params);
    if (!base) throw std::invalid_argument("solve_problem_b: null base potential");
    if (!(opts.damping > 0.0 && opts.damping <= 1.0)) {
        throw std::invalid_argument("solve_problem_b: damping must lie in (0, 1]");
    }
    if (opts.tol <= 0.0) throw std::invalid_argument("solve_problem_b: tol must be positive");
    if (opts.max_outer < 1) {
        throw std::invalid_argument("solve_problem_b: max_outer must be >= 1");
    }
    const double path_tol = 0.1 * opts.tol;

    ProblemBResult res;

    // Non-interacting warm start: optimal plan for the base potential alone.
    EndpointCostTable table = assemble_endpoint_cost_matrix(mu0, mu1, *base, grid, opts.bvp);
    TransportSolution sol = solve_exact(table.cost);
    res.plan = assemble_plan(sol.coupling, table.paths, mu0, mu1, grid);
    res.duals = sol.duals;
    {
        const auto e0 = total_energy(res.plan, *base, params);
        res.trace.push_back({0, e0.total, e0.base, e0.quadratic, 0.0, 0.0});
    }

    for (int k = 1; k <= opts.max_outer; ++k) {
        EndpointCostTable next_table = effective_cost_matrix(res.plan, base, params, grid, opts.bvp);
        sol = solve_exact(next_table.cost);

        Coupling mixed{(1.0 - opts.damping) * res.plan.coupling.matrix +
                       opts.damping * sol.coupling.matrix};
        const double coupling_change =
            (mixed.matrix - res.plan.coupling.matrix).array().abs().sum();
        const double path_change = table_sup_change(next_table.paths, table.paths);

        res.plan = assemble_plan(mixed, next_table.paths, mu0, mu1, grid);
        res.duals = sol.duals;
        res.outer_iterations = k;
        table = std::move(next_table);

        const auto e = total_energy(res.plan, *base, params);
        res.trace.push_back({k, e.total, e.base, e.quadratic, coupling_change, path_change});

        if (coupling_change <= opts.tol && path_change <= path_tol) {
            res.converged = true;
            break;
        }
    }
    if (!res.converged) {
        throw NonConvergenceError("solve_problem_b: no fixed point within " +
                                      std::to_string(opts.max_outer) + " outer iterations",
                                  res.trace);
    }

    // Re-score the converged plan against its own effective cost.
    EndpointCostTable final_table = effective_cost_matrix(res.plan, base, params, grid, opts.bvp);
    const TransportSolution best = solve_exact(final_table.cost);
    res.duals = best.duals;

    SelfConsistencyCertificate& cert = res.certificate;
    cert.best_response_change =
        (best.coupling.matrix - res.plan.coupling.matrix).array().abs().sum();
    cert.duality_gap = duality_gap(res.plan.coupling, best.duals, final_table.cost);

    double feas = 0.0, support_gap = 0.0, excess = 0.0;
    const PotentialPtr eff = effective_potential(res.plan, params);
    const SumPotential combined(std::vector<PotentialPtr>{base, eff});
    for (int i = 0; i < final_table.cost.entries.rows(); ++i) {
        for (int j = 0; j < final_table.cost.entries.cols(); ++j) {
            const double slack =
                best.duals.phi[i] + best.duals.psi[j] - final_table.cost.entries(i, j);
            feas = std::max(feas, slack);
            if (res.plan.coupling.matrix(i, j) > PathPlan::kSupportTol) {
                support_gap = std::max(support_gap, std::abs(slack));
                const auto it = res.plan.paths.find({i, j});
                excess = std::max(excess, std::abs(action_cost(it->second, combined) -
                                                   final_table.cost.entries(i, j)));
            }
        }
    }
    cert.kkt_max_violation = std::max(feas, support_gap);
    cert.minimality_excess = excess;
    cert.self_consistent =
        cert.duality_gap <= 1e-8 && cert.kkt_max_violation <= 1e-8 && excess <= 1e-8;
    return res;
}

KktReport kkt_audit(const PathPlan& plan, const DualPotentials& duals,
                    const PotentialPtr& base, const InteractionParams& params,
                    const BvpOptions& opts) {
    const EndpointCostTable table = effective_cost_matrix(plan, base, params, plan.grid, opts);
    KktReport rep;
    double primal = 0.0;
    for (int i = 0; i < table.cost.entries.rows(); ++i) {
        for (int j = 0; j < table.cost.entries.cols(); ++j) {
            const double slack = duals.phi[i] + duals.psi[j] - table.cost.entries(i, j);
            rep.max_feasibility_violation = std::max(rep.max_feasibility_violation, slack);
            const double mass = plan.coupling.matrix(i, j);
            if (mass > PathPlan::kSupportTol) {
                rep.max_support_gap = std::max(rep.max_support_gap, std::abs(slack));
            }
            primal += mass * table.cost.entries(i, j);
        }
    }
    const double dual = duals.phi.dot(plan.source.weights()) + duals.psi.dot(plan.target.weights());
    rep.duality_gap = primal - dual;
    rep.ok = rep.max_feasibility_violation <= 1e-8 && rep.max_support_gap <= 1e-8;
    return rep;
}

ConvexityProbeReport convexity_probe(const PathPlan& plan_a, const PathPlan& plan_b,
                                     const Potential& base, const InteractionParams& params,
                                     int samples) {
    validate(params);
    if (samples < 2) throw std::invalid_argument("convexity_probe: need at least 2 samples");
    if (plan_a.grid->intervals() != plan_b.grid->intervals()) {
        throw std::invalid_argument("convexity_probe: plans use different grids");
    }
    if (plan_a.source.size() != plan_b.source.size() ||
        plan_a.target.size() != plan_b.target.size() ||
        (plan_a.source.weights() - plan_b.source.weights()).lpNorm<Eigen::Infinity>() > 1e-10 ||
        (plan_a.target.weights() - plan_b.target.weights()).lpNorm<Eigen::Infinity>() > 1e-10) {
        throw std::invalid_argument("convexity_probe: plans carry different marginals");
    }

    // Atoms of the mixture: plan A's paths fade out as s grows, plan B's fade in.
    struct Atom {
        double mass;
        bool from_a;
        const DiscretePath* path;
    };
    std::vector<Atom> atoms;
    for (const auto& [key, path] : plan_a.paths) {
        const double w = plan_a.coupling.matrix(key.first, key.second);
        if (w > PathPlan::kSupportTol) atoms.push_back({w, true, &path});
    }
    for (const auto& [key, path] : plan_b.paths) {
        const double w = plan_b.coupling.matrix(key.first, key.second);
        if (w > PathPlan::kSupportTol) atoms.push_back({w, false, &path});
    }

    const int n = static_cast<int>(atoms.size());
    std::vector<double> action(n);
    Mat gram(n, n);
    for (int u = 0; u < n; ++u) {
        action[u] = action_cost(*atoms[u].path, base);
        for (int v = 0; v <= u; ++v) {
            gram(u, v) = gram(v, u) = kernel_value(*atoms[u].path, *atoms[v].path, params);
        }
    }

    std::vector<double> base_term(samples + 1), quad_term(samples + 1);
    std::vector<double> w(n);
    for (int k = 0; k <= samples; ++k) {
        const double s = static_cast<double>(k) / samples;
        for (int u = 0; u < n; ++u) w[u] = atoms[u].mass * (atoms[u].from_a ? 1.0 - s : s);
        double eb = 0.0, eq = 0.0;
        for (int u = 0; u < n; ++u) {
            eb += w[u] * action[u];
            for (int v = 0; v < n; ++v) eq += w[u] * w[v] * gram(u, v);
        }
        base_term[k] = eb;
        quad_term[k] = eq;
    }

    ConvexityProbeReport rep;
    rep.samples = samples + 1;
    rep.min_quadratic_second_difference = std::numeric_limits<double>::infinity();
    for (int k = 1; k < samples; ++k) {
        const double d2q = quad_term[k - 1] - 2.0 * quad_term[k] + quad_term[k + 1];
        const double d2b = base_term[k - 1] - 2.0 * base_term[k] + base_term[k + 1];
        rep.min_quadratic_second_difference =
            std::min(rep.min_quadratic_second_difference, d2q);
        rep.max_abs_base_second_difference =
            std::max(rep.max_abs_base_second_difference, std::abs(d2b));
    }
    rep.ok = rep.min_quadratic_second_difference >= -1e-9;
    return rep;
}

double theta0_bound(int d) {
    if (d < 1) throw std::invalid_argument("theta0_bound: dimension must be >= 1");
    return std::exp2(-1.25 * std::log2(static_cast<double>(d)) - 0.5);
}

TzLipschitzReport tz_lipschitz_check(int samples, int d, std::uint64_t seed) {
    if (samples < 1 || d < 1) {
        throw std::invalid_argument("tz_lipschitz_check: samples and d must be positive");
    }
    Rng rng(seed);
    TzLipschitzReport rep;
    rep.bound = static_cast<double>(d) * d;
    rep.samples = samples;
    const auto tz = [](const Vec& w, const Vec& z) {
        const Vec dw = w - z;
        return Vec(std::exp(-dw.squaredNorm()) * dw);
    };
    for (int k = 0; k < samples; ++k) {
        const Vec w = rng.point(d, -3.0, 3.0);
        const Vec u = rng.point(d, -3.0, 3.0);
        const Vec z = rng.point(d, -3.0, 3.0);
        const double dist = (w - u).norm();
        if (dist < 1e-12) continue;
        const double ratio = (tz(w, z) - tz(u, z)).norm() / dist;
        rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
    rep.ok = rep.max_ratio <= rep.bound;
    return rep;
}

double twist_margin_effective(const Vec& x1, const Vec& x2, const Vec& y,
                              const PathPlan& plan, const InteractionParams& params,
                              const GridPtr& grid, const BvpOptions& opts) {
    validate(params);
    if ((x1 - x2).norm() == 0.0) {
        throw std::invalid_argument("twist_margin_effective: x1 and x2 must differ");
    }
    const int d = static_cast<int>(x1.size());
    if (params.kernel == KernelKind::gaussian) {
        if (params.beta != 1.0) {
            throw std::invalid_argument("twist_margin_effective: requires beta == 1");
        }
        if (params.theta >= theta0_bound(d)) {
            throw std::invalid_argument(
                "twist_margin_effective: theta must be below theta0_bound(d) = " +
                std::to_string(theta0_bound(d)));
        }
    }

    const PotentialPtr zero = std::make_shared<ZeroPotential>();
    const PotentialPtr eff = effective_potential(plan, params);
    const SumPotential combined(std::vector<PotentialPtr>{zero, eff});

    const double h = 1e-5;
    const auto cost_at = [&](const Vec& x, const Vec& yy) {
        return action_cost(solve_bvp(x, yy, combined, grid, opts).path, combined);
    };
    const auto fd_grad = [&](const Vec& x) {
        Vec g(d);
        Vec yp = y, ym = y;
        for (int k = 0; k < d; ++k) {
            yp[k] = y[k] + h;
            ym[k] = y[k] - h;
            g[k] = (cost_at(x, yp) - cost_at(x, ym)) / (2.0 * h);
            yp[k] = y[k];
            ym[k] = y[k];
        }
        return g;
    };
    return (fd_grad(x1) - fd_grad(x2)).norm();
}

}  // namespace pathot
