#include "pathot/verify.hpp"

#include "pathot/endpoint.hpp"
#include "pathot/interaction.hpp"
#include "pathot/transport_map.hpp"

#include <algorithm>
#include <cmath>

namespace pathot {

std::string to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::pass: return "pass";
        case CheckStatus::fail: return "fail";
        case CheckStatus::uncertified: return "uncertified";
    }
    return "fail";
}

namespace {

struct Sampler {
    Rng rng;
    Vec lo;
    Vec hi;

    Vec draw() {
        Vec p(lo.size());
        for (int k = 0; k < lo.size(); ++k) p[k] = rng.uniform(lo[k], hi[k]);
        return p;
    }
};

Sampler make_sampler(const InstanceSpec& spec) {
    const int d = spec.dimension;
    Vec lo = Vec::Constant(d, -1.0), hi = Vec::Constant(d, 1.0);
    const auto widen = [&](const Mat& pts) {
        for (int i = 0; i < pts.rows(); ++i) {
            for (int k = 0; k < d; ++k) {
                lo[k] = std::min(lo[k], pts(i, k) - 0.5);
                hi[k] = std::max(hi[k], pts(i, k) + 0.5);
            }
        }
    };
    widen(spec.source_points);
    widen(spec.target_points);
    return Sampler{Rng(spec.solver.seed), lo, hi};
}

double sup_gradient_norm(const PotentialSpec& pspec, const Potential& pot) {
    switch (pspec.kind) {
        case PotentialSpec::Kind::zero:
            return 0.0;
        case PotentialSpec::Kind::linear_gradient:
            return pspec.gradient.norm();
        case PotentialSpec::Kind::gaussian_well:
            // |grad| = |depth| r / w^2 exp(-r^2 / (2 w^2)), maximal at r = w.
            return std::abs(pspec.depth) / pspec.width * std::exp(-0.5);
        case PotentialSpec::Kind::custom_table: {
            // Interpolated gradients are convex combinations of node entries.
            const int d = static_cast<int>(pspec.origin.size());
            double worst = 0.0;
            const std::size_t nodes = pspec.gradients.size() / d;
            for (std::size_t n = 0; n < nodes; ++n) {
                double sq = 0.0;
                for (int k = 0; k < d; ++k) {
                    sq += pspec.gradients[n * d + k] * pspec.gradients[n * d + k];
                }
                worst = std::max(worst, std::sqrt(sq));
            }
            (void)pot;
            return worst;
        }
    }
    return 0.0;
}

PathPlan single_pair_plan(const Vec& x, const Vec& y, const GridPtr& grid) {
    const Mat px = x.transpose(), py = y.transpose();
    const Vec one = Vec::Ones(1);
    PathPlan plan{Coupling{Mat::Ones(1, 1)}, {}, DiscreteMeasure(px, one),
                  DiscreteMeasure(py, one), grid};
    plan.paths.emplace(std::make_pair(0, 0), linear_path(x, y, grid));
    return plan;
}

}  // namespace

std::vector<CheckResult> run_verification(const InstanceSpec& spec) {
    std::vector<CheckResult> out;
    const GridPtr grid = make_grid(spec.grid_m);
    const PotentialPtr pot = build_potential(spec.potential, spec.dimension);
    const double L = pot->lipschitz_L();
    const double K = pot->bound_K();
    const double h2 = 10.0 / (static_cast<double>(spec.grid_m) * spec.grid_m);
    BvpOptions bvp_opts{spec.solver.tol, spec.solver.max_iter};
    Sampler sampler = make_sampler(spec);

    const auto push = [&](const std::string& name, CheckStatus st, double obs, double allowed,
                          const std::string& note = "") {
        out.push_back({name, st, obs, allowed, note});
    };
    const auto push_bound = [&](const std::string& name, double obs, double allowed,
                                const std::string& note = "") {
        push(name, obs <= allowed ? CheckStatus::pass : CheckStatus::fail, obs, allowed, note);
    };

    {  // quadrature weights reproduce total time 1
        double sum = 0.0;
        for (int j = 0; j <= spec.grid_m; ++j) sum += grid->weight(j);
        push_bound("grid-weight-sum", std::abs(sum - 1.0), 1e-15);
    }

    if (spec.potential.kind == PotentialSpec::Kind::custom_table) {
        push("potential-gradient-consistency", CheckStatus::uncertified, 0.0, 1e-5,
             "tabulated gradients are interpolated data, not derivatives of the "
             "interpolated values");
    } else {
        const auto rep = check_gradient(*pot, spec.dimension, 25,
                                        spec.solver.seed ^ 0x9e3779b97f4a7c15ull);
        push_bound("potential-gradient-consistency", rep.max_rel_error, 1e-5);
    }

    if (L >= 1.0) {
        push("bvp-contraction-decay", CheckStatus::uncertified, L, 0.5,
             "gradient Lipschitz bound >= 1: fixed-point solve not certified");
        push("bvp-stability", CheckStatus::uncertified, L, 1.0, "needs L < 1");
        push("endpoint-grad-fd", CheckStatus::uncertified, L, 1.0, "needs L < 1");
        push("holder-modulus", CheckStatus::uncertified, L, 1.0, "needs L < 1");
        push("linear-path-proximity", CheckStatus::uncertified, L, 1.0, "needs L < 1");
    } else {
        {  // update decay is monotone after the second sweep (certified for L <= 0.5)
            double worst_growth = 0.0;
            bool all_converged = true;
            for (int rep = 0; rep < 10; ++rep) {
                const auto r = solve_bvp(sampler.draw(), sampler.draw(), *pot, grid, bvp_opts);
                all_converged = all_converged && r.converged;
                for (std::size_t k = 2; k + 1 < r.changes.size(); ++k) {
                    worst_growth = std::max(worst_growth, r.changes[k + 1] - r.changes[k]);
                }
            }
            if (L <= 0.5) {
                push("bvp-contraction-decay",
                     all_converged && worst_growth <= 0.0 ? CheckStatus::pass : CheckStatus::fail,
                     worst_growth, 0.0);
            } else {
                push("bvp-contraction-decay", CheckStatus::uncertified, worst_growth, 0.0,
                     "monotone decay certified only for L <= 0.5");
            }
        }

        {  // endpoint perturbation stability
            double worst = -1e300;
            for (int rep = 0; rep < 15; ++rep) {
                const Vec x1 = sampler.draw(), y1 = sampler.draw();
                const Vec x2 = sampler.draw(), y2 = sampler.draw();
                const auto r1 = solve_bvp(x1, y1, *pot, grid, bvp_opts);
                const auto r2 = solve_bvp(x2, y2, *pot, grid, bvp_opts);
                const double bound =
                    ((x1 - x2).norm() + (y1 - y2).norm()) / (1.0 - L) + h2;
                worst = std::max(worst, r1.path.sup_distance(r2.path) - bound);
            }
            push_bound("bvp-stability", worst, 0.0,
                       "sup distance minus (|dx| + |dy|) / (1 - L) - 10 h^2");
        }

        {  // straight-line proximity under a small gradient
            const double delta = sup_gradient_norm(spec.potential, *pot);
            double worst = 0.0;
            for (int rep = 0; rep < 10; ++rep) {
                const Vec x = sampler.draw(), y = sampler.draw();
                const auto r = solve_bvp(x, y, *pot, grid, bvp_opts);
                worst = std::max(worst, r.path.sup_distance(linear_path(x, y, grid)));
            }
            push_bound("linear-path-proximity", worst,
                       std::sqrt(static_cast<double>(spec.dimension)) * delta + h2);
        }

        {  // analytic endpoint gradient against central differences
            double worst = 0.0;
            const double fd_h = 1e-5;
            for (int rep = 0; rep < 8; ++rep) {
                const Vec x = sampler.draw(), y = sampler.draw();
                const auto eval = endpoint_cost(x, y, *pot, grid, bvp_opts);
                Vec fd(spec.dimension);
                Vec yp = y, ym = y;
                for (int k = 0; k < spec.dimension; ++k) {
                    yp[k] = y[k] + fd_h;
                    ym[k] = y[k] - fd_h;
                    fd[k] = (endpoint_cost(x, yp, *pot, grid, bvp_opts).value -
                             endpoint_cost(x, ym, *pot, grid, bvp_opts).value) /
                            (2.0 * fd_h);
                    yp[k] = y[k];
                    ym[k] = y[k];
                }
                worst = std::max(worst, (eval.grad_y - fd).norm() / (1.0 + eval.grad_y.norm()));
            }
            push_bound("endpoint-grad-fd", worst, 1e-6);
        }

        {  // Holder-type modulus on solved paths
            double worst = -1e300;
            for (int rep = 0; rep < 8; ++rep) {
                const Vec x = sampler.draw(), y = sampler.draw();
                const auto r = solve_bvp(x, y, *pot, grid, bvp_opts);
                const double c = action_cost(r.path, *pot);
                const double mod = std::sqrt(2.0 * c + 2.0 * K + 1.0);
                for (int a = 0; a < grid->nodes(); a += 3) {
                    for (int b = a + 1; b < grid->nodes(); b += 3) {
                        const double dist = (r.path.points.row(a) - r.path.points.row(b)).norm();
                        const double dt = grid->node(b) - grid->node(a);
                        worst = std::max(worst, dist - mod * std::sqrt(dt));
                    }
                }
            }
            push_bound("holder-modulus", worst, 0.0,
                       "node distance minus sqrt(2 c + 2 K + 1) sqrt(dt)");
        }
    }

    if (L < 2.0 / 3.0) {  // endpoint gradient separation
        const double factor = 1.0 - 0.5 * L / (1.0 - L);
        double worst = -1e300;
        for (int rep = 0; rep < 10; ++rep) {
            const Vec x1 = sampler.draw();
            const Vec x2 = sampler.draw();
            if ((x1 - x2).norm() < 1e-8) continue;
            const Vec y = sampler.draw();
            const double margin = twist_margin(x1, x2, y, *pot, grid, bvp_opts);
            worst = std::max(worst, factor * (x1 - x2).norm() - h2 - margin);
        }
        push_bound("twist-margin", worst, 0.0,
                   "(1 - L/(2(1-L))) |x1 - x2| - 10 h^2 minus observed margin");
    } else {
        push("twist-margin", CheckStatus::uncertified, L, 2.0 / 3.0,
             "needs gradient Lipschitz bound below 2/3");
    }

    {  // kernel displacement field is d^2-Lipschitz
        const auto rep = tz_lipschitz_check(2000, spec.dimension, spec.solver.seed + 7);
        push_bound("tz-lipschitz", rep.max_ratio, rep.bound);
    }

    const bool interacting =
        spec.interaction.kernel == KernelKind::gaussian && spec.interaction.theta > 0.0;
    if (interacting) {
        const double theta = spec.interaction.theta;
        const double theta0 = theta0_bound(spec.dimension);

        {  // interacting path stays near the straight line
            double worst = 0.0;
            bool admissible = 4.0 * theta * spec.interaction.beta *
                                  interaction_lipschitz_factor() <
                              1.0;
            if (admissible) {
                for (int rep = 0; rep < 5; ++rep) {
                    const Vec x = sampler.draw(), y = sampler.draw();
                    const PathPlan plan = single_pair_plan(x, y, grid);
                    const auto eff = effective_potential(plan, spec.interaction);
                    const auto r = solve_bvp(x, y, *eff, grid, bvp_opts);
                    worst = std::max(worst, r.path.sup_distance(linear_path(x, y, grid)));
                }
                push_bound("effective-path-proximity", worst,
                           std::sqrt(static_cast<double>(spec.dimension)) * theta + h2);
            } else {
                push("effective-path-proximity", CheckStatus::uncertified, 0.0, 0.0,
                     "interaction too strong for a contractive solve");
            }
        }

        if (spec.interaction.beta == 1.0 && theta < theta0) {
            const double factor =
                1.0 - 2.0 * std::pow(static_cast<double>(spec.dimension), 2.5) * theta * theta;
            double worst = -1e300;
            for (int rep = 0; rep < 3; ++rep) {
                const Vec x1 = sampler.draw();
                Vec x2 = sampler.draw();
                if ((x1 - x2).norm() < 1e-8) x2[0] += 0.5;
                const Vec y = sampler.draw();
                const PathPlan plan = single_pair_plan(sampler.draw(), sampler.draw(), grid);
                const double margin =
                    twist_margin_effective(x1, x2, y, plan, spec.interaction, grid, bvp_opts);
                worst = std::max(worst,
                                 factor * (x1 - x2).norm() - h2 - 1e-4 - margin);
            }
            push_bound("effective-twist-margin", worst, 0.0,
                       "(1 - 2 d^{5/2} theta^2) |x1 - x2| - 10 h^2 - 1e-4 minus observed");
        } else {
            push("effective-twist-margin", CheckStatus::uncertified, theta, theta0,
                 "needs beta == 1 and theta below the certified threshold");
        }
    }

    if (spec.interaction.kernel != KernelKind::coulomb || spec.interaction.coulomb_smoothing > 0.0) {
        // energy convexity along plan mixtures: product coupling vs optimal
        try {
            const DiscreteMeasure mu0 = source_measure(spec);
            const DiscreteMeasure mu1 = target_measure(spec);
            if (L < 1.0) {
                const auto table = assemble_endpoint_cost_matrix(mu0, mu1, *pot, grid, bvp_opts);
                const auto sol = solve_exact(table.cost);
                PathPlan opt{sol.coupling, {}, mu0, mu1, grid};
                PathPlan prod{Coupling{mu0.weights() * mu1.weights().transpose()}, {}, mu0, mu1,
                              grid};
                for (const auto& [key, path] : table.paths) {
                    if (sol.coupling.matrix(key.first, key.second) > PathPlan::kSupportTol) {
                        opt.paths.emplace(key, path);
                    }
                    prod.paths.emplace(key, path);
                }
                const auto probe = convexity_probe(prod, opt, *pot, spec.interaction, 20);
                push("convexity-probe",
                     probe.ok ? CheckStatus::pass : CheckStatus::fail,
                     probe.min_quadratic_second_difference, -1e-9,
                     "minimum mixture second difference (must be >= -1e-9)");
            } else {
                push("convexity-probe", CheckStatus::uncertified, L, 1.0, "needs L < 1");
            }
        } catch (const ParseError& e) {
            push("convexity-probe", CheckStatus::fail, 0.0, 0.0, e.what());
        }
    }

    return out;
}

}  // namespace pathot
