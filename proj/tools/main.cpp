// Command-line driver: minimal-path solves, transport solves with audits, and
// the instance-scale invariant battery. All numeric output is written with 17
// significant digits and no timestamps, so identical instances and seeds
// produce byte-identical files.

#include "pathot/bvp.hpp"
#include "pathot/endpoint.hpp"
#include "pathot/instance.hpp"
#include "pathot/interaction.hpp"
#include "pathot/lp.hpp"
#include "pathot/transport_map.hpp"
#include "pathot/verify.hpp"

#include <CLI11.hpp>

#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace pathot;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 1;
constexpr int kExitDivergence = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitVerifyFailed = 4;

struct CommonArgs {
    std::string instance;
    std::string out = ".";
    int grid_m = 0;
    double tol = 0.0;
    double theta = 0.0;
    double beta = 0.0;
    double damping = 0.0;
    std::uint64_t seed = 0;
    int max_cycle = 0;

    CLI::Option* grid_m_opt = nullptr;
    CLI::Option* tol_opt = nullptr;
    CLI::Option* theta_opt = nullptr;
    CLI::Option* beta_opt = nullptr;
    CLI::Option* damping_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* max_cycle_opt = nullptr;
};

void add_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("--instance", args.instance, "instance file (JSON)")->required();
    sub->add_option("--out", args.out, "output directory (created if missing)");
    args.grid_m_opt = sub->add_option("--grid-m", args.grid_m, "override time grid intervals");
    args.tol_opt = sub->add_option("--tol", args.tol, "override fixed-point tolerance");
    args.theta_opt = sub->add_option("--theta", args.theta, "override interaction strength");
    args.beta_opt = sub->add_option("--beta", args.beta, "override gaussian decay rate");
    args.damping_opt = sub->add_option("--damping", args.damping, "override best-response damping");
    args.seed_opt = sub->add_option("--seed", args.seed, "override audit seed");
    args.max_cycle_opt =
        sub->add_option("--max-cycle", args.max_cycle, "override monotonicity audit depth");
}

void apply_overrides(InstanceSpec& spec, const CommonArgs& args) {
    if (*args.grid_m_opt) spec.grid_m = args.grid_m;
    if (*args.tol_opt) spec.solver.tol = args.tol;
    if (*args.theta_opt) {
        spec.interaction.theta = args.theta;
        // theta selects the problem: a positive override on a non-interacting
        // instance switches on the default (gaussian) kernel.
        if (args.theta > 0.0 && spec.interaction.kernel == KernelKind::none) {
            spec.interaction.kernel = KernelKind::gaussian;
        }
    }
    if (*args.beta_opt) spec.interaction.beta = args.beta;
    if (*args.damping_opt) spec.solver.damping = args.damping;
    if (*args.seed_opt) spec.solver.seed = args.seed;
    if (*args.max_cycle_opt) spec.solver.max_cycle = args.max_cycle;
    if (spec.grid_m < 2) throw ParseError("grid_m", "must be >= 2");
    if (spec.solver.tol <= 0.0) throw ParseError("solver.tol", "must be positive");
    if (!(spec.solver.damping > 0.0 && spec.solver.damping <= 1.0)) {
        throw ParseError("solver.damping", "must lie in (0, 1]");
    }
    if (spec.solver.max_cycle < 2 || spec.solver.max_cycle > 6) {
        throw ParseError("solver.max_cycle", "must lie in [2, 6]");
    }
    try {
        validate(spec.interaction);
    } catch (const std::invalid_argument& e) {
        throw ParseError("interaction", e.what());
    }
}

Vec parse_point(const std::string& text, int dim, const std::string& flag) {
    std::vector<double> coords;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            coords.push_back(std::stod(item, &used));
            while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) {
                ++used;
            }
            if (used != item.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw ParseError(flag, "'" + item + "' is not a number");
        }
    }
    if (static_cast<int>(coords.size()) != dim) {
        throw ParseError(flag, "expected " + std::to_string(dim) + " comma-separated coordinates");
    }
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v(i) = coords[i];
    return v;
}

std::ofstream open_output(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    return out;
}

void write_matrix(std::ostream& out, const Mat& m) {
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            out << (j ? " " : "") << fmt17(m(i, j));
        }
        out << "\n";
    }
}

void write_vector_line(std::ostream& out, const Vec& v) {
    for (int i = 0; i < v.size(); ++i) out << (i ? " " : "") << fmt17(v(i));
    out << "\n";
}

void write_paths(std::ostream& out, const PathPlan& plan) {
    out << "# i j weight samples[(m+1) x d, row-major]\n";
    for (const auto& [key, path] : plan.paths) {
        out << key.first << " " << key.second << " "
            << fmt17(plan.coupling.matrix(key.first, key.second));
        for (int r = 0; r < path.points.rows(); ++r) {
            for (int c = 0; c < path.points.cols(); ++c) out << " " << fmt17(path.points(r, c));
        }
        out << "\n";
    }
}

// ---------------------------------------------------------------------------
// minpath

int cmd_minpath(const CommonArgs& args, const std::string& x_text, const std::string& y_text) {
    InstanceSpec spec = load_instance_file(args.instance);
    apply_overrides(spec, args);
    const Vec x = parse_point(x_text, spec.dimension, "x");
    const Vec y = parse_point(y_text, spec.dimension, "y");
    const auto V = build_potential(spec.potential, spec.dimension);
    const auto grid = make_grid(spec.grid_m);
    const BvpOptions opts{spec.solver.tol, spec.solver.max_iter};

    const auto write_report = [&](const BvpSolveReport& rep, bool diverged) {
        auto report = open_output(args.out, "report.txt");
        report << "command = minpath\n";
        report << "converged = " << (rep.converged ? "true" : "false") << "\n";
        report << "diverged = " << (diverged ? "true" : "false") << "\n";
        report << "iterations = " << rep.iterations << "\n";
        report << "final_change = " << fmt17(rep.final_change) << "\n";
        report << "stationarity_residual = " << fmt17(rep.newton_residual) << "\n";
        report << "contraction_warning = " << (rep.contraction_warning ? "true" : "false") << "\n";
        if (rep.converged) {
            report << "action = " << fmt17(action_cost(rep.path, *V)) << "\n";
        }
    };

    try {
        const auto rep = solve_bvp(x, y, *V, grid, opts);
        auto path_file = open_output(args.out, "path.txt");
        path_file << "# t then " << spec.dimension << " coordinates per row\n";
        for (int j = 0; j < grid->nodes(); ++j) {
            path_file << fmt17(grid->node(j));
            for (int c = 0; c < rep.path.points.cols(); ++c) {
                path_file << " " << fmt17(rep.path.points(j, c));
            }
            path_file << "\n";
        }
        write_report(rep, false);
        std::cout << "converged in " << rep.iterations << " iterations; wrote "
                  << (fs::path(args.out) / "path.txt").string() << " and report.txt\n";
        return kExitOk;
    } catch (const BvpDivergenceError& e) {
        write_report(e.report(), true);
        std::cerr << "solver diverged: " << e.what() << "\n";
        return kExitDivergence;
    }
}

// ---------------------------------------------------------------------------
// solve

void write_common_report(std::ostream& report, const InstanceSpec& spec, const PathPlan& plan,
                         const DualPotentials& duals, const CostMatrix& cost) {
    const double primal = (plan.coupling.matrix.array() * cost.entries.array()).sum();
    const double dual = duals.phi.dot(cost.source.weights()) + duals.psi.dot(cost.target.weights());
    report << "dimension = " << spec.dimension << "\n";
    report << "grid_m = " << spec.grid_m << "\n";
    report << "source_atoms = " << cost.source.size() << "\n";
    report << "target_atoms = " << cost.target.size() << "\n";
    report << "primal_value = " << fmt17(primal) << "\n";
    report << "dual_value = " << fmt17(dual) << "\n";
    report << "duality_gap = " << fmt17(duality_gap(plan.coupling, duals, cost)) << "\n";

    const auto mono =
        check_cyclical_monotonicity(plan.coupling, cost, spec.solver.max_cycle);
    report << "monotonicity_max_cycle = " << spec.solver.max_cycle << "\n";
    report << "monotonicity_combinations = " << mono.combinations_checked << "\n";
    report << "monotonicity_violations = " << mono.violations.size() << "\n";

    try {
        const auto map = extract_map(plan, &cost);
        report << "map_like = true\n";
        report << "monge_value = " << fmt17(map.monge_value) << "\n";
    } catch (const NonDeterministicPlanError& e) {
        report << "map_like = false\n";
        report << "split_rows =";
        for (int r : e.split_rows()) report << " " << r;
        report << "\n";
    }
}

int cmd_solve(const CommonArgs& args) {
    InstanceSpec spec = load_instance_file(args.instance);
    apply_overrides(spec, args);

    // Marginals must carry equal (unit) mass before anything is solved.
    for (const char* side : {"source", "target"}) {
        const Vec& w = side == std::string("source") ? spec.source_weights : spec.target_weights;
        if (std::abs(w.sum() - 1.0) > 1e-12) {
            std::cerr << "infeasible marginals: " << side << " weights sum to " << fmt17(w.sum())
                      << ", expected 1\n";
            return kExitInfeasible;
        }
    }

    const DiscreteMeasure mu0 = source_measure(spec);
    const DiscreteMeasure mu1 = target_measure(spec);
    const auto base = build_potential(spec.potential, spec.dimension);
    const auto grid = make_grid(spec.grid_m);
    const BvpOptions bvp{spec.solver.tol, spec.solver.max_iter};
    const bool interacting =
        spec.interaction.kernel != KernelKind::none && spec.interaction.theta > 0.0;

    try {
        if (!interacting) {
            const auto table = assemble_endpoint_cost_matrix(mu0, mu1, *base, grid, bvp);
            const auto sol = solve_exact(table.cost);
            const auto plan = assemble_plan(sol.coupling, table.paths, mu0, mu1, grid);

            auto coupling = open_output(args.out, "coupling.txt");
            write_matrix(coupling, plan.coupling.matrix);
            auto duals = open_output(args.out, "duals.txt");
            write_vector_line(duals, sol.duals.phi);
            write_vector_line(duals, sol.duals.psi);
            auto paths = open_output(args.out, "paths.txt");
            write_paths(paths, plan);

            auto report = open_output(args.out, "report.txt");
            report << "command = solve\n";
            report << "problem = A\n";
            write_common_report(report, spec, plan, sol.duals, table.cost);
            report << "lp_pivots = " << sol.pivots << "\n";

            const auto minimality = minimality_audit(plan, *base);
            report << "minimality_excess = " << fmt17(minimality.max_excess) << "\n";
            report << "minimality_ok = " << (minimality.ok ? "true" : "false") << "\n";
            std::cout << "problem A solved; outputs in " << fs::path(args.out).string() << "\n";
            return kExitOk;
        }

        ProblemBOptions opts;
        opts.damping = spec.solver.damping;
        opts.tol = spec.solver.outer_tol;
        opts.max_outer = spec.solver.max_outer;
        opts.bvp = bvp;
        const auto res = solve_problem_b(mu0, mu1, base, spec.interaction, grid, opts);

        auto coupling = open_output(args.out, "coupling.txt");
        write_matrix(coupling, res.plan.coupling.matrix);
        auto duals = open_output(args.out, "duals.txt");
        write_vector_line(duals, res.duals.phi);
        write_vector_line(duals, res.duals.psi);
        auto paths = open_output(args.out, "paths.txt");
        write_paths(paths, res.plan);
        auto trace = open_output(args.out, "trace.txt");
        trace << "# iteration energy_total energy_base energy_quadratic coupling_change\n";
        for (const auto& row : res.trace) {
            trace << row.iteration << " " << fmt17(row.energy_total) << " "
                  << fmt17(row.energy_base) << " " << fmt17(row.energy_quadratic) << " "
                  << fmt17(row.coupling_change) << "\n";
        }

        const auto table = effective_cost_matrix(res.plan, base, spec.interaction, grid, bvp);
        auto report = open_output(args.out, "report.txt");
        report << "command = solve\n";
        report << "problem = B\n";
        report << "theta = " << fmt17(spec.interaction.theta) << "\n";
        report << "beta = " << fmt17(spec.interaction.beta) << "\n";
        report << "damping = " << fmt17(spec.solver.damping) << "\n";
        write_common_report(report, spec, res.plan, res.duals, table.cost);
        report << "outer_iterations = " << res.outer_iterations << "\n";
        report << "converged = " << (res.converged ? "true" : "false") << "\n";
        report << "certificate_duality_gap = " << fmt17(res.certificate.duality_gap) << "\n";
        report << "certificate_kkt_max_violation = " << fmt17(res.certificate.kkt_max_violation)
               << "\n";
        report << "certificate_minimality_excess = " << fmt17(res.certificate.minimality_excess)
               << "\n";
        report << "certificate_best_response_change = "
               << fmt17(res.certificate.best_response_change) << "\n";
        report << "self_consistent = " << (res.certificate.self_consistent ? "true" : "false")
               << "\n";
        std::cout << "problem B solved in " << res.outer_iterations << " outer iterations; "
                  << "outputs in " << fs::path(args.out).string() << "\n";
        return kExitOk;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible marginals: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const NonConvergenceError& e) {
        std::cerr << "solver did not converge: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const BvpDivergenceError& e) {
        std::cerr << "solver diverged: " << e.what() << "\n";
        return kExitDivergence;
    }
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(const CommonArgs& args) {
    InstanceSpec spec = load_instance_file(args.instance);
    apply_overrides(spec, args);
    const auto checks = run_verification(spec);

    auto report = open_output(args.out, "report.txt");
    report << "command = verify\n";
    int failed = 0;
    for (const auto& c : checks) {
        std::ostringstream line;
        line << c.name << ": " << to_string(c.status) << " observed=" << fmt17(c.observed)
             << " allowed=" << fmt17(c.allowed);
        if (!c.note.empty()) line << "  # " << c.note;
        report << line.str() << "\n";
        std::cout << line.str() << "\n";
        if (c.status == CheckStatus::fail) ++failed;
    }
    report << "checks = " << checks.size() << "\n";
    report << "failed = " << failed << "\n";
    std::cout << (failed == 0 ? "all bounds hold" : "some bounds FAILED") << " (" << checks.size()
              << " checks)\n";
    return failed == 0 ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"discrete optimal transport on path space"};
    app.require_subcommand(1);

    CommonArgs minpath_args, solve_args, verify_args;
    std::string x_text, y_text;

    auto* minpath = app.add_subcommand("minpath", "solve one boundary value problem");
    add_common(minpath, minpath_args);
    minpath->add_option("--x", x_text, "start point, comma-separated")->required();
    minpath->add_option("--y", y_text, "end point, comma-separated")->required();

    auto* solve = app.add_subcommand("solve", "solve the transport problem with audits");
    add_common(solve, solve_args);

    auto* verify = app.add_subcommand("verify", "run the invariant battery at instance scale");
    add_common(verify, verify_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (minpath->parsed()) return cmd_minpath(minpath_args, x_text, y_text);
        if (solve->parsed()) return cmd_solve(solve_args);
        if (verify->parsed()) return cmd_verify(verify_args);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid instance: " << e.what() << "\n";
        return kExitParse;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }
    return kExitOk;
}
