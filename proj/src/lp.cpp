#include "pathot/lp.hpp"

#include "pathot/bvp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

namespace pathot {

PathPlan assemble_plan(const Coupling& coupling,
                       const std::map<std::pair<int, int>, DiscretePath>& paths,
                       const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                       const GridPtr& grid) {
    PathPlan plan{coupling, {}, mu0, mu1, grid};
    for (int i = 0; i < coupling.matrix.rows(); ++i) {
        for (int j = 0; j < coupling.matrix.cols(); ++j) {
            if (coupling.matrix(i, j) <= PathPlan::kSupportTol) continue;
            const auto it = paths.find({i, j});
            if (it == paths.end()) {
                throw std::invalid_argument("assemble_plan: missing path for supported pair");
            }
            plan.paths.emplace(it->first, it->second);
        }
    }
    return plan;
}

double coupling_marginal_error(const Coupling& coupling, const DiscreteMeasure& mu0,
                               const DiscreteMeasure& mu1) {
    const Mat& P = coupling.matrix;
    if (P.rows() != mu0.size() || P.cols() != mu1.size()) {
        throw std::invalid_argument("coupling_marginal_error: shape mismatch");
    }
    double err = 0.0;
    if (P.minCoeff() < -1e-15) return std::numeric_limits<double>::infinity();
    for (int i = 0; i < P.rows(); ++i) err = std::max(err, std::abs(P.row(i).sum() - mu0.weight(i)));
    for (int j = 0; j < P.cols(); ++j) err = std::max(err, std::abs(P.col(j).sum() - mu1.weight(j)));
    return err;
}

double dual_feasibility_violation(const DualPotentials& duals, const CostMatrix& cost) {
    const Mat& C = cost.entries;
    if (duals.phi.size() != C.rows() || duals.psi.size() != C.cols()) {
        throw std::invalid_argument("dual_feasibility_violation: shape mismatch");
    }
    double worst = 0.0;
    for (int i = 0; i < C.rows(); ++i) {
        for (int j = 0; j < C.cols(); ++j) {
            worst = std::max(worst, duals.phi[i] + duals.psi[j] - C(i, j));
        }
    }
    return worst;
}

namespace {

// Weight perturbed by an infinitesimal: v + e * eps, compared lexicographically.
// Keeping the two components separate makes the perturbation exact and lets the
// final flows drop the eps part unchanged.
struct PVal {
    double v = 0.0;
    double e = 0.0;
};

PVal operator+(PVal a, PVal b) { return {a.v + b.v, a.e + b.e}; }
PVal operator-(PVal a, PVal b) { return {a.v - b.v, a.e - b.e}; }
bool pless(PVal a, PVal b) { return a.v < b.v || (a.v == b.v && a.e < b.e); }

constexpr double kReducedCostTol = 1e-11;

}  // namespace

TransportSolution solve_exact(const CostMatrix& cost) {
    const Mat& C = cost.entries;
    const int n0 = static_cast<int>(C.rows());
    const int n1 = static_cast<int>(C.cols());
    if (n0 != cost.source.size() || n1 != cost.target.size()) {
        throw std::invalid_argument("solve_exact: cost shape does not match measures");
    }
    const double mass_gap = std::abs(cost.source.weights().sum() - cost.target.weights().sum());
    if (mass_gap > 1e-10) {
        throw InfeasibleError("solve_exact: marginal masses differ by " + std::to_string(mass_gap));
    }

    // Perturbed marginals: each row gains eps, the last column absorbs n0 eps.
    std::vector<PVal> a(n0), b(n1);
    for (int i = 0; i < n0; ++i) a[i] = {cost.source.weight(i), 1.0};
    for (int j = 0; j < n1; ++j) b[j] = {cost.target.weight(j), 0.0};
    b[n1 - 1].e = static_cast<double>(n0);

    std::vector<std::vector<PVal>> flow(n0, std::vector<PVal>(n1, PVal{}));
    std::vector<std::vector<char>> basic(n0, std::vector<char>(n1, 0));

    // Northwest-corner start: a staircase spanning tree with n0 + n1 - 1 arcs.
    {
        int i = 0, j = 0;
        PVal ra = a[0], rb = b[0];
        while (true) {
            const PVal take = pless(ra, rb) ? ra : rb;
            flow[i][j] = take;
            basic[i][j] = 1;
            ra = ra - take;
            rb = rb - take;
            if (i == n0 - 1 && j == n1 - 1) break;
            const bool row_done = !pless(PVal{0.0, 0.0}, ra);  // ra <= 0
            if (row_done && i < n0 - 1) {
                ++i;
                ra = a[i];
            } else {
                ++j;
                rb = b[j];
            }
        }
    }

    const int total_nodes = n0 + n1;
    std::vector<double> phi(n0), psi(n1);
    std::vector<int> parent(total_nodes), parent_row(total_nodes), parent_col(total_nodes);

    auto recompute_duals = [&]() {
        std::vector<std::vector<int>> rows_of_col(n1), cols_of_row(n0);
        for (int i = 0; i < n0; ++i) {
            for (int j = 0; j < n1; ++j) {
                if (basic[i][j]) {
                    cols_of_row[i].push_back(j);
                    rows_of_col[j].push_back(i);
                }
            }
        }
        std::vector<char> seen(total_nodes, 0);
        std::queue<int> q;
        phi[0] = 0.0;
        seen[0] = 1;
        q.push(0);
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            if (u < n0) {
                for (int j : cols_of_row[u]) {
                    if (!seen[n0 + j]) {
                        psi[j] = C(u, j) - phi[u];
                        seen[n0 + j] = 1;
                        q.push(n0 + j);
                    }
                }
            } else {
                const int j = u - n0;
                for (int i : rows_of_col[j]) {
                    if (!seen[i]) {
                        phi[i] = C(i, j) - psi[j];
                        seen[i] = 1;
                        q.push(i);
                    }
                }
            }
        }
        for (int u = 0; u < total_nodes; ++u) {
            if (!seen[u]) throw std::logic_error("solve_exact: basis lost connectivity");
        }
    };

    // BFS through the tree from the entering arc's source node to its target
    // node; parent pointers reconstruct the unique cycle.
    auto find_path = [&](int si, int tj, std::vector<std::pair<int, int>>& cells) {
        std::fill(parent.begin(), parent.end(), -1);
        std::queue<int> q;
        q.push(si);
        parent[si] = si;
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            if (u == n0 + tj) break;
            if (u < n0) {
                for (int j = 0; j < n1; ++j) {
                    if (basic[u][j] && parent[n0 + j] < 0) {
                        parent[n0 + j] = u;
                        parent_row[n0 + j] = u;
                        parent_col[n0 + j] = j;
                        q.push(n0 + j);
                    }
                }
            } else {
                const int jj = u - n0;
                for (int i = 0; i < n0; ++i) {
                    if (basic[i][jj] && parent[i] < 0) {
                        parent[i] = u;
                        parent_row[i] = i;
                        parent_col[i] = jj;
                        q.push(i);
                    }
                }
            }
        }
        cells.clear();
        int u = n0 + tj;
        if (parent[u] < 0) throw std::logic_error("solve_exact: entering arc closes no cycle");
        while (u != si) {
            cells.emplace_back(parent_row[u], parent_col[u]);
            u = parent[u];
        }
        // cells[0] touches column tj, cells.back() touches row si; signs along
        // the closed cycle alternate -, +, -, ... after the entering +.
    };

    TransportSolution sol{Coupling{Mat::Zero(n0, n1)},
                          DualPotentials{Vec::Zero(n0), Vec::Zero(n1)}, 0.0, 0};

    const long long pivot_guard =
        4LL * static_cast<long long>(n0 + n1) * static_cast<long long>(n0) * n1 + 1000;
    std::vector<std::pair<int, int>> cells;
    while (true) {
        recompute_duals();

        // Bland entering rule: lexicographically first arc with negative
        // reduced cost. Guarantees no cycling even on degenerate bases.
        int ei = -1, ej = -1;
        for (int i = 0; i < n0 && ei < 0; ++i) {
            for (int j = 0; j < n1; ++j) {
                if (!basic[i][j] && C(i, j) - phi[i] - psi[j] < -kReducedCostTol) {
                    ei = i;
                    ej = j;
                    break;
                }
            }
        }
        if (ei < 0) break;

        find_path(ei, ej, cells);

        PVal limit{std::numeric_limits<double>::infinity(), 0.0};
        int li = -1, lj = -1;
        for (std::size_t p = 0; p < cells.size(); ++p) {
            if (p % 2 != 0) continue;  // minus positions: 0, 2, 4, ...
            const auto [ci, cj] = cells[p];
            const PVal f = flow[ci][cj];
            if (pless(f, limit) ||
                (!pless(limit, f) && (li < 0 || ci < li || (ci == li && cj < lj)))) {
                limit = f;
                li = ci;
                lj = cj;
            }
        }
        if (li < 0) throw std::logic_error("solve_exact: unbounded pivot");

        for (std::size_t p = 0; p < cells.size(); ++p) {
            const auto [ci, cj] = cells[p];
            flow[ci][cj] = (p % 2 == 0) ? flow[ci][cj] - limit : flow[ci][cj] + limit;
        }
        flow[ei][ej] = limit;
        basic[ei][ej] = 1;
        basic[li][lj] = 0;
        flow[li][lj] = PVal{};

        if (++sol.pivots > pivot_guard) {
            throw std::logic_error("solve_exact: pivot guard tripped");
        }
    }

    for (int i = 0; i < n0; ++i) {
        for (int j = 0; j < n1; ++j) {
            double v = flow[i][j].v;
            if (std::abs(v) < 1e-15) v = 0.0;
            sol.coupling.matrix(i, j) = v;
        }
    }
    for (int i = 0; i < n0; ++i) sol.duals.phi[i] = phi[i];
    for (int j = 0; j < n1; ++j) sol.duals.psi[j] = psi[j];
    sol.value = (sol.coupling.matrix.array() * C.array()).sum();
    return sol;
}

double brute_force_oracle(const CostMatrix& cost) {
    const int n = static_cast<int>(cost.entries.rows());
    if (cost.entries.cols() != n) {
        throw std::invalid_argument("brute_force_oracle: needs equal-size marginals");
    }
    if (n > 8) {
        throw std::invalid_argument("brute_force_oracle: supports n <= 8, got " +
                                    std::to_string(n));
    }
    const double u = 1.0 / n;
    for (int i = 0; i < n; ++i) {
        if (std::abs(cost.source.weight(i) - u) > 1e-12 ||
            std::abs(cost.target.weight(i) - u) > 1e-12) {
            throw std::invalid_argument("brute_force_oracle: marginals must be uniform");
        }
    }
    std::vector<int> tau(n);
    std::iota(tau.begin(), tau.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (int i = 0; i < n; ++i) total += cost.entries(i, tau[i]);
        best = std::min(best, total);
    } while (std::next_permutation(tau.begin(), tau.end()));
    return best / n;
}

Vec c_transform(const Vec& phi, const CostMatrix& cost) {
    if (phi.size() != cost.entries.rows()) {
        throw std::invalid_argument("c_transform: phi size mismatch");
    }
    Vec out(cost.entries.cols());
    for (int j = 0; j < cost.entries.cols(); ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < cost.entries.rows(); ++i) {
            best = std::min(best, cost.entries(i, j) - phi[i]);
        }
        out[j] = best;
    }
    return out;
}

Vec c_transform_rev(const Vec& psi, const CostMatrix& cost) {
    if (psi.size() != cost.entries.cols()) {
        throw std::invalid_argument("c_transform_rev: psi size mismatch");
    }
    Vec out(cost.entries.rows());
    for (int i = 0; i < cost.entries.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < cost.entries.cols(); ++j) {
            best = std::min(best, cost.entries(i, j) - psi[j]);
        }
        out[i] = best;
    }
    return out;
}

double duality_gap(const Coupling& coupling, const DualPotentials& duals,
                   const CostMatrix& cost) {
    const double marg = coupling_marginal_error(coupling, cost.source, cost.target);
    if (marg > 1e-10) {
        throw std::invalid_argument("duality_gap: coupling marginals off by " +
                                    std::to_string(marg));
    }
    const double dviol = dual_feasibility_violation(duals, cost);
    if (dviol > 1e-9) {
        throw std::invalid_argument("duality_gap: duals infeasible by " + std::to_string(dviol));
    }
    const double primal = (coupling.matrix.array() * cost.entries.array()).sum();
    const double dual = duals.phi.dot(cost.source.weights()) + duals.psi.dot(cost.target.weights());
    return primal - dual;
}

namespace {

void enumerate_subsets(int offset, int remaining, std::vector<int>& chosen,
                       const std::vector<std::pair<int, int>>& support, const Mat& C,
                       MonotonicityReport& rep) {
    const int k = static_cast<int>(chosen.size());
    if (k >= 2) {
        std::vector<int> perm(k);
        std::iota(perm.begin(), perm.end(), 0);
        double direct = 0.0;
        for (int a : chosen) direct += C(support[a].first, support[a].second);
        while (std::next_permutation(perm.begin(), perm.end())) {
            double permuted = 0.0;
            for (int p = 0; p < k; ++p) {
                permuted += C(support[chosen[p]].first, support[chosen[perm[p]]].second);
            }
            ++rep.combinations_checked;
            if (direct > permuted + 1e-9) {
                CycleViolation v;
                for (int a : chosen) v.pairs.push_back(support[a]);
                v.permutation = perm;
                v.direct_cost = direct;
                v.permuted_cost = permuted;
                rep.violations.push_back(std::move(v));
            }
        }
        // next_permutation left perm sorted again; nothing to restore.
    }
    if (remaining == 0) return;
    for (int a = offset; a < static_cast<int>(support.size()); ++a) {
        chosen.push_back(a);
        enumerate_subsets(a + 1, remaining - 1, chosen, support, C, rep);
        chosen.pop_back();
    }
}

}  // namespace

MonotonicityReport check_cyclical_monotonicity(const Coupling& coupling,
                                               const CostMatrix& cost, int max_cycle) {
    if (max_cycle < 2 || max_cycle > 6) {
        throw std::invalid_argument("check_cyclical_monotonicity: max_cycle must be in [2, 6]");
    }
    if (coupling.matrix.rows() != cost.entries.rows() ||
        coupling.matrix.cols() != cost.entries.cols()) {
        throw std::invalid_argument("check_cyclical_monotonicity: shape mismatch");
    }
    std::vector<std::pair<int, int>> support;
    for (int i = 0; i < coupling.matrix.rows(); ++i) {
        for (int j = 0; j < coupling.matrix.cols(); ++j) {
            if (coupling.matrix(i, j) > PathPlan::kSupportTol) support.emplace_back(i, j);
        }
    }
    MonotonicityReport rep;
    std::vector<int> chosen;
    enumerate_subsets(0, std::min<int>(max_cycle, static_cast<int>(support.size())), chosen,
                      support, cost.entries, rep);
    rep.ok = rep.violations.empty();
    return rep;
}

MinimalityReport minimality_audit(const PathPlan& plan, const Potential& V) {
    MinimalityReport rep;
    rep.max_excess = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (int i = 0; i < plan.coupling.matrix.rows(); ++i) {
        for (int j = 0; j < plan.coupling.matrix.cols(); ++j) {
            if (plan.coupling.matrix(i, j) <= PathPlan::kSupportTol) continue;
            any = true;
            const auto it = plan.paths.find({i, j});
            if (it == plan.paths.end()) {
                throw std::invalid_argument("minimality_audit: supported pair (" +
                                            std::to_string(i) + ", " + std::to_string(j) +
                                            ") has no stored path");
            }
            const double stored = action_cost(it->second, V);
            const auto bvp = solve_bvp(plan.source.point(i), plan.target.point(j), V,
                                       plan.grid);
            const double resolved = action_cost(bvp.path, V);
            rep.max_excess = std::max(rep.max_excess, stored - resolved);
            if (std::abs(stored - resolved) > 1e-8) {
                rep.issues.push_back({i, j, stored, resolved});
            }
        }
    }
    if (!any) rep.max_excess = 0.0;
    rep.ok = rep.issues.empty();
    return rep;
}

}  // namespace pathot
