#include <doctest.h>

#include "pathot/core.hpp"
#include "pathot/endpoint.hpp"
#include "pathot/lp.hpp"
#include "pathot/plan.hpp"
#include "pathot/potential.hpp"

#include <cmath>

using namespace pathot;

namespace {

DiscreteMeasure line_measure(const Vec& weights) {
    Mat pts(weights.size(), 1);
    for (int i = 0; i < weights.size(); ++i) pts(i, 0) = static_cast<double>(i);
    return DiscreteMeasure(pts, weights);
}

CostMatrix make_cost(const Mat& C, const Vec& a, const Vec& b) {
    return CostMatrix{C, line_measure(a), line_measure(b)};
}

CostMatrix make_uniform_cost(const Mat& C) {
    const int n0 = static_cast<int>(C.rows()), n1 = static_cast<int>(C.cols());
    return make_cost(C, Vec::Constant(n0, 1.0 / n0), Vec::Constant(n1, 1.0 / n1));
}

Mat random_cost(int n0, int n1, Rng& rng) {
    Mat C(n0, n1);
    for (int i = 0; i < n0; ++i) {
        for (int j = 0; j < n1; ++j) C(i, j) = rng.uniform(0.0, 10.0);
    }
    return C;
}

Vec random_simplex(int n, Rng& rng) {
    Vec w(n);
    for (int i = 0; i < n; ++i) w(i) = rng.uniform(0.1, 1.0);
    return w / w.sum();
}

void check_optimal_pair(const TransportSolution& sol, const CostMatrix& cost) {
    CHECK(coupling_marginal_error(sol.coupling, cost.source, cost.target) <= 1e-12);
    CHECK(dual_feasibility_violation(sol.duals, cost) <= 1e-9);
    CHECK(std::abs(duality_gap(sol.coupling, sol.duals, cost)) <= 1e-9);
}

}  // namespace

TEST_CASE("trivial transport instances") {
    SUBCASE("single atom to single atom") {
        Mat C(1, 1);
        C << 3.5;
        const auto sol = solve_exact(make_uniform_cost(C));
        CHECK(sol.coupling.matrix(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(sol.value == doctest::Approx(3.5).epsilon(1e-15));
    }

    SUBCASE("identity is optimal when the diagonal is cheapest") {
        Mat C(2, 2);
        C << 0.0, 1.0, 1.0, 0.0;
        const auto sol = solve_exact(make_uniform_cost(C));
        CHECK(sol.value == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(sol.coupling.matrix(0, 0) == doctest::Approx(0.5));
        CHECK(sol.coupling.matrix(1, 1) == doctest::Approx(0.5));
        CHECK(sol.coupling.matrix(0, 1) == 0.0);
    }

    SUBCASE("three-atom instance with a known optimum") {
        Mat C(3, 3);
        C << 1, 2, 3, 2, 1, 3, 3, 2, 1;
        const auto sol = solve_exact(make_uniform_cost(C));
        CHECK(sol.value == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("simplex agrees with permutation enumeration on uniform instances") {
    Rng rng(1234);
    for (int n = 2; n <= 7; ++n) {
        for (int rep = 0; rep < 8; ++rep) {
            const auto cost = make_uniform_cost(random_cost(n, n, rng));
            const auto sol = solve_exact(cost);
            const double ref = brute_force_oracle(cost);
            CHECK(std::abs(sol.value - ref) <= 1e-9);
            check_optimal_pair(sol, cost);
        }
    }
}

TEST_CASE("permutation oracle rejects what it cannot certify") {
    Rng rng(9);
    CHECK_THROWS_AS(brute_force_oracle(make_uniform_cost(random_cost(9, 9, rng))),
                    std::invalid_argument);

    Vec a(2), b(2);
    a << 0.6, 0.4;
    b << 0.5, 0.5;
    CHECK_THROWS_AS(brute_force_oracle(make_cost(random_cost(2, 2, rng), a, b)),
                    std::invalid_argument);
}

TEST_CASE("non-uniform and rectangular instances stay feasible and tight") {
    Rng rng(555);
    for (int rep = 0; rep < 12; ++rep) {
        const int n0 = 2 + rng.index(5);
        const int n1 = 2 + rng.index(5);
        const auto cost =
            make_cost(random_cost(n0, n1, rng), random_simplex(n0, rng), random_simplex(n1, rng));
        const auto sol = solve_exact(cost);
        check_optimal_pair(sol, cost);

        // A basic vertex uses at most n0 + n1 - 1 cells.
        int support = 0;
        for (int i = 0; i < n0; ++i) {
            for (int j = 0; j < n1; ++j) {
                if (sol.coupling.matrix(i, j) > 1e-13) ++support;
            }
        }
        CHECK(support <= n0 + n1 - 1);
    }
}

TEST_CASE("heavily degenerate costs terminate and stay optimal") {
    SUBCASE("all costs equal") {
        Mat C = Mat::Constant(4, 4, 2.0);
        const auto cost = make_uniform_cost(C);
        const auto sol = solve_exact(cost);
        CHECK(sol.value == doctest::Approx(2.0).epsilon(1e-15));
        check_optimal_pair(sol, cost);
    }

    SUBCASE("block ties with repeated weights") {
        Mat C(4, 4);
        C << 0, 0, 1, 1, 0, 0, 1, 1, 1, 1, 0, 0, 1, 1, 0, 0;
        const auto cost = make_uniform_cost(C);
        const auto sol = solve_exact(cost);
        CHECK(sol.value == doctest::Approx(0.0).epsilon(1e-15));
        check_optimal_pair(sol, cost);
    }
}

TEST_CASE("transforms tighten potentials and certify feasibility") {
    Mat C(2, 3);
    C << 1.0, 4.0, 2.0, 3.0, 0.5, 5.0;
    Rng rng(3);
    const auto cost = make_cost(C, random_simplex(2, rng), random_simplex(3, rng));

    Vec phi(2);
    phi << 0.0, 1.0;
    const Vec psi = c_transform(phi, cost);
    CHECK(psi(0) == doctest::Approx(1.0));   // min(1-0, 3-1)
    CHECK(psi(1) == doctest::Approx(-0.5));  // min(4-0, 0.5-1)
    CHECK(psi(2) == doctest::Approx(2.0));   // min(2-0, 5-1)

    // (phi', psi) with phi' = rev-transform of psi is feasible...
    const Vec phi2 = c_transform_rev(psi, cost);
    CHECK(dual_feasibility_violation({phi2, psi}, cost) <= 1e-15);

    // ...and one more transform is idempotent.
    const Vec psi2 = c_transform(phi2, cost);
    CHECK((psi2 - psi).norm() <= 1e-15);
    const Vec phi3 = c_transform_rev(psi2, cost);
    CHECK((phi3 - phi2).norm() <= 1e-15);
}

TEST_CASE("duality gap measures suboptimality and validates its inputs") {
    Rng rng(77);
    const auto cost = make_uniform_cost(random_cost(4, 4, rng));
    const auto sol = solve_exact(cost);

    CHECK(std::abs(duality_gap(sol.coupling, sol.duals, cost)) <= 1e-10);

    // Blend the optimum with the product coupling: the gap grows by exactly
    // the blend fraction of the product's excess cost.
    const Vec& a = cost.source.weights();
    const Vec& b = cost.target.weights();
    const Mat product = a * b.transpose();
    Coupling blend{0.9 * sol.coupling.matrix + 0.1 * product};
    const double product_cost = (product.array() * cost.entries.array()).sum();
    const double expected = duality_gap(sol.coupling, sol.duals, cost) +
                            0.1 * (product_cost - sol.value);
    CHECK(duality_gap(blend, sol.duals, cost) == doctest::Approx(expected).epsilon(1e-12));

    SUBCASE("couplings off the marginals are rejected") {
        Coupling bad{0.5 * sol.coupling.matrix};
        CHECK_THROWS_AS(duality_gap(bad, sol.duals, cost), std::invalid_argument);
    }

    SUBCASE("negative mass is rejected even when marginals still balance") {
        Coupling bad{sol.coupling.matrix};
        const double eps = bad.matrix(0, 0) + 1e-6;
        bad.matrix(0, 0) -= eps;
        bad.matrix(0, 1) += eps;
        bad.matrix(1, 0) += eps;
        bad.matrix(1, 1) -= eps;
        CHECK_THROWS_AS(duality_gap(bad, sol.duals, cost), std::invalid_argument);
    }

    SUBCASE("infeasible duals are rejected") {
        DualPotentials bad = sol.duals;
        bad.phi(0) += 1.0;
        CHECK_THROWS_AS(duality_gap(sol.coupling, bad, cost), std::invalid_argument);
    }
}

TEST_CASE("optimal pairs satisfy complementary slackness") {
    Rng rng(31);
    const auto cost =
        make_cost(random_cost(5, 6, rng), random_simplex(5, rng), random_simplex(6, rng));
    const auto sol = solve_exact(cost);
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 6; ++j) {
            if (sol.coupling.matrix(i, j) > 1e-12) {
                CHECK(std::abs(sol.duals.phi(i) + sol.duals.psi(j) - cost.entries(i, j)) <= 1e-9);
            }
        }
    }
}

TEST_CASE("affine cost shifts preserve the optimal coupling") {
    Rng rng(808);
    const auto cost =
        make_cost(random_cost(4, 5, rng), random_simplex(4, rng), random_simplex(5, rng));
    const auto sol = solve_exact(cost);

    Vec a(4), b(5);
    for (int i = 0; i < 4; ++i) a(i) = rng.uniform(-2.0, 2.0);
    for (int j = 0; j < 5; ++j) b(j) = rng.uniform(-2.0, 2.0);
    Mat shifted = cost.entries;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 5; ++j) shifted(i, j) += a(i) + b(j);
    }
    const auto cost2 = CostMatrix{shifted, cost.source, cost.target};
    const auto sol2 = solve_exact(cost2);

    const double offset =
        a.dot(cost.source.weights()) + b.dot(cost.target.weights());
    CHECK(sol2.value == doctest::Approx(sol.value + offset).epsilon(1e-12));
    CHECK((sol2.coupling.matrix - sol.coupling.matrix).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("optimal supports pass the cycle exchange audit") {
    Rng rng(99);
    const auto cost =
        make_cost(random_cost(5, 5, rng), random_simplex(5, rng), random_simplex(5, rng));
    const auto sol = solve_exact(cost);

    const auto report = check_cyclical_monotonicity(sol.coupling, cost, 4);
    CHECK(report.ok);
    CHECK(report.violations.empty());
    CHECK(report.combinations_checked > 0);

    CHECK_THROWS_AS(check_cyclical_monotonicity(sol.coupling, cost, 7), std::invalid_argument);
    CHECK_THROWS_AS(check_cyclical_monotonicity(sol.coupling, cost, 1), std::invalid_argument);
}

TEST_CASE("a crossed assignment is flagged by the cycle exchange audit") {
    // Two unit atoms at 0 and 1 on the line with quadratic cost: sending each
    // atom across is strictly worse than keeping both in place.
    Mat C(2, 2);
    C << 0.0, 0.5, 0.5, 0.0;
    const auto cost = make_uniform_cost(C);
    Coupling crossed{Mat::Zero(2, 2)};
    crossed.matrix(0, 1) = 0.5;
    crossed.matrix(1, 0) = 0.5;

    const auto report = check_cyclical_monotonicity(crossed, cost, 2);
    CHECK_FALSE(report.ok);
    REQUIRE_FALSE(report.violations.empty());
    const auto& v = report.violations.front();
    CHECK(v.direct_cost > v.permuted_cost + 1e-9);
}

TEST_CASE("path plans certify stored minimality and catch detours") {
    Mat src(2, 2), tgt(2, 2);
    src << -1.0, 0.0, -1.0, 1.0;
    tgt << 1.0, 0.2, 1.0, 0.8;
    const DiscreteMeasure mu0(src, Vec::Constant(2, 0.5)), mu1(tgt, Vec::Constant(2, 0.5));
    const GaussianWellPotential V(Vec::Zero(2), -0.4, 1.1);
    const auto grid = make_grid(16);

    const auto table = assemble_endpoint_cost_matrix(mu0, mu1, V, grid);
    const auto sol = solve_exact(table.cost);
    auto plan = assemble_plan(sol.coupling, table.paths, mu0, mu1, grid);

    const auto good = minimality_audit(plan, V);
    CHECK(good.ok);
    CHECK(good.issues.empty());
    CHECK(good.max_excess <= 1e-10);

    // Push one stored path sideways: the audit must flag exactly that pair.
    auto& first = plan.paths.begin()->second;
    first.points.row(8).array() += 0.5;
    const auto bad = minimality_audit(plan, V);
    CHECK_FALSE(bad.ok);
    REQUIRE(bad.issues.size() == 1);
    CHECK(bad.max_excess > 1e-3);

    // A supported pair with no stored path is a malformed plan.
    plan.paths.erase(plan.paths.begin());
    CHECK_THROWS_AS(minimality_audit(plan, V), std::invalid_argument);
}
