#include <doctest.h>

#include "pathot/core.hpp"
#include "pathot/endpoint.hpp"
#include "pathot/lp.hpp"
#include "pathot/potential.hpp"
#include "pathot/transport_map.hpp"

#include <cmath>

using namespace pathot;

namespace {

DiscreteMeasure uniform_measure(const Mat& pts) {
    return DiscreteMeasure(pts, Vec::Constant(pts.rows(), 1.0 / pts.rows()));
}

}  // namespace

TEST_CASE("a permutation plan unfolds into a map that pushes the source forward") {
    const auto g = make_grid(16);
    const ZeroPotential zero;

    Mat src(4, 2), tgt(4, 2);
    src << 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0;
    tgt << 0.1, 0.1, 1.2, -0.1, -0.2, 1.1, 0.9, 1.3;
    const DiscreteMeasure mu0 = uniform_measure(src), mu1 = uniform_measure(tgt);

    const auto table = assemble_endpoint_cost_matrix(mu0, mu1, zero, g);
    const auto sol = solve_exact(table.cost);
    const auto plan = assemble_plan(sol.coupling, table.paths, mu0, mu1, g);

    const auto map = extract_map(plan, &table.cost);
    REQUIRE(map.assignment.size() == 4);
    REQUIRE(map.paths.size() == 4);
    CHECK(map.monge_value == doctest::Approx(sol.value).epsilon(1e-9));

    // Each path starts at its source atom and ends at its assigned target.
    for (int i = 0; i < 4; ++i) {
        CHECK((map.paths[i].at(0) - mu0.point(i)).norm() <= 1e-15);
        CHECK((map.paths[i].at(16) - mu1.point(map.assignment[i])).norm() <= 1e-15);
    }

    const auto push = pushforward_check(map, mu0, mu1);
    CHECK(push.ok);
    CHECK(push.max_mismatch <= 1e-10);
    CHECK(push.mismatched_targets.empty());

    // With uniform weights and distinct targets the assignment is injective.
    std::vector<int> seen(4, 0);
    for (int j : map.assignment) ++seen[j];
    for (int c : seen) CHECK(c == 1);

    SUBCASE("without a cost table the value is simply not computed") {
        const auto bare = extract_map(plan);
        CHECK(bare.monge_value == 0.0);
        CHECK(bare.assignment == map.assignment);
    }
}

TEST_CASE("plans that split mass refuse to masquerade as maps") {
    const auto g = make_grid(8);
    Mat src(1, 1), tgt(2, 1);
    src << 0.0;
    tgt << -1.0, 1.0;
    const DiscreteMeasure mu0(src, Vec::Constant(1, 1.0));
    const DiscreteMeasure mu1 = uniform_measure(tgt);

    const ZeroPotential zero;
    const auto table = assemble_endpoint_cost_matrix(mu0, mu1, zero, g);
    Coupling split{Mat::Constant(1, 2, 0.5)};
    const auto plan = assemble_plan(split, table.paths, mu0, mu1, g);

    bool threw = false;
    try {
        extract_map(plan);
    } catch (const NonDeterministicPlanError& e) {
        threw = true;
        REQUIRE(e.split_rows().size() == 1);
        CHECK(e.split_rows()[0] == 0);
    }
    CHECK(threw);
}

TEST_CASE("two sources funneling into one target still push forward correctly") {
    const auto g = make_grid(8);
    Mat src(2, 1), tgt(1, 1);
    src << -1.0, 1.0;
    tgt << 0.0;
    const DiscreteMeasure mu0 = uniform_measure(src);
    const DiscreteMeasure mu1(tgt, Vec::Constant(1, 1.0));

    const ZeroPotential zero;
    const auto table = assemble_endpoint_cost_matrix(mu0, mu1, zero, g);
    const auto sol = solve_exact(table.cost);
    const auto plan = assemble_plan(sol.coupling, table.paths, mu0, mu1, g);

    const auto map = extract_map(plan, &table.cost);
    CHECK(map.assignment == std::vector<int>{0, 0});
    CHECK(pushforward_check(map, mu0, mu1).ok);
    CHECK(map.monge_value == doctest::Approx(sol.value).epsilon(1e-12));
}

TEST_CASE("a wrong assignment is caught by the pushforward audit") {
    Mat src(2, 1), tgt(2, 1);
    src << -1.0, 1.0;
    tgt << -1.0, 1.0;
    const DiscreteMeasure mu0 = uniform_measure(src), mu1 = uniform_measure(tgt);
    const auto g = make_grid(8);

    PathMap map;
    map.assignment = {0, 0};  // both sources claim target 0
    map.paths.push_back(linear_path(mu0.point(0), mu1.point(0), g));
    map.paths.push_back(linear_path(mu0.point(1), mu1.point(0), g));

    const auto push = pushforward_check(map, mu0, mu1);
    CHECK_FALSE(push.ok);
    CHECK(push.max_mismatch == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(push.mismatched_targets == std::vector<int>{0, 1});
}
