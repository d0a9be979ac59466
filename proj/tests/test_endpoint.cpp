#include <doctest.h>

#include "pathot/bvp.hpp"
#include "pathot/core.hpp"
#include "pathot/endpoint.hpp"
#include "pathot/potential.hpp"

#include <cmath>

using namespace pathot;

namespace {

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

}  // namespace

TEST_CASE("free endpoint cost is half the squared distance") {
    const ZeroPotential zero;
    const auto g = make_grid(16);

    const auto eval = endpoint_cost(v2(0.0, 0.0), v2(1.0, 1.0), zero, g);
    CHECK(eval.value == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(eval.grad_y(0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(eval.grad_y(1) == doctest::Approx(1.0).epsilon(1e-15));

    Rng rng(31);
    for (int k = 0; k < 25; ++k) {
        const Vec x = rng.point(3, -3.0, 3.0), y = rng.point(3, -3.0, 3.0);
        const auto e = endpoint_cost(x, y, zero, g);
        CHECK(std::abs(e.value - 0.5 * (x - y).squaredNorm()) <= 1e-12);
        CHECK((e.grad_y - (y - x)).norm() <= 1e-12);
    }

    const Vec same = v2(0.3, -0.7);
    const auto fixed = endpoint_cost(same, same, zero, g);
    CHECK(fixed.value == 0.0);
    CHECK(fixed.grad_y.norm() == 0.0);
}

TEST_CASE("cost value equals the action of the returned path") {
    const GaussianWellPotential V(v2(0.0, 0.2), -0.4, 1.1);
    const auto g = make_grid(24);
    Rng rng(5);
    for (int k = 0; k < 10; ++k) {
        const Vec x = rng.point(2, -2.0, 2.0), y = rng.point(2, -2.0, 2.0);
        const auto e = endpoint_cost(x, y, V, g);
        CHECK(e.value == doctest::Approx(action_cost(e.path, V)).epsilon(1e-12));
        CHECK(e.bvp.converged);
    }
}

TEST_CASE("endpoint gradient matches finite differences of the cost") {
    const GaussianWellPotential V(v2(0.1, -0.2), -0.45, 1.2);
    const auto g = make_grid(32);
    const BvpOptions opts{1e-12, 2000};
    const double fd = 1e-5;

    Rng rng(99);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        const Vec x = rng.point(2, -2.0, 2.0), y = rng.point(2, -2.0, 2.0);
        const auto e = endpoint_cost(x, y, V, g, opts);
        Vec num(2);
        for (int a = 0; a < 2; ++a) {
            Vec yp = y, ym = y;
            yp(a) += fd;
            ym(a) -= fd;
            num(a) = (endpoint_cost(x, yp, V, g, opts).value -
                      endpoint_cost(x, ym, V, g, opts).value) /
                     (2.0 * fd);
        }
        worst = std::max(worst, (e.grad_y - num).norm() / (1.0 + e.grad_y.norm()));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("constant force shifts the endpoint gradient by half the slope") {
    // grad_y c = y - x - int t g dt = y - x - g/2, exactly, for V = g . x.
    const Vec slope = v2(0.22, -0.34);
    const LinearPotential V(slope);
    const auto g = make_grid(16);
    const Vec x = v2(-0.5, 0.3), y = v2(1.0, -0.2);
    const auto e = endpoint_cost(x, y, V, g, {1e-13, 100});
    CHECK((e.grad_y - (y - x - 0.5 * slope)).norm() <= 1e-13);

    // The same formula applied to any sampled path reproduces the endpoints'
    // difference minus the weighted force integral.
    const auto straight = linear_path(x, y, g);
    CHECK((grad_y_formula(straight, V) - (y - x - 0.5 * slope)).norm() <= 1e-13);
}

TEST_CASE("autonomous fields give symmetric costs") {
    const GaussianWellPotential V(v2(0.0, 0.0), -0.3, 1.0);
    const auto g = make_grid(32);
    Rng rng(17);
    for (int k = 0; k < 8; ++k) {
        const Vec x = rng.point(2, -2.0, 2.0), y = rng.point(2, -2.0, 2.0);
        const double forward = endpoint_cost(x, y, V, g).value;
        const double backward = endpoint_cost(y, x, V, g).value;
        CHECK(forward == doctest::Approx(backward).epsilon(1e-9));
    }
}

TEST_CASE("twist margin separates distinct sources") {
    const auto g = make_grid(32);

    SUBCASE("free case: the margin is exactly the source separation") {
        const ZeroPotential zero;
        const Vec x1 = v2(0.0, 0.0), x2 = v2(1.0, -0.5), y = v2(0.4, 0.4);
        CHECK(twist_margin(x1, x2, y, zero, g) ==
              doctest::Approx((x1 - x2).norm()).epsilon(1e-12));
    }

    SUBCASE("L = 0.5 keeps at least half the separation") {
        const GaussianWellPotential V(v2(0.0, 0.1), -0.5, 1.0);
        const double slack = 10.0 * g->h() * g->h();
        Rng rng(41);
        for (int k = 0; k < 12; ++k) {
            const Vec x1 = rng.point(2, -1.5, 1.5), x2 = rng.point(2, -1.5, 1.5);
            const Vec y = rng.point(2, -1.5, 1.5);
            if ((x1 - x2).norm() < 1e-6) continue;
            const double margin = twist_margin(x1, x2, y, V, g);
            const double factor = 1.0 - 0.5 * V.lipschitz_L() / (1.0 - V.lipschitz_L());
            CHECK(margin >= factor * (x1 - x2).norm() - slack);
        }
    }

    SUBCASE("identical sources are rejected") {
        const ZeroPotential zero;
        CHECK_THROWS_AS(twist_margin(v2(1.0, 1.0), v2(1.0, 1.0), v2(0.0, 0.0), zero, g),
                        std::invalid_argument);
    }

    SUBCASE("fields beyond the injectivity regime are rejected") {
        const GaussianWellPotential V(v2(0.0, 0.0), -0.7, 1.0);  // L = 0.7 >= 2/3
        CHECK_THROWS_AS(twist_margin(v2(0.0, 0.0), v2(1.0, 0.0), v2(0.5, 0.5), V, g),
                        std::invalid_argument);
    }
}

TEST_CASE("cost tables cover every pair and agree with single evaluations") {
    Mat src(2, 2), tgt(3, 2);
    src << 0.0, 0.0, 1.0, 0.5;
    tgt << -0.5, 0.2, 0.6, -0.4, 1.2, 1.0;
    Vec ws(2), wt(3);
    ws << 0.5, 0.5;
    wt << 0.4, 0.3, 0.3;
    const DiscreteMeasure mu0(src, ws), mu1(tgt, wt);

    const GaussianWellPotential V(v2(0.3, 0.1), -0.35, 1.0);
    const auto g = make_grid(16);
    const auto table = assemble_endpoint_cost_matrix(mu0, mu1, V, g);

    CHECK(table.cost.entries.rows() == 2);
    CHECK(table.cost.entries.cols() == 3);
    CHECK(table.paths.size() == 6);

    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 3; ++j) {
            const auto single = endpoint_cost(mu0.point(i), mu1.point(j), V, g);
            CHECK(table.cost.entries(i, j) ==
                  doctest::Approx(single.value).epsilon(1e-14));
            const auto it = table.paths.find({i, j});
            REQUIRE(it != table.paths.end());
            CHECK(it->second.sup_distance(single.path) <= 1e-12);
        }
    }
}
