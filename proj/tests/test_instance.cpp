#include <doctest.h>

#include "pathot/instance.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

using namespace pathot;
using nlohmann::json;

namespace {

InstanceSpec baseline() {
    InstanceSpec s;
    s.dimension = 2;
    s.grid_m = 16;
    s.source_points.resize(2, 2);
    s.source_points << 0.0, 0.0, 0.0, 1.0;
    s.source_weights.resize(2);
    s.source_weights << 0.5, 0.5;
    s.target_points.resize(2, 2);
    s.target_points << 1.0, 0.0, 1.0, 1.0;
    s.target_weights.resize(2);
    s.target_weights << 0.25, 0.75;
    s.potential.kind = PotentialSpec::Kind::gaussian_well;
    s.potential.center.resize(2);
    s.potential.center << 0.5, 0.5;
    s.potential.depth = -0.3;
    s.potential.width = 1.1;
    s.interaction.kernel = KernelKind::gaussian;
    s.interaction.theta = 0.1;
    s.interaction.beta = 1.0;
    s.solver.seed = 7;
    return s;
}

ParseError parse_failure(const json& doc) {
    try {
        parse_instance(doc.dump());
    } catch (const ParseError& e) {
        return e;
    }
    throw std::logic_error("expected the parse to fail");
}

}  // namespace

TEST_CASE("instances survive an emit/parse round trip unchanged") {
    SUBCASE("gaussian well with interaction") {
        const auto s = baseline();
        CHECK(parse_instance(emit_instance(s)) == s);
    }

    SUBCASE("zero potential, no interaction, non-default solver knobs") {
        auto s = baseline();
        s.potential = PotentialSpec{};
        s.interaction = InteractionParams{};
        s.solver.tol = 1e-11;
        s.solver.max_iter = 321;
        s.solver.damping = 0.75;
        s.solver.max_cycle = 5;
        s.solver.outer_tol = 1e-7;
        s.solver.max_outer = 44;
        CHECK(parse_instance(emit_instance(s)) == s);
    }

    SUBCASE("linear gradient with declared bounds and awkward numbers") {
        auto s = baseline();
        s.potential = PotentialSpec{};
        s.potential.kind = PotentialSpec::Kind::linear_gradient;
        s.potential.gradient.resize(2);
        s.potential.gradient << 1.0 / 3.0, -0.1;
        s.potential.domain_radius = 7.5;
        s.potential.declared_K = s.potential.gradient.norm() * 7.5;
        s.potential.declared_L = 0.0;
        s.source_weights << 1.0 / 3.0, 2.0 / 3.0;
        CHECK(parse_instance(emit_instance(s)) == s);
    }

    SUBCASE("tabulated potential") {
        auto s = baseline();
        s.dimension = 1;
        s.source_points.resize(2, 1);
        s.source_points << 0.0, 1.0;
        s.target_points.resize(2, 1);
        s.target_points << 2.0, 3.0;
        s.potential = PotentialSpec{};
        s.potential.kind = PotentialSpec::Kind::custom_table;
        s.potential.origin.resize(1);
        s.potential.origin << -2.0;
        s.potential.spacing = 0.5;
        s.potential.shape = {9};
        for (int i = 0; i < 9; ++i) {
            const double x = -2.0 + 0.5 * i;
            s.potential.values.push_back(0.5 * x * x);
            s.potential.gradients.push_back(x);
        }
        CHECK(parse_instance(emit_instance(s)) == s);
    }
}

TEST_CASE("parse failures name the offending field") {
    const json good = json::parse(emit_instance(baseline()));

    SUBCASE("missing solver tolerance") {
        json doc = good;
        doc["solver"].erase("tol");
        CHECK(parse_failure(doc).field() == "solver.tol");
    }

    SUBCASE("unknown potential family") {
        json doc = good;
        doc["potential"]["kind"] = "cubic-spline";
        CHECK(parse_failure(doc).field() == "potential.kind");
    }

    SUBCASE("gradient length differs from dimension") {
        json doc = good;
        doc["potential"] = {{"kind", "linear-gradient"}, {"gradient", {1.0, 2.0, 3.0}}};
        CHECK(parse_failure(doc).field() == "potential.gradient");
    }

    SUBCASE("declared bound contradicts the family") {
        json doc = good;
        doc["potential"]["bounds"] = {{"K", 99.0}, {"L", 0.3 / (1.1 * 1.1)}};
        CHECK(parse_failure(doc).field() == "potential.bounds.K");
    }

    SUBCASE("weights and points disagree") {
        json doc = good;
        doc["source"]["weights"] = {1.0};
        CHECK(parse_failure(doc).field() == "source.weights");
    }

    SUBCASE("degenerate grid") {
        json doc = good;
        doc["grid_m"] = 1;
        CHECK(parse_failure(doc).field() == "grid_m");
    }

    SUBCASE("damping outside its interval") {
        json doc = good;
        doc["solver"]["damping"] = 0.0;
        CHECK(parse_failure(doc).field() == "solver.damping");
    }

    SUBCASE("negative interaction strength") {
        json doc = good;
        doc["interaction"]["theta"] = -0.5;
        CHECK(parse_failure(doc).field() == "interaction");
    }

    SUBCASE("audit depth outside its window") {
        json doc = good;
        doc["solver"]["max_cycle"] = 9;
        CHECK(parse_failure(doc).field() == "solver.max_cycle");
    }

    SUBCASE("text that is not JSON at all") {
        try {
            parse_instance("not json {");
            CHECK(false);
        } catch (const ParseError& e) {
            CHECK(e.field() == "(document)");
        }
    }

    SUBCASE("a point with the wrong arity") {
        json doc = good;
        doc["target"]["points"][1] = {1.0};
        CHECK(parse_failure(doc).field() == "target.points[1]");
    }
}

TEST_CASE("measures built from an instance are validated") {
    auto s = baseline();
    s.source_weights << 0.5, 0.4;  // mass 0.9
    CHECK_THROWS_AS(source_measure(s), ParseError);
    CHECK_NOTHROW(target_measure(s));
}

TEST_CASE("instance files load like instance strings") {
    const auto s = baseline();
    const std::string path = "/tmp/pathot_test_instance.json";
    {
        std::ofstream out(path);
        out << emit_instance(s);
    }
    CHECK(load_instance_file(path) == s);
    std::remove(path.c_str());

    try {
        load_instance_file("/tmp/definitely_missing_instance.json");
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK(e.field() == "(file)");
    }
}

TEST_CASE("17-digit formatting reproduces doubles exactly") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 1e300, 0.0, 6.0221407599999999e23}) {
        const std::string s = fmt17(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
}
