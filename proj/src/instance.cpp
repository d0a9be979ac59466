#include "pathot/instance.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pathot {

using nlohmann::json;

namespace {

bool mat_eq(const Mat& a, const Mat& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           (a.rows() == 0 || (a.array() == b.array()).all());
}

bool vec_eq(const Vec& a, const Vec& b) {
    return a.size() == b.size() && (a.size() == 0 || (a.array() == b.array()).all());
}

}  // namespace

bool PotentialSpec::operator==(const PotentialSpec& other) const {
    return kind == other.kind && vec_eq(gradient, other.gradient) &&
           domain_radius == other.domain_radius && vec_eq(center, other.center) &&
           depth == other.depth && width == other.width && vec_eq(origin, other.origin) &&
           spacing == other.spacing && shape == other.shape && values == other.values &&
           gradients == other.gradients && declared_K == other.declared_K &&
           declared_L == other.declared_L;
}

bool InstanceSpec::operator==(const InstanceSpec& other) const {
    return dimension == other.dimension && grid_m == other.grid_m &&
           mat_eq(source_points, other.source_points) &&
           vec_eq(source_weights, other.source_weights) &&
           mat_eq(target_points, other.target_points) &&
           vec_eq(target_weights, other.target_weights) && potential == other.potential &&
           interaction.kernel == other.interaction.kernel &&
           interaction.theta == other.interaction.theta &&
           interaction.beta == other.interaction.beta &&
           interaction.coulomb_smoothing == other.interaction.coulomb_smoothing &&
           solver == other.solver;
}

namespace {

const json& require(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) throw ParseError(path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(path + "." + key, "missing");
    return *it;
}

double as_double(const json& v, const std::string& path) {
    if (!v.is_number()) throw ParseError(path, "expected a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ParseError(path, "expected an integer");
    return v.get<int>();
}

std::uint64_t as_uint64(const json& v, const std::string& path) {
    if (!v.is_number_unsigned() && !v.is_number_integer()) {
        throw ParseError(path, "expected a nonnegative integer");
    }
    const auto raw = v.get<std::int64_t>();
    if (v.is_number_integer() && !v.is_number_unsigned() && raw < 0) {
        throw ParseError(path, "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
}

Vec as_vector(const json& v, const std::string& path) {
    if (!v.is_array()) throw ParseError(path, "expected an array of numbers");
    Vec out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
        out[static_cast<int>(k)] = as_double(v[k], path + "[" + std::to_string(k) + "]");
    }
    return out;
}

Mat as_matrix(const json& v, int dim, const std::string& path) {
    if (!v.is_array() || v.empty()) throw ParseError(path, "expected a non-empty array of points");
    Mat out(v.size(), dim);
    for (std::size_t r = 0; r < v.size(); ++r) {
        const Vec row = as_vector(v[r], path + "[" + std::to_string(r) + "]");
        if (row.size() != dim) {
            throw ParseError(path + "[" + std::to_string(r) + "]",
                             "point has " + std::to_string(row.size()) + " coordinates, expected " +
                                 std::to_string(dim));
        }
        out.row(static_cast<int>(r)) = row.transpose();
    }
    return out;
}

json vec_to_json(const Vec& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

json mat_to_json(const Mat& m) {
    json arr = json::array();
    for (int r = 0; r < m.rows(); ++r) arr.push_back(vec_to_json(m.row(r).transpose()));
    return arr;
}

PotentialSpec parse_potential(const json& p, int dim) {
    PotentialSpec spec;
    const std::string kind = [&] {
        const json& k = require(p, "kind", "potential");
        if (!k.is_string()) throw ParseError("potential.kind", "expected a string");
        return k.get<std::string>();
    }();
    if (kind == "zero") {
        spec.kind = PotentialSpec::Kind::zero;
    } else if (kind == "linear-gradient") {
        spec.kind = PotentialSpec::Kind::linear_gradient;
        spec.gradient = as_vector(require(p, "gradient", "potential"), "potential.gradient");
        if (p.contains("domain_radius")) {
            spec.domain_radius = as_double(p["domain_radius"], "potential.domain_radius");
        }
    } else if (kind == "gaussian-well") {
        spec.kind = PotentialSpec::Kind::gaussian_well;
        spec.center = as_vector(require(p, "center", "potential"), "potential.center");
        spec.depth = as_double(require(p, "depth", "potential"), "potential.depth");
        spec.width = as_double(require(p, "width", "potential"), "potential.width");
    } else if (kind == "custom-table") {
        spec.kind = PotentialSpec::Kind::custom_table;
        spec.origin = as_vector(require(p, "origin", "potential"), "potential.origin");
        spec.spacing = as_double(require(p, "spacing", "potential"), "potential.spacing");
        const json& shape = require(p, "shape", "potential");
        if (!shape.is_array()) throw ParseError("potential.shape", "expected an array");
        for (std::size_t k = 0; k < shape.size(); ++k) {
            spec.shape.push_back(as_int(shape[k], "potential.shape[" + std::to_string(k) + "]"));
        }
        const Vec vals = as_vector(require(p, "values", "potential"), "potential.values");
        spec.values.assign(vals.data(), vals.data() + vals.size());
        const Vec grads = as_vector(require(p, "gradients", "potential"), "potential.gradients");
        spec.gradients.assign(grads.data(), grads.data() + grads.size());
    } else {
        throw ParseError("potential.kind", "unknown family '" + kind + "'");
    }
    if (p.contains("bounds")) {
        const json& b = p["bounds"];
        spec.declared_K = as_double(require(b, "K", "potential.bounds"), "potential.bounds.K");
        spec.declared_L = as_double(require(b, "L", "potential.bounds"), "potential.bounds.L");
    }
    (void)dim;
    return spec;
}

json emit_potential(const PotentialSpec& spec) {
    json p;
    switch (spec.kind) {
        case PotentialSpec::Kind::zero:
            p["kind"] = "zero";
            break;
        case PotentialSpec::Kind::linear_gradient:
            p["kind"] = "linear-gradient";
            p["gradient"] = vec_to_json(spec.gradient);
            p["domain_radius"] = spec.domain_radius;
            break;
        case PotentialSpec::Kind::gaussian_well:
            p["kind"] = "gaussian-well";
            p["center"] = vec_to_json(spec.center);
            p["depth"] = spec.depth;
            p["width"] = spec.width;
            break;
        case PotentialSpec::Kind::custom_table:
            p["kind"] = "custom-table";
            p["origin"] = vec_to_json(spec.origin);
            p["spacing"] = spec.spacing;
            p["shape"] = spec.shape;
            p["values"] = spec.values;
            p["gradients"] = spec.gradients;
            break;
    }
    if (spec.declared_K && spec.declared_L) {
        p["bounds"] = json{{"K", *spec.declared_K}, {"L", *spec.declared_L}};
    }
    return p;
}

KernelKind parse_kernel(const std::string& s) {
    if (s == "none") return KernelKind::none;
    if (s == "gaussian") return KernelKind::gaussian;
    if (s == "coulomb") return KernelKind::coulomb;
    throw ParseError("interaction.kernel", "unknown kernel '" + s + "'");
}

std::string kernel_name(KernelKind k) {
    switch (k) {
        case KernelKind::none: return "none";
        case KernelKind::gaussian: return "gaussian";
        case KernelKind::coulomb: return "coulomb";
    }
    return "none";
}

}  // namespace

InstanceSpec parse_instance(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("(document)", e.what());
    }
    if (!root.is_object()) throw ParseError("(document)", "expected a JSON object");

    InstanceSpec spec;
    spec.dimension = as_int(require(root, "dimension", ""), "dimension");
    if (spec.dimension < 1) throw ParseError("dimension", "must be >= 1");
    spec.grid_m = as_int(require(root, "grid_m", ""), "grid_m");
    if (spec.grid_m < 2) throw ParseError("grid_m", "must be >= 2");

    const json& src = require(root, "source", "");
    spec.source_points = as_matrix(require(src, "points", "source"), spec.dimension,
                                   "source.points");
    spec.source_weights = as_vector(require(src, "weights", "source"), "source.weights");
    if (spec.source_weights.size() != spec.source_points.rows()) {
        throw ParseError("source.weights", "length differs from source.points");
    }

    const json& tgt = require(root, "target", "");
    spec.target_points = as_matrix(require(tgt, "points", "target"), spec.dimension,
                                   "target.points");
    spec.target_weights = as_vector(require(tgt, "weights", "target"), "target.weights");
    if (spec.target_weights.size() != spec.target_points.rows()) {
        throw ParseError("target.weights", "length differs from target.points");
    }

    spec.potential = parse_potential(require(root, "potential", ""), spec.dimension);

    const json& inter = require(root, "interaction", "");
    {
        const json& k = require(inter, "kernel", "interaction");
        if (!k.is_string()) throw ParseError("interaction.kernel", "expected a string");
        spec.interaction.kernel = parse_kernel(k.get<std::string>());
    }
    spec.interaction.theta = as_double(require(inter, "theta", "interaction"), "interaction.theta");
    spec.interaction.beta = as_double(require(inter, "beta", "interaction"), "interaction.beta");
    if (inter.contains("coulomb_smoothing")) {
        spec.interaction.coulomb_smoothing =
            as_double(inter["coulomb_smoothing"], "interaction.coulomb_smoothing");
    }
    try {
        validate(spec.interaction);
    } catch (const std::invalid_argument& e) {
        throw ParseError("interaction", e.what());
    }

    const json& solver = require(root, "solver", "");
    spec.solver.tol = as_double(require(solver, "tol", "solver"), "solver.tol");
    if (spec.solver.tol <= 0.0) throw ParseError("solver.tol", "must be positive");
    spec.solver.max_iter = as_int(require(solver, "max_iter", "solver"), "solver.max_iter");
    if (spec.solver.max_iter < 1) throw ParseError("solver.max_iter", "must be >= 1");
    spec.solver.damping = as_double(require(solver, "damping", "solver"), "solver.damping");
    if (!(spec.solver.damping > 0.0 && spec.solver.damping <= 1.0)) {
        throw ParseError("solver.damping", "must lie in (0, 1]");
    }
    spec.solver.seed = as_uint64(require(solver, "seed", "solver"), "solver.seed");
    if (solver.contains("max_cycle")) {
        spec.solver.max_cycle = as_int(solver["max_cycle"], "solver.max_cycle");
        if (spec.solver.max_cycle < 2 || spec.solver.max_cycle > 6) {
            throw ParseError("solver.max_cycle", "must lie in [2, 6]");
        }
    }
    if (solver.contains("outer_tol")) {
        spec.solver.outer_tol = as_double(solver["outer_tol"], "solver.outer_tol");
        if (spec.solver.outer_tol <= 0.0) throw ParseError("solver.outer_tol", "must be positive");
    }
    if (solver.contains("max_outer")) {
        spec.solver.max_outer = as_int(solver["max_outer"], "solver.max_outer");
        if (spec.solver.max_outer < 1) throw ParseError("solver.max_outer", "must be >= 1");
    }

    // Construct early so dimensional or bound inconsistencies surface as parse
    // failures with a named field.
    build_potential(spec.potential, spec.dimension);
    return spec;
}

std::string emit_instance(const InstanceSpec& spec) {
    json root;
    root["dimension"] = spec.dimension;
    root["grid_m"] = spec.grid_m;
    root["source"] = json{{"points", mat_to_json(spec.source_points)},
                          {"weights", vec_to_json(spec.source_weights)}};
    root["target"] = json{{"points", mat_to_json(spec.target_points)},
                          {"weights", vec_to_json(spec.target_weights)}};
    root["potential"] = emit_potential(spec.potential);
    root["interaction"] = json{{"kernel", kernel_name(spec.interaction.kernel)},
                               {"theta", spec.interaction.theta},
                               {"beta", spec.interaction.beta},
                               {"coulomb_smoothing", spec.interaction.coulomb_smoothing}};
    root["solver"] = json{{"tol", spec.solver.tol},
                          {"max_iter", spec.solver.max_iter},
                          {"damping", spec.solver.damping},
                          {"seed", spec.solver.seed},
                          {"max_cycle", spec.solver.max_cycle},
                          {"outer_tol", spec.solver.outer_tol},
                          {"max_outer", spec.solver.max_outer}};
    return root.dump(2) + "\n";
}

InstanceSpec load_instance_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("(file)", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_instance(ss.str());
}

PotentialPtr build_potential(const PotentialSpec& spec, int dimension) {
    PotentialPtr pot;
    try {
        switch (spec.kind) {
            case PotentialSpec::Kind::zero:
                pot = std::make_shared<ZeroPotential>();
                break;
            case PotentialSpec::Kind::linear_gradient:
                if (spec.gradient.size() != dimension) {
                    throw ParseError("potential.gradient", "length differs from dimension");
                }
                pot = std::make_shared<LinearPotential>(spec.gradient, spec.domain_radius);
                break;
            case PotentialSpec::Kind::gaussian_well:
                if (spec.center.size() != dimension) {
                    throw ParseError("potential.center", "length differs from dimension");
                }
                pot = std::make_shared<GaussianWellPotential>(spec.center, spec.depth, spec.width);
                break;
            case PotentialSpec::Kind::custom_table:
                if (spec.origin.size() != dimension) {
                    throw ParseError("potential.origin", "length differs from dimension");
                }
                pot = std::make_shared<TablePotential>(spec.origin, spec.spacing, spec.shape,
                                                       spec.values, spec.gradients);
                break;
        }
    } catch (const std::invalid_argument& e) {
        throw ParseError("potential", e.what());
    }

    if (spec.declared_K) {
        const double rel = std::abs(*spec.declared_K - pot->bound_K()) /
                           (1.0 + std::abs(pot->bound_K()));
        if (rel > 1e-9) {
            throw ParseError("potential.bounds.K",
                             "declared " + fmt17(*spec.declared_K) + " but the family's bound is " +
                                 fmt17(pot->bound_K()));
        }
    }
    if (spec.declared_L) {
        const double rel = std::abs(*spec.declared_L - pot->lipschitz_L()) /
                           (1.0 + std::abs(pot->lipschitz_L()));
        if (rel > 1e-9) {
            throw ParseError("potential.bounds.L",
                             "declared " + fmt17(*spec.declared_L) + " but the family's bound is " +
                                 fmt17(pot->lipschitz_L()));
        }
    }
    return pot;
}

DiscreteMeasure source_measure(const InstanceSpec& spec) {
    try {
        return DiscreteMeasure(spec.source_points, spec.source_weights);
    } catch (const std::invalid_argument& e) {
        throw ParseError("source", e.what());
    }
}

DiscreteMeasure target_measure(const InstanceSpec& spec) {
    try {
        return DiscreteMeasure(spec.target_points, spec.target_weights);
    } catch (const std::invalid_argument& e) {
        throw ParseError("target", e.what());
    }
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace pathot
