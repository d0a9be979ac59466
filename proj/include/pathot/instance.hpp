#pragma once

#include "pathot/interaction.hpp"
#include "pathot/measure.hpp"
#include "pathot/potential.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace pathot {

/// Raised on malformed instance text; field() names the offending entry.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& field, const std::string& why)
        : std::runtime_error("instance field '" + field + "': " + why), field_(field) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct PotentialSpec {
    enum class Kind { zero, linear_gradient, gaussian_well, custom_table };
    Kind kind = Kind::zero;

    // linear-gradient
    Vec gradient;
    double domain_radius = 10.0;

    // gaussian-well
    Vec center;
    double depth = 0.0;
    double width = 1.0;

    // custom-table
    Vec origin;
    double spacing = 0.0;
    std::vector<int> shape;
    std::vector<double> values;
    std::vector<double> gradients;

    // optional declared bounds, validated against the family's analytic ones
    std::optional<double> declared_K;
    std::optional<double> declared_L;

    bool operator==(const PotentialSpec& other) const;
};

struct SolverOptions {
    double tol = 1e-10;       // fixed-point solve tolerance
    int max_iter = 10000;     // fixed-point iteration cap
    double damping = 1.0;     // best-response averaging weight
    std::uint64_t seed = 1;   // randomized audits
    int max_cycle = 4;        // cyclical-monotonicity audit depth
    double outer_tol = 1e-8;  // best-response stop tolerance
    int max_outer = 500;      // best-response iteration cap

    bool operator==(const SolverOptions&) const = default;
};

struct InstanceSpec {
    int dimension = 1;
    int grid_m = 32;
    Mat source_points;
    Vec source_weights;
    Mat target_points;
    Vec target_weights;
    PotentialSpec potential;
    InteractionParams interaction;
    SolverOptions solver;

    bool operator==(const InstanceSpec& other) const;
};

InstanceSpec parse_instance(const std::string& text);
std::string emit_instance(const InstanceSpec& spec);
InstanceSpec load_instance_file(const std::string& path);

/// Instantiates the potential family; checks any declared bounds against the
/// family's analytic ones and dimensional consistency of the parameters.
PotentialPtr build_potential(const PotentialSpec& spec, int dimension);

DiscreteMeasure source_measure(const InstanceSpec& spec);
DiscreteMeasure target_measure(const InstanceSpec& spec);

/// Formats with 17 significant digits, enough to reproduce the double exactly.
std::string fmt17(double v);

}  // namespace pathot
