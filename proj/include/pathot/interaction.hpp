#pragma once

#include "pathot/endpoint.hpp"
#include "pathot/lp.hpp"
#include "pathot/plan.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace pathot {

enum class KernelKind { none, gaussian, coulomb };

/// Pairwise path-interaction parameters. theta scales the kernel, beta is the
/// gaussian decay rate, coulomb_smoothing regularizes the coulomb kernel
/// (|r|^2 + smoothing^2)^((2-d)/2), which needs dimension >= 3.
struct InteractionParams {
    KernelKind kernel = KernelKind::none;
    double theta = 0.0;
    double beta = 1.0;
    double coulomb_smoothing = 0.0;
};

/// Throws invalid_argument unless theta >= 0, beta > 0, smoothing >= 0.
void validate(const InteractionParams& params);

class SingularityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// sup_r exp(-beta r^2) (1 + 2 beta r^2); attained at r^2 = 1/(2 beta) with
/// value 2 exp(-1/2) for every beta. Factor in the gradient Lipschitz bound
/// 4 theta beta * factor of the effective potential.
double interaction_lipschitz_factor();

/// Time-averaged pair interaction: trapezoid over t of theta k(|a(t) - b(t)|).
double kernel_value(const DiscretePath& a, const DiscretePath& b,
                    const InteractionParams& params);

/// U(gamma; plan) = sum over supported pairs of P_ij * kernel(gamma, path_ij).
double interaction_potential_U(const DiscretePath& gamma, const PathPlan& plan,
                               const InteractionParams& params);

/// Time-dependent field generated by a plan under the gaussian kernel:
///   V(x, t) = -2 theta sum_ij P_ij exp(-beta |x - path_ij(t)|^2),
/// with t snapped to the nearest grid node. Declared bounds: sup |V| <= 2 theta
/// and Lip(grad V) <= 4 theta beta * interaction_lipschitz_factor().
class EffectivePotential final : public Potential {
public:
    EffectivePotential(const PathPlan& plan, const InteractionParams& params);

    double value(const Vec& x, double t) const override;
    Vec gradient(const Vec& x, double t) const override;
    Mat hessian(const Vec& x, double t) const override;
    double bound_K() const override;
    double lipschitz_L() const override;

private:
    int snap(double t) const;

    std::vector<double> weights_;
    std::vector<Mat> paths_;
    GridPtr grid_;
    double theta_;
    double beta_;
};

PotentialPtr effective_potential(const PathPlan& plan, const InteractionParams& params);

/// Endpoint cost table for the effective cost c(gamma) + 2 U(gamma; plan):
/// every pair's boundary value problem is solved under base + effective
/// potential. Requires 4 theta beta * interaction_lipschitz_factor() < 1 so
/// the fixed-point solves are contractive.
EndpointCostTable effective_cost_matrix(const PathPlan& plan, const PotentialPtr& base,
                                        const InteractionParams& params, const GridPtr& grid,
                                        const BvpOptions& opts = {});

struct InteractionEnergyBreakdown {
    double base = 0.0;       // sum_ij P_ij * action(path_ij)
    double quadratic = 0.0;  // sum over atom pairs of w w' kernel(path, path')
    double total = 0.0;
};

InteractionEnergyBreakdown total_energy(const PathPlan& plan, const Potential& base,
                                        const InteractionParams& params);

struct OuterIterationRecord {
    int iteration = 0;
    double energy_total = 0.0;
    double energy_base = 0.0;
    double energy_quadratic = 0.0;
    double coupling_change = 0.0;  // l1 distance between successive couplings
    double path_change = 0.0;      // max sup-distance between successive path tables
};

struct SelfConsistencyCertificate {
    double duality_gap = 0.0;        // final coupling vs duals of its own cost table
    double kkt_max_violation = 0.0;  // max dual infeasibility / support slack
    double minimality_excess = 0.0;  // max |stored action - table cost| on support
    double best_response_change = 0.0;  // l1 change from one extra best response
    bool self_consistent = false;
};

class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(const std::string& what, std::vector<OuterIterationRecord> trace)
        : std::runtime_error(what), trace_(std::move(trace)) {}
    const std::vector<OuterIterationRecord>& trace() const { return trace_; }

private:
    std::vector<OuterIterationRecord> trace_;
};

struct ProblemBOptions {
    double damping = 1.0;  // in (0, 1]
    double tol = 1e-8;     // stop when coupling and path updates fall below
    int max_outer = 500;
    BvpOptions bvp;
};

struct ProblemBResult {
    PathPlan plan;
    DualPotentials duals;
    std::vector<OuterIterationRecord> trace;
    SelfConsistencyCertificate certificate;
    int outer_iterations = 0;
    bool converged = false;
};

/// Best-response fixed point for interacting paths: starting from the
/// non-interacting optimal plan, repeatedly rebuild the effective cost table
/// of the current plan, solve the transportation problem, and average the
/// coupling with the given damping; paths are refreshed from the latest
/// solves. Stops once both the coupling and the path table have stabilized.
/// On convergence the certificate re-scores the final plan against its own
/// effective cost.
ProblemBResult solve_problem_b(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                               const PotentialPtr& base, const InteractionParams& params,
                               const GridPtr& grid, const ProblemBOptions& opts = {});

struct KktReport {
    double max_feasibility_violation = 0.0;  // phi_i + psi_j - C_ij over all pairs
    double max_support_gap = 0.0;            // |phi_i + psi_j - C_ij| on support
    double duality_gap = 0.0;
    bool ok = false;
};

/// Checks the optimality system of the plan's coupling against the duals under
/// the plan's own effective cost: dual feasibility everywhere, equality on the
/// support, both within 1e-8.
KktReport kkt_audit(const PathPlan& plan, const DualPotentials& duals,
                    const PotentialPtr& base, const InteractionParams& params,
                    const BvpOptions& opts = {});

struct ConvexityProbeReport {
    double min_quadratic_second_difference = 0.0;
    double max_abs_base_second_difference = 0.0;
    int samples = 0;
    bool ok = false;
};

/// Samples the energy along the mixture family (1-s) plan_a + s plan_b on a
/// uniform grid of s values and returns the worst second differences: the
/// quadratic term of a positive-type kernel must be convex in s (second
/// difference >= -1e-9) and the base term exactly linear.
ConvexityProbeReport convexity_probe(const PathPlan& plan_a, const PathPlan& plan_b,
                                     const Potential& base, const InteractionParams& params,
                                     int samples = 20);

/// theta threshold below which the interacting twist margin stays positive:
/// d^(-5/4) / sqrt(2).
double theta0_bound(int d);

struct TzLipschitzReport {
    double max_ratio = 0.0;
    double bound = 0.0;
    int samples = 0;
    bool ok = false;
};

/// Samples |T_z(w) - T_z(u)| / |w - u| for T_z(w) = exp(-|w-z|^2)(w - z) at
/// random triples and compares against the dimension-dependent bound d^2.
TzLipschitzReport tz_lipschitz_check(int samples, int d, std::uint64_t seed);

/// |grad_y c_eff(x1, y) - grad_y c_eff(x2, y)| with the gradients obtained by
/// central differences of the effective cost (zero base potential). Requires
/// beta == 1 and theta below theta0_bound(d).
double twist_margin_effective(const Vec& x1, const Vec& x2, const Vec& y,
                              const PathPlan& plan, const InteractionParams& params,
                              const GridPtr& grid, const BvpOptions& opts = {});

}  // namespace pathot
