#pragma once

#include "pathot/core.hpp"

#include <memory>
#include <vector>

namespace pathot {

/// Time-dependent scalar field V(x, t) on R^d with declared analytic bounds:
/// bound_K() >= sup |V| over the working domain and lipschitz_L() is a
/// Lipschitz constant of the spatial gradient. The solvers trust these bounds
/// when deciding whether the fixed-point iteration is contractive.
class Potential {
public:
    virtual ~Potential() = default;

    virtual double value(const Vec& x, double t) const = 0;
    virtual Vec gradient(const Vec& x, double t) const = 0;
    /// Spatial Hessian. Default implementation differentiates gradient()
    /// with central differences; analytic families override.
    virtual Mat hessian(const Vec& x, double t) const;

    virtual double bound_K() const = 0;
    virtual double lipschitz_L() const = 0;
};

using PotentialPtr = std::shared_ptr<const Potential>;

/// V == 0.
class ZeroPotential final : public Potential {
public:
    double value(const Vec&, double) const override { return 0.0; }
    Vec gradient(const Vec& x, double) const override { return Vec::Zero(x.size()); }
    Mat hessian(const Vec& x, double) const override {
        return Mat::Zero(x.size(), x.size());
    }
    double bound_K() const override { return 0.0; }
    double lipschitz_L() const override { return 0.0; }
};

/// V(x) = g . x, constant gradient g. The sup bound is taken over a ball of
/// the given radius since a linear field is unbounded globally.
class LinearPotential final : public Potential {
public:
    explicit LinearPotential(Vec g, double domain_radius = 10.0);

    double value(const Vec& x, double) const override { return g_.dot(x); }
    Vec gradient(const Vec&, double) const override { return g_; }
    Mat hessian(const Vec& x, double) const override {
        return Mat::Zero(x.size(), x.size());
    }
    double bound_K() const override { return g_.norm() * radius_; }
    double lipschitz_L() const override { return 0.0; }

    const Vec& slope() const { return g_; }
    double domain_radius() const { return radius_; }

private:
    Vec g_;
    double radius_;
};

/// V(x) = depth * exp(-|x - center|^2 / (2 width^2)).
/// sup |V| = |depth|, Lip(grad V) = |depth| / width^2 (attained at the center).
class GaussianWellPotential final : public Potential {
public:
    GaussianWellPotential(Vec center, double depth, double width);

    double value(const Vec& x, double) const override;
    Vec gradient(const Vec& x, double) const override;
    Mat hessian(const Vec& x, double) const override;
    double bound_K() const override { return std::abs(depth_); }
    double lipschitz_L() const override { return std::abs(depth_) / (width_ * width_); }

    const Vec& center() const { return center_; }
    double depth() const { return depth_; }
    double width() const { return width_; }

private:
    Vec center_;
    double depth_;
    double width_;
};

/// Tabulated autonomous potential on a uniform axis-aligned lattice with
/// multilinear interpolation of both values and gradients. Queries outside
/// the box are clamped to its boundary, so the declared bounds stay valid
/// globally. The Lipschitz bound is assembled from adjacent-node gradient
/// differences (exact for the interpolant, axis-wise, Frobenius-combined).
class TablePotential final : public Potential {
public:
    TablePotential(Vec origin, double spacing, std::vector<int> shape,
                   std::vector<double> values, std::vector<double> gradients);

    double value(const Vec& x, double) const override;
    Vec gradient(const Vec& x, double) const override;
    double bound_K() const override { return bound_k_; }
    double lipschitz_L() const override { return lipschitz_l_; }

    const Vec& origin() const { return origin_; }
    double spacing() const { return spacing_; }
    const std::vector<int>& shape() const { return shape_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& gradients() const { return gradients_; }

private:
    std::size_t flat_index(const std::vector<int>& idx) const;
    template <typename F>
    void interpolate(const Vec& x, const F& accumulate) const;

    Vec origin_;
    double spacing_;
    std::vector<int> shape_;
    std::vector<double> values_;     // row-major, last axis fastest
    std::vector<double> gradients_;  // same layout, d components per node
    double bound_k_ = 0.0;
    double lipschitz_l_ = 0.0;
};

/// Pointwise sum of potentials; bounds add.
class SumPotential final : public Potential {
public:
    explicit SumPotential(std::vector<PotentialPtr> terms);

    double value(const Vec& x, double t) const override;
    Vec gradient(const Vec& x, double t) const override;
    Mat hessian(const Vec& x, double t) const override;
    double bound_K() const override;
    double lipschitz_L() const override;

private:
    std::vector<PotentialPtr> terms_;
};

struct GradientCheckReport {
    double max_rel_error = 0.0;
    int probes = 0;
    bool ok = false;
};

/// Self-test hook: compares gradient() against central differences of value()
/// at random probes drawn from [-box, box]^d, relative tolerance `tol`.
GradientCheckReport check_gradient(const Potential& pot, int dim, int probes,
                                   std::uint64_t seed, double box = 2.0,
                                   double tol = 1e-5, double fd_step = 1e-5);

}  // namespace pathot
