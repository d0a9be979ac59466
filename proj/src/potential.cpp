#include "pathot/potential.hpp"

#include <cmath>
#include <stdexcept>

namespace pathot {

Mat Potential::hessian(const Vec& x, double t) const {
    const int d = static_cast<int>(x.size());
    const double h = 1e-5;
    Mat H(d, d);
    Vec xp = x, xm = x;
    for (int k = 0; k < d; ++k) {
        xp[k] = x[k] + h;
        xm[k] = x[k] - h;
        H.col(k) = (gradient(xp, t) - gradient(xm, t)) / (2.0 * h);
        xp[k] = x[k];
        xm[k] = x[k];
    }
    return 0.5 * (H + H.transpose());
}

LinearPotential::LinearPotential(Vec g, double domain_radius)
    : g_(std::move(g)), radius_(domain_radius) {
    if (radius_ <= 0.0) throw std::invalid_argument("LinearPotential: radius must be positive");
}

GaussianWellPotential::GaussianWellPotential(Vec center, double depth, double width)
    : center_(std::move(center)), depth_(depth), width_(width) {
    if (width_ <= 0.0) throw std::invalid_argument("GaussianWellPotential: width must be positive");
}

double GaussianWellPotential::value(const Vec& x, double) const {
    const double r2 = (x - center_).squaredNorm();
    return depth_ * std::exp(-r2 / (2.0 * width_ * width_));
}

Vec GaussianWellPotential::gradient(const Vec& x, double) const {
    const Vec dx = x - center_;
    const double w2 = width_ * width_;
    return (-depth_ / w2) * std::exp(-dx.squaredNorm() / (2.0 * w2)) * dx;
}

Mat GaussianWellPotential::hessian(const Vec& x, double) const {
    const Vec dx = x - center_;
    const double w2 = width_ * width_;
    const double e = std::exp(-dx.squaredNorm() / (2.0 * w2));
    const int d = static_cast<int>(x.size());
    return (-depth_ / w2) * e *
           (Mat::Identity(d, d) - dx * dx.transpose() / w2);
}

TablePotential::TablePotential(Vec origin, double spacing, std::vector<int> shape,
                               std::vector<double> values, std::vector<double> gradients)
    : origin_(std::move(origin)),
      spacing_(spacing),
      shape_(std::move(shape)),
      values_(std::move(values)),
      gradients_(std::move(gradients)) {
    const int d = static_cast<int>(origin_.size());
    if (d < 1) throw std::invalid_argument("TablePotential: empty origin");
    if (spacing_ <= 0.0) throw std::invalid_argument("TablePotential: spacing must be positive");
    if (static_cast<int>(shape_.size()) != d) {
        throw std::invalid_argument("TablePotential: shape rank does not match origin");
    }
    std::size_t count = 1;
    for (int n : shape_) {
        if (n < 2) throw std::invalid_argument("TablePotential: each axis needs at least 2 nodes");
        count *= static_cast<std::size_t>(n);
    }
    if (values_.size() != count) {
        throw std::invalid_argument("TablePotential: values length does not match shape");
    }
    if (gradients_.size() != count * static_cast<std::size_t>(d)) {
        throw std::invalid_argument("TablePotential: gradients length does not match shape");
    }

    for (double v : values_) bound_k_ = std::max(bound_k_, std::abs(v));

    // Axis-wise max gradient jump between adjacent nodes, combined in
    // Frobenius norm: a Lipschitz constant of the interpolated gradient.
    double sum_sq = 0.0;
    std::vector<int> idx(d, 0);
    for (int axis = 0; axis < d; ++axis) {
        double max_axis = 0.0;
        std::fill(idx.begin(), idx.end(), 0);
        while (true) {
            if (idx[axis] + 1 < shape_[axis]) {
                std::vector<int> nb = idx;
                nb[axis] += 1;
                const std::size_t a = flat_index(idx) * d;
                const std::size_t b = flat_index(nb) * d;
                double diff_sq = 0.0;
                for (int k = 0; k < d; ++k) {
                    const double dd = gradients_[b + k] - gradients_[a + k];
                    diff_sq += dd * dd;
                }
                max_axis = std::max(max_axis, std::sqrt(diff_sq) / spacing_);
            }
            int carry = d - 1;
            while (carry >= 0 && ++idx[carry] >= shape_[carry]) idx[carry--] = 0;
            if (carry < 0) break;
        }
        sum_sq += max_axis * max_axis;
    }
    lipschitz_l_ = std::sqrt(sum_sq);
}

std::size_t TablePotential::flat_index(const std::vector<int>& idx) const {
    std::size_t flat = 0;
    for (std::size_t a = 0; a < shape_.size(); ++a) {
        flat = flat * static_cast<std::size_t>(shape_[a]) + static_cast<std::size_t>(idx[a]);
    }
    return flat;
}

template <typename F>
void TablePotential::interpolate(const Vec& x, const F& accumulate) const {
    const int d = static_cast<int>(origin_.size());
    std::vector<int> base(d);
    std::vector<double> frac(d);
    for (int a = 0; a < d; ++a) {
        double u = (x[a] - origin_[a]) / spacing_;
        u = std::min(std::max(u, 0.0), static_cast<double>(shape_[a] - 1));
        int cell = std::min(static_cast<int>(u), shape_[a] - 2);
        base[a] = cell;
        frac[a] = u - cell;
    }
    std::vector<int> idx(d);
    for (int corner = 0; corner < (1 << d); ++corner) {
        double w = 1.0;
        for (int a = 0; a < d; ++a) {
            const int bit = (corner >> a) & 1;
            idx[a] = base[a] + bit;
            w *= bit ? frac[a] : (1.0 - frac[a]);
        }
        if (w != 0.0) accumulate(flat_index(idx), w);
    }
}

double TablePotential::value(const Vec& x, double) const {
    if (x.size() != origin_.size()) {
        throw std::invalid_argument("TablePotential: query dimension mismatch");
    }
    double v = 0.0;
    interpolate(x, [&](std::size_t flat, double w) { v += w * values_[flat]; });
    return v;
}

Vec TablePotential::gradient(const Vec& x, double) const {
    if (x.size() != origin_.size()) {
        throw std::invalid_argument("TablePotential: query dimension mismatch");
    }
    const int d = static_cast<int>(origin_.size());
    Vec g = Vec::Zero(d);
    interpolate(x, [&](std::size_t flat, double w) {
        for (int k = 0; k < d; ++k) g[k] += w * gradients_[flat * d + k];
    });
    return g;
}

SumPotential::SumPotential(std::vector<PotentialPtr> terms) : terms_(std::move(terms)) {
    for (const auto& t : terms_) {
        if (!t) throw std::invalid_argument("SumPotential: null term");
    }
}

double SumPotential::value(const Vec& x, double t) const {
    double v = 0.0;
    for (const auto& term : terms_) v += term->value(x, t);
    return v;
}

Vec SumPotential::gradient(const Vec& x, double t) const {
    Vec g = Vec::Zero(x.size());
    for (const auto& term : terms_) g += term->gradient(x, t);
    return g;
}

Mat SumPotential::hessian(const Vec& x, double t) const {
    Mat H = Mat::Zero(x.size(), x.size());
    for (const auto& term : terms_) H += term->hessian(x, t);
    return H;
}

double SumPotential::bound_K() const {
    double k = 0.0;
    for (const auto& term : terms_) k += term->bound_K();
    return k;
}

double SumPotential::lipschitz_L() const {
    double l = 0.0;
    for (const auto& term : terms_) l += term->lipschitz_L();
    return l;
}

GradientCheckReport check_gradient(const Potential& pot, int dim, int probes,
                                   std::uint64_t seed, double box, double tol,
                                   double fd_step) {
    Rng rng(seed);
    GradientCheckReport rep;
    rep.probes = probes;
    for (int p = 0; p < probes; ++p) {
        const Vec x = rng.point(dim, -box, box);
        const double t = rng.uniform(0.0, 1.0);
        const Vec g = pot.gradient(x, t);
        Vec fd(dim);
        Vec xp = x, xm = x;
        for (int k = 0; k < dim; ++k) {
            xp[k] = x[k] + fd_step;
            xm[k] = x[k] - fd_step;
            fd[k] = (pot.value(xp, t) - pot.value(xm, t)) / (2.0 * fd_step);
            xp[k] = x[k];
            xm[k] = x[k];
        }
        const double rel = (g - fd).norm() / (1.0 + g.norm());
        rep.max_rel_error = std::max(rep.max_rel_error, rel);
    }
    rep.ok = rep.max_rel_error <= tol;
    return rep;
}

}  // namespace pathot
