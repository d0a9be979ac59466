#include "pathot/core.hpp"

#include <stdexcept>

namespace pathot {

TimeGrid::TimeGrid(int m) : m_(m) {
    if (m < 2) {
        throw std::invalid_argument("TimeGrid: need at least 2 intervals, got " +
                                    std::to_string(m));
    }
    h_ = 1.0 / m;
    nodes_.resize(m + 1);
    weights_.resize(m + 1);
    for (int j = 0; j <= m; ++j) {
        nodes_[j] = static_cast<double>(j) / m;
        weights_[j] = (j == 0 || j == m) ? 0.5 * h_ : h_;
    }
}

double TimeGrid::trapezoid(const std::vector<double>& f) const {
    if (static_cast<int>(f.size()) != nodes()) {
        throw std::invalid_argument("trapezoid: expected one value per node");
    }
    double acc = 0.0;
    for (int j = 0; j <= m_; ++j) acc += weights_[j] * f[j];
    return acc;
}

GridPtr make_grid(int m) { return std::make_shared<const TimeGrid>(m); }

double DiscretePath::sup_distance(const DiscretePath& other) const {
    if (points.rows() != other.points.rows() || points.cols() != other.points.cols()) {
        throw std::invalid_argument("sup_distance: paths live on different grids");
    }
    double best = 0.0;
    for (int j = 0; j < points.rows(); ++j) {
        best = std::max(best, (points.row(j) - other.points.row(j)).norm());
    }
    return best;
}

DiscretePath linear_path(const Vec& x, const Vec& y, const GridPtr& grid) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("linear_path: endpoint dimensions differ");
    }
    DiscretePath p;
    p.grid = grid;
    p.points.resize(grid->nodes(), x.size());
    for (int j = 0; j < grid->nodes(); ++j) {
        const double t = grid->node(j);
        p.points.row(j) = ((1.0 - t) * x + t * y).transpose();
    }
    return p;
}

double Rng::uniform(double lo, double hi) {
    const double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

Vec Rng::point(int d, double lo, double hi) {
    Vec v(d);
    for (int i = 0; i < d; ++i) v[i] = uniform(lo, hi);
    return v;
}

int Rng::index(int n) {
    return static_cast<int>(eng_() % static_cast<std::uint64_t>(n));
}

}  // namespace pathot
