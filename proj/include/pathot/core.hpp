#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

namespace pathot {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Uniform partition of [0, 1] into m intervals together with composite
/// trapezoid weights. Immutable after construction; shared between paths.
class TimeGrid {
public:
    explicit TimeGrid(int m);

    int intervals() const { return m_; }
    int nodes() const { return m_ + 1; }
    double h() const { return h_; }
    double node(int j) const { return nodes_[j]; }
    const std::vector<double>& node_values() const { return nodes_; }
    double weight(int j) const { return weights_[j]; }
    const std::vector<double>& weights() const { return weights_; }

    /// Composite trapezoid rule over the whole grid. f holds one value per node.
    double trapezoid(const std::vector<double>& f) const;

private:
    int m_;
    double h_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

using GridPtr = std::shared_ptr<const TimeGrid>;

GridPtr make_grid(int m);

/// Piecewise-linear curve sampled at the grid nodes, one row per node.
struct DiscretePath {
    GridPtr grid;
    Mat points;  // (m+1) x d

    int dim() const { return static_cast<int>(points.cols()); }
    Vec at(int j) const { return points.row(j).transpose(); }
    double sup_distance(const DiscretePath& other) const;
};

DiscretePath linear_path(const Vec& x, const Vec& y, const GridPtr& grid);

/// Deterministic uniform sampling helper. std::uniform_real_distribution is
/// implementation-defined, so draws are derived from raw mt19937_64 output to
/// keep seeded runs reproducible.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform(double lo, double hi);
    Vec point(int d, double lo, double hi);
    int index(int n);  // uniform in {0, ..., n-1}

private:
    std::mt19937_64 eng_;
};

}  // namespace pathot
