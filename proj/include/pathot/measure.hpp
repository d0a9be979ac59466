#pragma once

#include "pathot/core.hpp"

namespace pathot {

/// Finite atomic probability measure: n support points in R^d with
/// nonnegative weights summing to 1 (tolerance 1e-12). Points closer than
/// 1e-12 are merged at construction, combining their weights.
class DiscreteMeasure {
public:
    /// Empty placeholder, used only as a not-yet-assigned slot in results.
    DiscreteMeasure() = default;

    DiscreteMeasure(Mat points, Vec weights);

    int size() const { return static_cast<int>(weights_.size()); }
    int dim() const { return static_cast<int>(points_.cols()); }
    Vec point(int i) const { return points_.row(i).transpose(); }
    const Mat& points() const { return points_; }
    double weight(int i) const { return weights_[i]; }
    const Vec& weights() const { return weights_; }

private:
    Mat points_;   // n x d
    Vec weights_;  // n
};

}  // namespace pathot
