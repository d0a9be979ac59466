#include "pathot/measure.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace pathot {

namespace {
constexpr double kMergeTol = 1e-12;
constexpr double kMassTol = 1e-12;
}  // namespace

DiscreteMeasure::DiscreteMeasure(Mat points, Vec weights) {
    if (points.rows() != weights.size()) {
        throw std::invalid_argument("DiscreteMeasure: point/weight count mismatch");
    }
    if (points.rows() == 0) {
        throw std::invalid_argument("DiscreteMeasure: empty support");
    }
    for (int i = 0; i < weights.size(); ++i) {
        if (!std::isfinite(weights[i]) || weights[i] < 0.0) {
            throw std::invalid_argument("DiscreteMeasure: weights must be nonnegative, atom " +
                                        std::to_string(i));
        }
    }
    if (!points.allFinite()) {
        throw std::invalid_argument("DiscreteMeasure: points must be finite");
    }

    // Merge near-duplicate points, accumulating weight onto the first copy.
    std::vector<int> keep;
    std::vector<double> mass;
    for (int i = 0; i < points.rows(); ++i) {
        int found = -1;
        for (std::size_t k = 0; k < keep.size(); ++k) {
            if ((points.row(i) - points.row(keep[k])).norm() <= kMergeTol) {
                found = static_cast<int>(k);
                break;
            }
        }
        if (found < 0) {
            keep.push_back(i);
            mass.push_back(weights[i]);
        } else {
            mass[found] += weights[i];
        }
    }

    points_.resize(static_cast<int>(keep.size()), points.cols());
    weights_.resize(static_cast<int>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        points_.row(static_cast<int>(k)) = points.row(keep[k]);
        weights_[static_cast<int>(k)] = mass[k];
    }

    const double total = weights_.sum();
    if (std::abs(total - 1.0) > kMassTol) {
        throw std::invalid_argument("DiscreteMeasure: weights sum to " + std::to_string(total) +
                                    ", expected 1");
    }
}

}  // namespace pathot
