#include "pathot/transport_map.hpp"

#include <cmath>

namespace pathot {

PathMap extract_map(const PathPlan& plan, const CostMatrix* cost, double tol) {
    if (tol <= 0.0) throw std::invalid_argument("extract_map: tol must be positive");
    const Mat& P = plan.coupling.matrix;
    std::vector<int> split_rows;
    PathMap map;
    map.assignment.assign(P.rows(), -1);

    for (int i = 0; i < P.rows(); ++i) {
        const double threshold = tol * plan.source.weight(i);
        int hit = -1;
        int hits = 0;
        for (int j = 0; j < P.cols(); ++j) {
            if (P(i, j) > threshold) {
                ++hits;
                hit = j;
            }
        }
        if (hits != 1) {
            split_rows.push_back(i);
        } else {
            map.assignment[i] = hit;
        }
    }
    if (!split_rows.empty()) {
        std::string rows;
        for (int r : split_rows) rows += (rows.empty() ? "" : ", ") + std::to_string(r);
        throw NonDeterministicPlanError(
            "extract_map: plan splits mass across several targets in rows {" + rows + "}",
            split_rows);
    }

    for (int i = 0; i < P.rows(); ++i) {
        const int j = map.assignment[i];
        const auto it = plan.paths.find({i, j});
        if (it == plan.paths.end()) {
            throw std::invalid_argument("extract_map: pair (" + std::to_string(i) + ", " +
                                        std::to_string(j) + ") has no stored path");
        }
        map.paths.push_back(it->second);
        if (cost != nullptr) {
            map.monge_value += plan.source.weight(i) * cost->entries(i, j);
        }
    }
    return map;
}

PushforwardReport pushforward_check(const PathMap& map, const DiscreteMeasure& mu0,
                                    const DiscreteMeasure& mu1) {
    if (static_cast<int>(map.assignment.size()) != mu0.size()) {
        throw std::invalid_argument("pushforward_check: assignment size mismatch");
    }
    Vec pushed = Vec::Zero(mu1.size());
    for (int i = 0; i < mu0.size(); ++i) {
        const int j = map.assignment[i];
        if (j < 0 || j >= mu1.size()) {
            throw std::invalid_argument("pushforward_check: assignment out of range at row " +
                                        std::to_string(i));
        }
        pushed[j] += mu0.weight(i);
    }
    PushforwardReport rep;
    for (int j = 0; j < mu1.size(); ++j) {
        const double miss = std::abs(pushed[j] - mu1.weight(j));
        if (miss > 1e-10) rep.mismatched_targets.push_back(j);
        rep.max_mismatch = std::max(rep.max_mismatch, miss);
    }
    rep.ok = rep.mismatched_targets.empty();
    return rep;
}

}  // namespace pathot
