#pragma once

#include <vector>

#include "survboost/dataset.hpp"

namespace survboost {

/// Predictions over rows x horizons x classes, where class 0 is the survival
/// probability and classes 1..k_events the per-event cumulative incidences.
/// Each (row, horizon) slice sums to one.
struct CifMatrix {
    std::size_t n_rows = 0;
    int k_events = 0;
    TimeGrid grid;
    std::vector<double> values;

    CifMatrix() = default;
    CifMatrix(std::size_t rows, int k, TimeGrid g)
        : n_rows(rows), k_events(k), grid(std::move(g)),
          values(rows * grid.size() * std::size_t(k + 1), 0.0) {}

    std::size_t n_classes() const { return std::size_t(k_events) + 1; }

    double at(std::size_t i, std::size_t j, std::size_t c) const {
        return values[(i * grid.size() + j) * n_classes() + c];
    }
    double& at(std::size_t i, std::size_t j, std::size_t c) {
        return values[(i * grid.size() + j) * n_classes() + c];
    }
};

}  // namespace survboost
