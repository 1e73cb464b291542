#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "survboost/common.hpp"

namespace survboost {

struct CsvSchema {
    std::string duration_col;
    std::string event_col;
    std::vector<std::string> feature_cols;  // empty: every other column
};

struct FeatureInfo {
    std::string name;
    bool categorical = false;
    std::vector<std::string> categories;  // code = index, first-appearance order
};

/// Right-censored competing-risks sample: covariates, observed time, and an
/// event label where 0 means censored and 1..k_events name the event type.
struct Dataset {
    Matrix features;  // NaN marks a missing covariate
    std::vector<double> durations;
    std::vector<int> events;
    int k_events = 0;
    double t_max = 0.0;
    std::vector<FeatureInfo> feature_info;
    std::string duration_name = "duration";
    std::string event_name = "event";

    std::size_t n() const { return durations.size(); }
    std::size_t n_features() const { return features.cols; }

    /// Build from in-memory arrays; infers k_events from labels when < 0.
    static Dataset from_arrays(Matrix features, std::vector<double> durations,
                               std::vector<int> events, int k_events = -1);

    /// Checks the documented invariants; throws ValidationError.
    void validate() const;
};

Dataset load_dataset(const std::string& path, const CsvSchema& schema);

/// Writes duration, event, then feature columns. Numeric cells use shortest
/// round-trip formatting, missing values become empty cells, and categorical
/// codes are written back as their category strings so a reload re-encodes
/// to identical codes.
void save_dataset_csv(const Dataset& data, const std::string& path);

/// Deterministic disjoint row partition (train, test). Each half recomputes
/// its own t_max. Test size is floor(n * test_fraction).
std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction,
                                  std::uint64_t seed);

/// Re-encodes categorical columns of a freshly loaded dataset through the
/// category-to-code maps persisted with a trained model, so codes line up
/// with training. Categories unseen at training time become missing values.
void reencode_features(Dataset& data, const std::vector<FeatureInfo>& reference);

/// Strictly increasing evaluation horizons, all >= 0.
struct TimeGrid {
    std::vector<double> horizons;

    TimeGrid() = default;
    explicit TimeGrid(std::vector<double> h);
    static TimeGrid linspace(double lo, double hi, std::size_t n_points);

    std::size_t size() const { return horizons.size(); }
    double operator[](std::size_t j) const { return horizons[j]; }
};

}  // namespace survboost
