#pragma once

#include <memory>
#include <span>
#include <vector>

#include "survboost/dataset.hpp"
#include "survboost/step_function.hpp"

namespace survboost {

/// Anything that can report the censor-free probability G(t|x). Implemented
/// by the marginal Kaplan-Meier curve (ignores x) and by the boosted
/// censoring model. at_left is the left limit G(t-|x); continuous estimators
/// may return at(x, t).
class CensoringEstimator {
public:
    virtual ~CensoringEstimator() = default;
    virtual double at(std::span<const double> x, double t) const = 0;
    virtual double at_left(std::span<const double> x, double t) const = 0;
};

class MarginalCensoring final : public CensoringEstimator {
public:
    explicit MarginalCensoring(StepFunction curve) : curve_(std::move(curve)) {}

    double at(std::span<const double>, double t) const override { return curve_(t); }
    double at_left(std::span<const double>, double t) const override {
        return curve_.left_limit(t);
    }

    const StepFunction& curve() const { return curve_; }

private:
    StepFunction curve_;
};

/// Classification target and inverse-censoring weight for one (row, horizon)
/// pair. weight == 0 exactly when the row is censored at or before its
/// horizon; label == 0 whenever weight == 0 or the row outlives the horizon.
struct IpcwTarget {
    int label = 0;
    double weight = 0.0;
};

/// Observation (t, delta) scored at horizon zeta:
///   t > zeta            -> label 0, weight 1 / max(G(zeta|x), eps)
///   t <= zeta, delta!=0 -> label delta, weight 1 / max(G(t-|x), eps)
///   t <= zeta, delta==0 -> label 0, weight 0
IpcwTarget ipcw_target(double t, int delta, double zeta, std::span<const double> x,
                       const CensoringEstimator& g, double eps);

/// Elementwise ipcw_target over the dataset with one horizon per row.
void ipcw_batch(const Dataset& data, std::span<const double> horizons,
                const CensoringEstimator& g, double eps, std::vector<int>& labels,
                std::vector<double>& weights);

}  // namespace survboost
