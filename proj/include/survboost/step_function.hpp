#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "survboost/common.hpp"

namespace survboost {

/// Right-continuous piecewise-constant function of time. The function takes
/// value_at_0 on [0, knots[0]) and values[j] on [knots[j], knots[j+1]);
/// evaluation past the last knot returns the last value.
class StepFunction {
public:
    StepFunction() = default;

    StepFunction(std::vector<double> knots, std::vector<double> values,
                 double value_at_0)
        : knots_(std::move(knots)), values_(std::move(values)), value_at_0_(value_at_0) {
        if (knots_.size() != values_.size())
            throw ValidationError("step function: knots/values length mismatch");
        for (std::size_t j = 1; j < knots_.size(); ++j)
            if (!(knots_[j] > knots_[j - 1]))
                throw ValidationError("step function: knots must be strictly increasing");
    }

    double operator()(double t) const {
        auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
        if (it == knots_.begin()) return value_at_0_;
        return values_[std::size_t(it - knots_.begin()) - 1];
    }

    /// Left limit: the value just before t.
    double left_limit(double t) const {
        auto it = std::lower_bound(knots_.begin(), knots_.end(), t);
        if (it == knots_.begin()) return value_at_0_;
        return values_[std::size_t(it - knots_.begin()) - 1];
    }

    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& values() const { return values_; }
    double value_at_0() const { return value_at_0_; }

private:
    std::vector<double> knots_;
    std::vector<double> values_;
    double value_at_0_ = 1.0;
};

/// Two-column CSV (time,value) for plotting; prepends the pre-first-knot value.
void save_step_function_csv(const StepFunction& f, const std::string& path);

}  // namespace survboost
