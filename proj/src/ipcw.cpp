#include "survboost/ipcw.hpp"

#include <cmath>

namespace survboost {

IpcwTarget ipcw_target(double t, int delta, double zeta, std::span<const double> x,
                       const CensoringEstimator& g, double eps) {
    if (std::isnan(t) || std::isnan(zeta))
        throw ValidationError("ipcw_target: NaN time or horizon");
    if (!(eps > 0.0 && eps < 0.5))
        throw ValidationError("ipcw_target: eps must be in (0, 0.5)");

    if (t > zeta)
        return {0, 1.0 / std::max(g.at(x, zeta), eps)};
    if (delta != 0)
        return {delta, 1.0 / std::max(g.at_left(x, t), eps)};
    return {0, 0.0};
}

void ipcw_batch(const Dataset& data, std::span<const double> horizons,
                const CensoringEstimator& g, double eps, std::vector<int>& labels,
                std::vector<double>& weights) {
    if (horizons.size() != data.n())
        throw ValidationError("ipcw_batch: horizons length != n rows");
    labels.resize(data.n());
    weights.resize(data.n());
    for (std::size_t i = 0; i < data.n(); ++i) {
        const IpcwTarget tgt = ipcw_target(data.durations[i], data.events[i],
                                           horizons[i], data.features.row(i), g, eps);
        labels[i] = tgt.label;
        weights[i] = tgt.weight;
    }
}

}  // namespace survboost
