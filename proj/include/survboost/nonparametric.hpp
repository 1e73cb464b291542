#pragma once

#include <span>
#include <vector>

#include "survboost/dataset.hpp"
#include "survboost/step_function.hpp"

namespace survboost {

/// Product-limit estimator S(t) = prod_{t_j <= t} (1 - d_j / n_j) where d_j
/// counts rows with indicator 1 at distinct time t_j and n_j counts rows
/// still at risk (duration >= t_j). Rows with indicator 0 at the same time
/// leave the risk set after the jump (events before censorings).
StepFunction kaplan_meier(std::span<const double> durations,
                          std::span<const int> indicator);

/// Marginal censor-free probability: Kaplan-Meier with indicator 1{event==0}.
StepFunction censoring_km(const Dataset& data);

/// Aalen-Johansen cumulative incidence per event, F_k(t) = sum over event
/// times t_j <= t of S(t_j-) d_kj / n_j with S the all-event Kaplan-Meier.
std::vector<StepFunction> aalen_johansen(const Dataset& data);

}  // namespace survboost
