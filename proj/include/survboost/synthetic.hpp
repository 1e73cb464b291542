#pragma once

#include <string>
#include <utility>
#include <vector>

#include "survboost/dataset.hpp"
#include "survboost/ipcw.hpp"

namespace survboost {

enum class CensoringMode { independent, covariate_dependent };

struct SynthConfig {
    std::size_t n_samples = 1000;
    int n_events = 1;
    int n_features = 2;
    CensoringMode censoring = CensoringMode::covariate_dependent;
    double target_censoring_rate = 0.5;
    std::uint64_t seed = 0;

    void validate() const;  // requires n_features >= 2 * n_events, rate in (0,1)
};

/// Linear map from covariates to a positive Weibull parameter through a
/// softplus link: param = softplus(bias + dot(weights, x)).
struct ParamLink {
    std::vector<double> weights;
    double bias = 0.0;

    double operator()(std::span<const double> x) const;
};

/// Ground truth of a generated benchmark: per-event Weibull shape/scale links
/// plus the censoring distribution, closed over the calibrated scale
/// multiplier. Evaluators work for any covariate vector, so oracle metrics
/// are recomputable on unseen rows.
struct SynthOracle {
    int k_events = 0;
    int n_features = 0;
    CensoringMode censoring = CensoringMode::covariate_dependent;
    std::vector<ParamLink> event_shape;  // one per event
    std::vector<ParamLink> event_scale;
    ParamLink cens_shape;  // covariate-dependent mode
    ParamLink cens_scale;
    double cens_shape_const = 1.0;  // independent mode
    double cens_scale_const = 1.0;
    double cens_scale_multiplier = 1.0;  // calibrated to the target rate

    /// Probability that event k strikes first and by zeta (adaptive
    /// quadrature, tolerance 1e-8).
    double cif(std::span<const double> x, double zeta, int k) const;
    /// Probability that no event has struck by zeta.
    double survival(std::span<const double> x, double zeta) const;
    /// Probability of remaining censor-free past zeta.
    double censoring_survival(std::span<const double> x, double zeta) const;

    std::pair<double, double> event_params(std::span<const double> x, int k) const;
    std::pair<double, double> censoring_params(std::span<const double> x) const;
};

/// Sidecar-backed oracle weights for metric evaluation.
class OracleCensoring final : public CensoringEstimator {
public:
    explicit OracleCensoring(const SynthOracle& oracle) : oracle_(&oracle) {}
    double at(std::span<const double> x, double t) const override {
        return oracle_->censoring_survival(x, t);
    }
    double at_left(std::span<const double> x, double t) const override {
        return oracle_->censoring_survival(x, t);
    }

private:
    const SynthOracle* oracle_;
};

/// Draws covariates, one Weibull duration per event and a censoring time
/// whose scale is calibrated by bisection so the realized censoring fraction
/// lands within 0.03 of the target. Rows carry min(durations) and the argmin
/// label (0 for censoring). Per-row RNG streams make the output independent
/// of threading and stable across runs.
std::pair<Dataset, SynthOracle> generate(const SynthConfig& config);

void save_oracle(const SynthOracle& oracle, const std::string& path);
SynthOracle load_oracle(const std::string& path);

}  // namespace survboost
