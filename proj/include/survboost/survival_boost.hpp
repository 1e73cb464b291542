#pragma once

#include <string>
#include <vector>

#include "survboost/cif_matrix.hpp"
#include "survboost/dataset.hpp"
#include "survboost/gbt.hpp"
#include "survboost/ipcw.hpp"
#include "survboost/step_function.hpp"

namespace survboost {

struct SurvivalBoostConfig {
    GbtConfig gbt;            // event model (n_rounds is the boosting budget)
    GbtConfig censoring_gbt;  // censoring model; its n_rounds is ignored
    int n_horizons_per_row = 1;
    int feedback_period = 1;  // censoring-model update cadence, in rounds
    double ipcw_clip = 0.02;
    std::uint64_t seed = 0;

    void validate() const;
};

struct FitLogEntry {
    int round = 0;
    double loss = 0.0;  // weighted train NLL on this round's sampled batch
    double seconds = 0.0;
    std::size_t n_rows = 0;  // augmented rows trained on this round
};

/// Fitted learner: a multiclass ensemble over (x, horizon) for the event
/// probabilities and a binary one for the censor-free probability, plus the
/// marginal Kaplan-Meier censoring curve used before the first feedback
/// round (and as fallback when no feedback round ever ran).
struct SurvivalModel {
    Ensemble event_model;      // k_events + 1 classes
    Ensemble censoring_model;  // 2 classes; empty stages = marginal KM in use
    StepFunction km_censoring;
    double t_max = 0.0;
    int k_events = 0;
    std::vector<FeatureInfo> feature_info;
    SurvivalBoostConfig config;

    bool censoring_boosted() const { return !censoring_model.stages.empty(); }

    /// S(t|x): event-model class-0 probability at horizon t.
    double event_free_prob(std::span<const double> x, double t) const;
    /// G(t|x): boosted censor-free probability, marginal KM if never boosted.
    double censor_free_prob(std::span<const double> x, double t) const;
};

/// Adapts a fitted model's censoring side to the CensoringEstimator interface.
class ModelCensoring final : public CensoringEstimator {
public:
    explicit ModelCensoring(const SurvivalModel& model) : model_(&model) {}
    double at(std::span<const double> x, double t) const override {
        return model_->censor_free_prob(x, t);
    }
    double at_left(std::span<const double> x, double t) const override {
        return model_->censor_free_prob(x, t);
    }

private:
    const SurvivalModel* model_;
};

SurvivalModel fit(const Dataset& data, const SurvivalBoostConfig& config,
                  std::vector<FitLogEntry>* log = nullptr);

/// Cumulative incidences and survival at every grid horizon. With
/// isotonic_clamp, each per-event curve is made nondecreasing along the grid
/// (increments shrunk so the row still sums to one); off by default.
CifMatrix predict_cif(const SurvivalModel& model, const Matrix& features,
                      const TimeGrid& grid, bool isotonic_clamp = false);

// Versioned JSON model file; reload is bit-exact.
void save_model(const SurvivalModel& model, const std::string& path);
SurvivalModel load_model(const std::string& path);

/// Baseline export sharing the model-file envelope (kind "aalen_johansen");
/// load_model rejects it as a wrong model kind.
void save_aalen_johansen(const std::vector<StepFunction>& cifs,
                         const StepFunction& km_survival, const std::string& path);

}  // namespace survboost
