#include "survboost/survival_boost.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "survboost/nonparametric.hpp"

namespace survboost {

void SurvivalBoostConfig::validate() const {
    gbt.validate();
    censoring_gbt.validate();
    if (n_horizons_per_row < 1)
        throw ValidationError("n_horizons_per_row must be >= 1");
    if (feedback_period < 1) throw ValidationError("feedback_period must be >= 1");
    if (!(ipcw_clip > 0.0 && ipcw_clip < 0.5))
        throw ValidationError("ipcw_clip must be in (0, 0.5)");
}

double SurvivalModel::event_free_prob(std::span<const double> x, double t) const {
    std::vector<double> xa(x.begin(), x.end());
    xa.push_back(t);
    std::vector<double> proba(std::size_t(k_events) + 1);
    event_model.predict_proba_row(xa, proba);
    return proba[0];
}

double SurvivalModel::censor_free_prob(std::span<const double> x, double t) const {
    if (!censoring_boosted()) return km_censoring(t);
    std::vector<double> xa(x.begin(), x.end());
    xa.push_back(t);
    double proba[2];
    censoring_model.predict_proba_row(xa, {proba, 2});
    return proba[0];
}

namespace {

// Class-0 probability of an ensemble over (x, t), viewed as a survival-type
// curve in t. Used both ways around: the censoring ensemble weighting the
// event model, and the event ensemble weighting the censoring model.
class EnsembleSurvival final : public CensoringEstimator {
public:
    explicit EnsembleSurvival(const Ensemble& model) : model_(&model) {}

    double at(std::span<const double> x, double t) const override {
        std::vector<double> xa(x.begin(), x.end());
        xa.push_back(t);
        std::vector<double> proba(std::size_t(model_->n_classes));
        model_->predict_proba_row(xa, proba);
        return proba[0];
    }
    double at_left(std::span<const double> x, double t) const override {
        return at(x, t);
    }

private:
    const Ensemble* model_;
};

// The horizon is stacked as one extra column after the covariates. Its bin
// edges are the quantiles of U(0, t_max), i.e. a uniform grid.
BinMapper fit_augmented_mapper(const Matrix& features, double t_max, int max_bins) {
    BinMapper mapper = fit_bin_mapper(features, max_bins);
    std::vector<double> zeta_edges;
    for (int b = 1; b < max_bins; ++b)
        zeta_edges.push_back(t_max * double(b) / double(max_bins));
    mapper.edges.push_back(std::move(zeta_edges));
    return mapper;
}

struct TrainState {
    std::size_t n = 0;        // source rows
    std::size_t n_aug = 0;    // source rows * horizons per row
    BinnedMatrix binned;      // n_aug x (d + 1); covariate columns are fixed
    std::vector<double> horizons;  // per augmented row
    std::vector<double> durations;
    std::vector<int> events;
    std::vector<std::size_t> src_row;  // augmented row -> source row
};

// Pre-bins the covariate part once; only the horizon column changes between
// rounds.
TrainState make_train_state(const Dataset& data, const BinMapper& mapper,
                            int horizons_per_row) {
    TrainState st;
    st.n = data.n();
    st.n_aug = st.n * std::size_t(horizons_per_row);
    const std::size_t d = data.n_features();
    st.binned = BinnedMatrix(st.n_aug, d + 1);
    parallel_for(d, [&](std::size_t f0, std::size_t f1) {
        for (std::size_t f = f0; f < f1; ++f) {
            std::uint8_t* col = st.binned.column(f);
            for (std::size_t i = 0; i < st.n; ++i) {
                const std::uint8_t b = mapper.bin_value(f, data.features.at(i, f));
                for (int r = 0; r < horizons_per_row; ++r)
                    col[std::size_t(r) * st.n + i] = b;
            }
        }
    });
    st.horizons.resize(st.n_aug);
    st.durations.resize(st.n_aug);
    st.events.resize(st.n_aug);
    st.src_row.resize(st.n_aug);
    for (int r = 0; r < horizons_per_row; ++r)
        for (std::size_t i = 0; i < st.n; ++i) {
            const std::size_t row = std::size_t(r) * st.n + i;
            st.durations[row] = data.durations[i];
            st.events[row] = data.events[i];
            st.src_row[row] = i;
        }
    return st;
}

void sample_horizons(TrainState& st, const BinMapper& mapper, double t_max, Rng& rng) {
    const std::size_t zeta_col = st.binned.cols - 1;
    std::uint8_t* col = st.binned.column(zeta_col);
    for (std::size_t row = 0; row < st.n_aug; ++row) {
        st.horizons[row] = rng.uniform(0.0, t_max);
        col[row] = mapper.bin_value(zeta_col, st.horizons[row]);
    }
}

}  // namespace

SurvivalModel fit(const Dataset& data, const SurvivalBoostConfig& config,
                  std::vector<FitLogEntry>* log) {
    config.validate();
    data.validate();
    bool any_event = false;
    for (int e : data.events) any_event |= e != 0;
    if (!any_event)
        throw ValidationError("fit: no uncensored rows; at least one event is required");

    SurvivalModel model;
    model.k_events = data.k_events;
    model.t_max = data.t_max;
    model.feature_info = data.feature_info;
    model.config = config;
    model.km_censoring = censoring_km(data);

    const int n_classes = data.k_events + 1;
    const BinMapper mapper =
        fit_augmented_mapper(data.features, data.t_max, config.gbt.max_bins);

    model.event_model.n_classes = n_classes;
    model.event_model.learning_rate = config.gbt.learning_rate;
    model.event_model.mapper = mapper;
    model.event_model.base_scores.assign(std::size_t(n_classes), 0.0);

    model.censoring_model.n_classes = 2;
    model.censoring_model.learning_rate = config.censoring_gbt.learning_rate;
    model.censoring_model.mapper = mapper;
    model.censoring_model.base_scores.assign(2, 0.0);

    TrainState ev = make_train_state(data, mapper, config.n_horizons_per_row);
    TrainState cs = make_train_state(data, mapper, config.n_horizons_per_row);
    std::vector<int> cens_indicator(cs.n_aug);
    for (std::size_t row = 0; row < cs.n_aug; ++row)
        cens_indicator[row] = cs.events[row] == 0 ? 1 : 0;

    Rng rng(mix_seed({config.seed, 0xb005u}));
    const MarginalCensoring km_estimator(model.km_censoring);

    std::vector<int> y(ev.n_aug);
    std::vector<double> w(ev.n_aug);
    std::vector<int> y_cen(cs.n_aug);
    std::vector<double> w_cen(cs.n_aug);
    Matrix raw, raw_cen;

    for (int m = 1; m <= config.gbt.n_rounds; ++m) {
        const auto round_start = std::chrono::steady_clock::now();

        // Event model round: fresh horizons, IPCW targets against the
        // current censoring estimate, one multiclass boosting step.
        sample_horizons(ev, mapper, model.t_max, rng);
        const EnsembleSurvival boosted_g(model.censoring_model);
        const CensoringEstimator& g =
            model.censoring_boosted()
                ? static_cast<const CensoringEstimator&>(boosted_g)
                : static_cast<const CensoringEstimator&>(km_estimator);
        for (std::size_t row = 0; row < ev.n_aug; ++row) {
            const auto x = data.features.row(ev.src_row[row]);
            const IpcwTarget tgt = ipcw_target(ev.durations[row], ev.events[row],
                                               ev.horizons[row], x, g, config.ipcw_clip);
            y[row] = tgt.label;
            w[row] = tgt.weight;
        }
        if (m == 1) {
            init_base_scores(model.event_model, y, w);
        }
        model.event_model.predict_raw_binned(ev.binned, raw);
        boost_round(model.event_model, ev.binned, y, w, raw, config.gbt);

        if (log) {
            FitLogEntry entry;
            entry.round = m;
            entry.loss = weighted_nll(raw, y, w);
            entry.n_rows = ev.n_aug;
            entry.seconds = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - round_start)
                                .count();
            log->push_back(entry);
        }

        // Censoring feedback: same scheme with the roles swapped. The
        // "event" is now being censored, and the weighting survival function
        // is the event model's S.
        if (m % config.feedback_period == 0) {
            sample_horizons(cs, mapper, model.t_max, rng);
            const EnsembleSurvival surv(model.event_model);
            for (std::size_t row = 0; row < cs.n_aug; ++row) {
                const auto x = data.features.row(cs.src_row[row]);
                const IpcwTarget tgt =
                    ipcw_target(cs.durations[row], cens_indicator[row],
                                cs.horizons[row], x, surv, config.ipcw_clip);
                y_cen[row] = tgt.label;
                w_cen[row] = tgt.weight;
            }
            if (model.censoring_model.stages.empty())
                init_base_scores(model.censoring_model, y_cen, w_cen);
            model.censoring_model.predict_raw_binned(cs.binned, raw_cen);
            boost_round(model.censoring_model, cs.binned, y_cen, w_cen, raw_cen,
                        config.censoring_gbt);
        }
    }
    return model;
}

CifMatrix predict_cif(const SurvivalModel& model, const Matrix& features,
                      const TimeGrid& grid, bool isotonic_clamp) {
    if (features.cols != model.feature_info.size())
        throw ValidationError("predict_cif: expected " +
                              std::to_string(model.feature_info.size()) +
                              " features, got " + std::to_string(features.cols));
    const std::size_t n_classes = std::size_t(model.k_events) + 1;
    CifMatrix cif(features.rows, model.k_events, grid);

    parallel_for(features.rows, [&](std::size_t i0, std::size_t i1) {
        std::vector<double> xa(features.cols + 1);
        std::vector<double> proba(n_classes);
        for (std::size_t i = i0; i < i1; ++i) {
            const auto x = features.row(i);
            std::copy(x.begin(), x.end(), xa.begin());
            for (std::size_t j = 0; j < grid.size(); ++j) {
                xa.back() = grid[j];
                model.event_model.predict_proba_row(xa, proba);
                for (std::size_t c = 0; c < n_classes; ++c)
                    cif.at(i, j, c) = proba[c];
            }
        }
    });

    if (isotonic_clamp) {
        parallel_for(features.rows, [&](std::size_t i0, std::size_t i1) {
            std::vector<double> prev(n_classes, 0.0);
            for (std::size_t i = i0; i < i1; ++i) {
                std::fill(prev.begin(), prev.end(), 0.0);
                double prev_sum = 0.0;
                for (std::size_t j = 0; j < grid.size(); ++j) {
                    double raised_sum = 0.0;
                    for (std::size_t c = 1; c < n_classes; ++c)
                        raised_sum += std::max(cif.at(i, j, c), prev[c]);
                    // Shrink the increments if lifting every curve to its
                    // running max would push the event mass past 1.
                    double scale = 1.0;
                    if (raised_sum > 1.0 && raised_sum > prev_sum)
                        scale = (1.0 - prev_sum) / (raised_sum - prev_sum);
                    double total = 0.0;
                    for (std::size_t c = 1; c < n_classes; ++c) {
                        const double raised = std::max(cif.at(i, j, c), prev[c]);
                        const double v = prev[c] + scale * (raised - prev[c]);
                        cif.at(i, j, c) = v;
                        prev[c] = v;
                        total += v;
                    }
                    cif.at(i, j, 0) = std::max(1.0 - total, 0.0);
                    prev_sum = total;
                }
            }
        });
    }
    return cif;
}

}  // namespace survboost
