#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "survboost/metrics.hpp"
#include "survboost/nonparametric.hpp"
#include "survboost/synthetic.hpp"

using namespace survboost;

namespace {

Dataset make(std::vector<double> t, std::vector<int> e, int k = -1) {
    Matrix X(t.size(), 1);
    return Dataset::from_arrays(std::move(X), std::move(t), std::move(e), k);
}

// Uniform(0, c_max) censoring: G(t) = 1 - t / c_max.
class UniformCensoring final : public CensoringEstimator {
public:
    explicit UniformCensoring(double c_max) : c_max_(c_max) {}
    double at(std::span<const double>, double t) const override {
        return std::max(1.0 - t / c_max_, 0.0);
    }
    double at_left(std::span<const double> x, double t) const override {
        return at(x, t);
    }

private:
    double c_max_;
};

CifMatrix constant_cif(const Dataset& data, const TimeGrid& grid,
                       const std::vector<double>& probs) {
    CifMatrix cif(data.n(), int(probs.size()) - 1, grid);
    for (std::size_t i = 0; i < data.n(); ++i)
        for (std::size_t j = 0; j < grid.size(); ++j)
            for (std::size_t c = 0; c < probs.size(); ++c)
                cif.at(i, j, c) = probs[c];
    return cif;
}

Dataset synth_survival(std::size_t n, std::uint64_t seed, double rate = 0.4) {
    SynthConfig config;
    config.n_samples = n;
    config.n_events = 1;
    config.n_features = 2;
    config.target_censoring_rate = rate;
    config.seed = seed;
    return generate(config).first;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("brier: perfect hard predictions score zero without censoring") {
    const Dataset d = make({1, 2, 3, 4}, {1, 1, 1, 1});
    const MarginalCensoring g(censoring_km(d));
    const double zeta = 2.5;
    std::vector<double> pred(4);
    for (std::size_t i = 0; i < 4; ++i) pred[i] = d.durations[i] <= zeta ? 1.0 : 0.0;
    CHECK(brier_score_event(pred, d, zeta, g, 1) == 0.0);
}

TEST_CASE("brier: constant prediction closed form without censoring") {
    const Dataset d = make({1, 2, 3, 4, 5}, {1, 2, 1, 2, 1}, 2);
    const MarginalCensoring g(censoring_km(d));
    const double zeta = 2.5, p = 0.37;
    const std::vector<double> pred(5, p);
    // q = share of rows with the event of interest by zeta (here row 0 only)
    const double q = 1.0 / 5.0;
    const double expected = q * (1 - p) * (1 - p) + (1 - q) * p * p;
    CHECK(brier_score_event(pred, d, zeta, g, 1) ==
          doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("brier: three-row hand fixture with one censored row") {
    const Dataset d = make({2, 4, 6}, {1, 0, 1});
    const MarginalCensoring g(censoring_km(d));
    const std::vector<double> pred{0.8, 0.5, 0.3};
    // row 0: (1-0.8)^2 / G(2-) = 0.04; row 1 censored: 0;
    // row 2: 0.3^2 / G(5) = 0.09 / 0.5 = 0.18; mean = 0.22 / 3
    CHECK(brier_score_event(pred, d, 5.0, g, 1) ==
          doctest::Approx(0.22 / 3.0).epsilon(1e-14));
}

TEST_CASE("brier: event index validated") {
    const Dataset d = make({1, 2}, {1, 0});
    const MarginalCensoring g(censoring_km(d));
    const std::vector<double> pred{0.5, 0.5};
    CHECK_THROWS_AS(brier_score_event(pred, d, 1.0, g, 2), ValidationError);
    CHECK_THROWS_AS(brier_score_event(pred, d, 1.0, g, 0), ValidationError);
}

TEST_CASE("ibs: constant per-horizon score integrates to itself") {
    // All rows outlive the grid and there is no censoring, so every horizon
    // scores p^2 and the integral equals p^2 exactly.
    const Dataset d = make({10, 11, 12}, {1, 1, 1});
    const TimeGrid grid = TimeGrid::linspace(1.0, 9.0, 20);
    const double p = 0.31;
    const CifMatrix cif = constant_cif(d, grid, {1.0 - p, p});
    const MarginalCensoring g(censoring_km(d));
    const MetricReport report = integrated_brier_score(cif, d, g);
    CHECK(report.value == doctest::Approx(p * p).epsilon(1e-14));
    CHECK(report.per_event.size() == 1);
}

TEST_CASE("ibs: matches an independent direct summation of the graf score") {
    const Dataset full = synth_survival(400, 71);
    auto [train, test] = split(full, 0.4, 71);

    std::vector<int> any(train.n());
    for (std::size_t i = 0; i < train.n(); ++i) any[i] = train.events[i] != 0;
    const StepFunction km = kaplan_meier(train.durations, any);
    const StepFunction g_test = censoring_km(test);

    const TimeGrid grid = default_ibs_grid(test, 37);
    CifMatrix cif(test.n(), 1, grid);
    for (std::size_t i = 0; i < test.n(); ++i)
        for (std::size_t j = 0; j < grid.size(); ++j) {
            cif.at(i, j, 0) = km(grid[j]);
            cif.at(i, j, 1) = 1.0 - km(grid[j]);
        }
    const MarginalCensoring g(g_test);
    const double lib = integrated_brier_score(cif, test, g).value;

    // Direct summation, written independently of the CifMatrix plumbing.
    std::vector<double> bs(grid.size(), 0.0);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double zeta = grid[j];
        const double f = 1.0 - km(zeta);
        double total = 0.0;
        for (std::size_t i = 0; i < test.n(); ++i) {
            const double t = test.durations[i];
            if (t <= zeta && test.events[i] == 1)
                total += (1 - f) * (1 - f) / std::max(g_test.left_limit(t), 0.02);
            else if (t > zeta)
                total += f * f / std::max(g_test(zeta), 0.02);
        }
        bs[j] = total / double(test.n());
    }
    double integral = 0.0;
    for (std::size_t j = 0; j + 1 < grid.size(); ++j)
        integral += 0.5 * (bs[j] + bs[j + 1]) * (grid[j + 1] - grid[j]);
    integral /= grid.horizons.back() - grid.horizons.front();
    CHECK(lib == doctest::Approx(integral).epsilon(1e-12));
}

TEST_CASE("ibs: on uncensored data the weights vanish from the graf score") {
    Rng rng(77);
    const std::size_t n = 120;
    std::vector<double> t(n);
    std::vector<int> e(n, 1);
    for (auto& v : t) v = rng.uniform(0.1, 5.0);
    Matrix X(n, 1);
    const Dataset d = Dataset::from_arrays(std::move(X), std::move(t), std::move(e), 1);

    const TimeGrid grid = default_ibs_grid(d, 25);
    CifMatrix cif(n, 1, grid);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const double f = rng.uniform(0.0, 1.0);
            cif.at(i, j, 0) = 1.0 - f;
            cif.at(i, j, 1) = f;
        }
    const MarginalCensoring g(censoring_km(d));
    const double lib = integrated_brier_score(cif, d, g).value;

    // plain unweighted squared error against the observed outcome indicator
    std::vector<double> bs(grid.size(), 0.0);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const double target = d.durations[i] <= grid[j] ? 1.0 : 0.0;
            const double diff = target - cif.at(i, j, 1);
            bs[j] += diff * diff;
        }
        bs[j] /= double(n);
    }
    double integral = 0.0;
    for (std::size_t j = 0; j + 1 < grid.size(); ++j)
        integral += 0.5 * (bs[j] + bs[j + 1]) * (grid[j + 1] - grid[j]);
    integral /= grid.horizons.back() - grid.horizons.front();
    CHECK(lib == doctest::Approx(integral).epsilon(1e-13));
}

TEST_CASE("ibs: oracle predictions beat aalen-johansen on oracle weights") {
    SynthConfig config;
    config.n_samples = 4000;
    config.n_events = 2;
    config.n_features = 6;
    config.target_censoring_rate = 0.5;
    config.seed = 73;
    auto [full, oracle] = generate(config);
    auto [train, test] = split(full, 0.5, 73);
    const OracleCensoring g(oracle);

    const TimeGrid grid = default_ibs_grid(test, 25);
    CifMatrix truth(test.n(), 2, grid);
    for (std::size_t i = 0; i < test.n(); ++i)
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const auto x = test.features.row(i);
            truth.at(i, j, 1) = oracle.cif(x, grid[j], 1);
            truth.at(i, j, 2) = oracle.cif(x, grid[j], 2);
            truth.at(i, j, 0) = 1.0 - truth.at(i, j, 1) - truth.at(i, j, 2);
        }
    const auto aj = aalen_johansen(train);
    CifMatrix marginal(test.n(), 2, grid);
    for (std::size_t i = 0; i < test.n(); ++i)
        for (std::size_t j = 0; j < grid.size(); ++j) {
            marginal.at(i, j, 1) = aj[0](grid[j]);
            marginal.at(i, j, 2) = aj[1](grid[j]);
            marginal.at(i, j, 0) =
                1.0 - marginal.at(i, j, 1) - marginal.at(i, j, 2);
        }
    const double ibs_truth = integrated_brier_score(truth, test, g).value;
    const double ibs_aj = integrated_brier_score(marginal, test, g).value;
    INFO("oracle ", ibs_truth, " aj ", ibs_aj);
    CHECK(ibs_truth <= ibs_aj);
}

TEST_CASE("ibs: grid beyond the data range is rejected") {
    const Dataset d = make({1, 2, 3}, {1, 1, 1});
    const TimeGrid grid = TimeGrid::linspace(1.0, 10.0, 5);
    const CifMatrix cif = constant_cif(d, grid, {0.7, 0.3});
    const MarginalCensoring g(censoring_km(d));
    CHECK_THROWS_AS(integrated_brier_score(cif, d, g), ValidationError);
}

TEST_CASE("ibs: event-count mismatch is an error") {
    const Dataset d = make({1, 2, 3}, {1, 2, 0}, 2);
    const TimeGrid grid = TimeGrid::linspace(0.5, 2.5, 4);
    const CifMatrix cif = constant_cif(d, grid, {0.7, 0.3});  // single event
    const MarginalCensoring g(censoring_km(d));
    CHECK_THROWS_AS(integrated_brier_score(cif, d, g), ValidationError);
}

TEST_CASE("accuracy: perfect predictions on deterministic outcomes") {
    const Dataset d = make({1, 1, 5, 5}, {1, 1, 2, 2}, 2);
    const TimeGrid grid{std::vector<double>{2.0}};
    CifMatrix cif(d.n(), 2, grid);
    for (std::size_t i = 0; i < d.n(); ++i) {
        const bool early = d.durations[i] <= 2.0;
        cif.at(i, 0, 0) = early ? 0.1 : 0.8;
        cif.at(i, 0, 1) = early ? 0.8 : 0.1;
        cif.at(i, 0, 2) = 0.1;
    }
    CHECK(accuracy_in_time(cif, d, 2.0) == 1.0);
}

TEST_CASE("accuracy: horizon zero with survival-dominant predictions is one") {
    const Dataset d = make({1, 2, 3}, {1, 0, 2}, 2);
    const TimeGrid grid{std::vector<double>{0.0}};
    const CifMatrix cif = constant_cif(d, grid, {0.9, 0.06, 0.04});
    CHECK(accuracy_in_time(cif, d, 0.0) == 1.0);
}

TEST_CASE("accuracy: five-row hand count with one excluded censored row") {
    const Dataset d = make({1, 2, 3, 4, 5}, {1, 0, 2, 0, 1}, 2);
    const double zeta = 2.5;
    const TimeGrid grid{std::vector<double>{zeta}};
    CifMatrix cif(d.n(), 2, grid);
    auto set_row = [&](std::size_t i, double s, double f1, double f2) {
        cif.at(i, 0, 0) = s;
        cif.at(i, 0, 1) = f1;
        cif.at(i, 0, 2) = f2;
    };
    set_row(0, 0.1, 0.8, 0.1);  // event 1 by zeta, predicted event 1: correct
    set_row(1, 0.3, 0.3, 0.4);  // censored by zeta: excluded
    set_row(2, 0.2, 0.1, 0.7);  // survives zeta, predicted event 2: wrong
    set_row(3, 0.6, 0.2, 0.2);  // survives, predicted survival: correct
    set_row(4, 0.5, 0.4, 0.1);  // survives, predicted survival: correct
    CHECK(accuracy_in_time(cif, d, zeta) == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("accuracy: argmax ties break toward survival") {
    const Dataset d = make({5.0}, {1});
    const TimeGrid grid{std::vector<double>{1.0}};
    const CifMatrix cif = constant_cif(d, grid, {0.5, 0.5});
    // t > zeta so the observed class is 0; the tie resolves to class 0.
    CHECK(accuracy_in_time(cif, d, 1.0) == 1.0);
}

TEST_CASE("accuracy: no evaluable rows is an error") {
    const Dataset d = make({1, 2}, {0, 0});
    const TimeGrid grid{std::vector<double>{3.0}};
    const CifMatrix cif = constant_cif(d, grid, {0.9, 0.1});
    CHECK_THROWS_AS(accuracy_in_time(cif, d, 3.0), ValidationError);
}

TEST_CASE("s_cen_log_simple: a cif jump of one in the event bucket scores zero") {
    const Dataset d = make({1.5}, {1});
    Matrix pred(1, 5);  // nodes 0,1,2,3,4 over span 4
    pred.at(0, 0) = 0.0;
    pred.at(0, 1) = 0.0;
    pred.at(0, 2) = 1.0;
    pred.at(0, 3) = 1.0;
    pred.at(0, 4) = 1.0;
    const MetricReport report = s_cen_log_simple(pred, d, 4.0);
    CHECK(report.value == 0.0);
    CHECK(report.clamped_increments == 0);
}

TEST_CASE("s_cen_log_simple: flat increments are clamped and counted") {
    const Dataset d = make({1.5}, {1});
    Matrix pred(1, 5, 0.5);  // no increment anywhere
    const MetricReport report = s_cen_log_simple(pred, d, 4.0);
    CHECK(report.clamped_increments == 1);
    CHECK(report.value == doctest::Approx(-std::log(1e-15)).epsilon(1e-12));
}

TEST_CASE("s_cen_log_simple: km marginal matches a direct evaluation oracle") {
    const Dataset d = synth_survival(100, 79);
    std::vector<int> any(d.n());
    for (std::size_t i = 0; i < d.n(); ++i) any[i] = d.events[i] != 0;
    const StepFunction km = kaplan_meier(d.durations, any);

    const int n_buckets = 32;
    Matrix pred(d.n(), n_buckets + 1);
    for (std::size_t i = 0; i < d.n(); ++i)
        for (int b = 0; b <= n_buckets; ++b)
            pred.at(i, std::size_t(b)) =
                1.0 - km(d.t_max * double(b) / double(n_buckets));
    const double lib = s_cen_log_simple(pred, d, d.t_max).value;

    const double width = d.t_max / double(n_buckets);
    double expected = 0.0;
    for (std::size_t i = 0; i < d.n(); ++i) {
        const double t = d.durations[i];
        for (int b = 0; b < n_buckets; ++b) {
            const double lo = width * b, hi = width * (b + 1);
            if (!(lo < t && t <= hi)) continue;
            const double f_hi = 1.0 - km(hi), f_lo = 1.0 - km(lo);
            if (d.events[i] != 0)
                expected -= std::log(std::max(f_hi - f_lo, 1e-15));
            else
                expected -= std::log(std::max(1.0 - f_hi, 1e-15));
        }
    }
    expected /= double(d.n());
    CHECK(lib == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("c-index: constant risks score one half") {
    const Dataset d = make({1, 2, 3, 4}, {1, 1, 1, 0});
    const std::vector<double> risk(4, 0.5);
    CHECK(c_index_at(risk, d, 3.0, 1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("c-index: perfect ordering scores one") {
    const Dataset d = make({1, 2, 3, 4}, {1, 1, 1, 1});
    const std::vector<double> risk{0.9, 0.7, 0.5, 0.3};
    CHECK(c_index_at(risk, d, 4.0, 1) == 1.0);
}

TEST_CASE("c-index: four-row fixture with one risk tie") {
    const Dataset d = make({1, 2, 3, 4}, {1, 1, 0, 2}, 2);
    const std::vector<double> risk{0.9, 0.5, 0.5, 0.2};
    // pairs from row0: vs rows 1,2,3 all concordant; from row1: vs row2 tie
    // (0.5), vs row3 concordant => (3 + 1.5) / 5
    CHECK(c_index_at(risk, d, 3.0, 1) == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("c-index: no comparable pairs is an error") {
    const Dataset d = make({5, 6}, {0, 0}, 1);
    const std::vector<double> risk{0.5, 0.6};
    CHECK_THROWS_AS(c_index_at(risk, d, 1.0, 1), ValidationError);
}

TEST_CASE("expected brier from the censoring-adjusted score matches the closed form") {
    // Covariate-free outcome with known probabilities and uniform censoring:
    // event 1 at t=0.5 w.p. 0.35, event 2 at t=0.8 w.p. 0.25, otherwise
    // survival past zeta=1 (event at t=2). C ~ U(0, 4).
    const double f1 = 0.35, f2 = 0.25;
    const double zeta = 1.0, c_max = 4.0;
    const std::size_t n = 100000;
    Rng rng(83);
    std::vector<double> t(n);
    std::vector<int> e(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        double event_t;
        int event_k;
        if (u < f1) {
            event_t = 0.5;
            event_k = 1;
        } else if (u < f1 + f2) {
            event_t = 0.8;
            event_k = 2;
        } else {
            event_t = 2.0;
            event_k = 1;
        }
        const double c = c_max * rng.uniform();
        if (c < event_t) {
            t[i] = c;
            e[i] = 0;
        } else {
            t[i] = event_t;
            e[i] = event_k;
        }
    }
    Matrix X(n, 1);
    const Dataset d = Dataset::from_arrays(std::move(X), std::move(t), std::move(e), 2);
    const UniformCensoring g(c_max);

    for (double f_hat : {0.2, 0.35, 0.6}) {
        const std::vector<double> pred(n, f_hat);
        const double empirical = brier_score_event(pred, d, zeta, g, 1);
        const double closed =
            (1 - f_hat) * (1 - f_hat) * f1 + f_hat * f_hat * (1 - f1);

        // standard error of the per-row contributions
        double mean = 0.0, var = 0.0;
        std::vector<double> c_i(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double ti = d.durations[i];
            if (ti <= zeta && d.events[i] == 1)
                c_i[i] = (1 - f_hat) * (1 - f_hat) / g.at({}, ti);
            else if (ti > zeta)
                c_i[i] = f_hat * f_hat / g.at({}, zeta);
            else if (d.events[i] != 0)
                c_i[i] = f_hat * f_hat / g.at({}, ti);
            mean += c_i[i];
        }
        mean /= double(n);
        for (double v : c_i) var += (v - mean) * (v - mean);
        const double se = std::sqrt(var / double(n - 1) / double(n));
        INFO("f_hat=", f_hat, " empirical=", empirical, " closed=", closed,
             " se=", se);
        CHECK(std::abs(empirical - closed) <= 3.0 * se);
    }
}

TEST_CASE("metrics are invariant to row order") {
    const Dataset d = make({3, 1, 4, 2, 5, 2.5}, {1, 0, 2, 1, 0, 2}, 2);
    const TimeGrid grid = TimeGrid::linspace(0.5, 2.4, 6);
    Rng rng(89);
    CifMatrix cif(d.n(), 2, grid);
    for (std::size_t i = 0; i < d.n(); ++i)
        for (std::size_t j = 0; j < grid.size(); ++j) {
            double a = rng.uniform(0.0, 0.5), b = rng.uniform(0.0, 0.4);
            cif.at(i, j, 1) = a;
            cif.at(i, j, 2) = b;
            cif.at(i, j, 0) = 1.0 - a - b;
        }

    const std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};
    Dataset d2 = d;
    CifMatrix cif2 = cif;
    for (std::size_t i = 0; i < perm.size(); ++i) {
        d2.durations[i] = d.durations[perm[i]];
        d2.events[i] = d.events[perm[i]];
        for (std::size_t j = 0; j < grid.size(); ++j)
            for (std::size_t c = 0; c < 3; ++c)
                cif2.at(i, j, c) = cif.at(perm[i], j, c);
    }
    d2.t_max = d.t_max;

    const MarginalCensoring g1(censoring_km(d)), g2(censoring_km(d2));
    CHECK(integrated_brier_score(cif, d, g1).value ==
          doctest::Approx(integrated_brier_score(cif2, d2, g2).value).epsilon(1e-14));
    CHECK(accuracy_at_index(cif, d, 2) == accuracy_at_index(cif2, d2, 2));

    std::vector<double> risk(d.n()), risk2(d.n());
    for (std::size_t i = 0; i < d.n(); ++i) risk[i] = cif.at(i, 3, 1);
    for (std::size_t i = 0; i < d.n(); ++i) risk2[i] = cif2.at(i, 3, 1);
    CHECK(c_index_at(risk, d, 2.0, 1) == c_index_at(risk2, d2, 2.0, 1));
}

TEST_CASE("default grid and quantile helpers") {
    const Dataset d = make({1, 2, 3, 4, 10}, {1, 1, 0, 1, 0});
    const TimeGrid grid = default_ibs_grid(d, 10);
    CHECK(grid.size() == 10);
    CHECK(grid.horizons.back() == doctest::Approx(4.0));  // max event time
    CHECK(grid.horizons.front() > 0.0);

    const auto qs = horizon_quantiles(d, std::vector<double>{0.0, 0.5, 1.0});
    CHECK(qs[0] == 1.0);
    CHECK(qs[2] == 4.0);
}

}  // TEST_SUITE
