#include <cmath>

#include "doctest.h"
#include "survboost/ipcw.hpp"
#include "survboost/nonparametric.hpp"
#include "survboost/synthetic.hpp"

using namespace survboost;

namespace {

const std::vector<double> kNoX{};

MarginalCensoring constant_g(double value) {
    return MarginalCensoring(StepFunction({}, {}, value));
}

}  // namespace

TEST_SUITE("ipcw") {

TEST_CASE("event before horizon weights by censor-free probability at t") {
    // G = 0.5 from time 4 on, so G(5-) = 0.5.
    const MarginalCensoring g(StepFunction({4.0}, {0.5}, 1.0));
    const IpcwTarget tgt = ipcw_target(5.0, 2, 10.0, kNoX, g, 0.02);
    CHECK(tgt.label == 2);
    CHECK(tgt.weight == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("survivor past horizon") {
    const MarginalCensoring g = constant_g(1.0);
    const IpcwTarget tgt = ipcw_target(10.0, 0, 5.0, kNoX, g, 0.02);
    CHECK(tgt.label == 0);
    CHECK(tgt.weight == 1.0);
}

TEST_CASE("censored before horizon drops out") {
    const MarginalCensoring g = constant_g(1.0);
    const IpcwTarget tgt = ipcw_target(3.0, 0, 5.0, kNoX, g, 0.02);
    CHECK(tgt.label == 0);
    CHECK(tgt.weight == 0.0);
}

TEST_CASE("event branch uses the left limit at ties") {
    // Censoring jump exactly at t = 2: the event at 2 is weighted by the
    // censor-free probability just before 2.
    const MarginalCensoring g(StepFunction({2.0}, {0.25}, 1.0));
    const IpcwTarget tgt = ipcw_target(2.0, 1, 5.0, kNoX, g, 0.02);
    CHECK(tgt.weight == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("nan rejected, eps range enforced") {
    const MarginalCensoring g = constant_g(1.0);
    CHECK_THROWS_AS(ipcw_target(std::nan(""), 0, 1.0, kNoX, g, 0.02), ValidationError);
    CHECK_THROWS_AS(ipcw_target(1.0, 0, std::nan(""), kNoX, g, 0.02), ValidationError);
    CHECK_THROWS_AS(ipcw_target(1.0, 0, 1.0, kNoX, g, 0.7), ValidationError);
}

TEST_CASE("clip bounds the weights") {
    const MarginalCensoring g = constant_g(1e-9);
    const IpcwTarget tgt = ipcw_target(1.0, 1, 5.0, kNoX, g, 0.02);
    CHECK(tgt.weight == doctest::Approx(50.0).epsilon(1e-12));
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const MarginalCensoring gg = constant_g(rng.uniform(0.0, 1.0));
        const IpcwTarget t = ipcw_target(rng.uniform(0.0, 4.0), int(rng.below(3)),
                                         rng.uniform(0.0, 4.0), kNoX, gg, 0.02);
        CHECK(t.weight >= 0.0);
        CHECK(t.weight <= 50.0 + 1e-12);
    }
}

TEST_CASE("batch equals scalar calls row by row") {
    Matrix X(4, 1);
    const Dataset d =
        Dataset::from_arrays(X, {5.0, 10.0, 3.0, 2.0}, {2, 0, 0, 1}, 2);
    const StepFunction curve({4.0}, {0.5}, 1.0);
    const MarginalCensoring g(curve);
    const std::vector<double> horizons{10.0, 5.0, 5.0, 8.0};

    std::vector<int> y;
    std::vector<double> w;
    ipcw_batch(d, horizons, g, 0.02, y, w);
    for (std::size_t i = 0; i < 4; ++i) {
        const IpcwTarget tgt = ipcw_target(d.durations[i], d.events[i], horizons[i],
                                           d.features.row(i), g, 0.02);
        CHECK(y[i] == tgt.label);
        CHECK(w[i] == tgt.weight);
    }
}

TEST_CASE("batch rejects mismatched horizon length") {
    Matrix X(2, 1);
    const Dataset d = Dataset::from_arrays(X, {1.0, 2.0}, {1, 0});
    std::vector<int> y;
    std::vector<double> w;
    const MarginalCensoring g = constant_g(1.0);
    CHECK_THROWS_AS(ipcw_batch(d, std::vector<double>{1.0}, g, 0.02, y, w),
                    ValidationError);
}

TEST_CASE("uncensored data with unit censor-free probability") {
    Matrix X(3, 1);
    const Dataset d = Dataset::from_arrays(X, {1.0, 2.0, 3.0}, {1, 2, 1}, 2);
    const MarginalCensoring g = constant_g(1.0);
    std::vector<int> y;
    std::vector<double> w;
    ipcw_batch(d, std::vector<double>{2.5, 1.0, 5.0}, g, 0.02, y, w);
    CHECK(w == std::vector<double>{1.0, 1.0, 1.0});
    CHECK(y == std::vector<int>{1, 0, 1});  // label = delta when t <= zeta
}

TEST_CASE("all rows censored before their horizons have zero weight") {
    Matrix X(3, 1);
    const Dataset d = Dataset::from_arrays(X, {1.0, 2.0, 3.0}, {0, 0, 0});
    const MarginalCensoring g = constant_g(1.0);
    std::vector<int> y;
    std::vector<double> w;
    ipcw_batch(d, std::vector<double>{2.0, 3.0, 4.0}, g, 0.02, y, w);
    for (double v : w) CHECK(v == 0.0);
}

TEST_CASE("monte carlo: reweighted indicators are unbiased for the oracle cif") {
    // Draw from the synthetic generator, weight with the oracle censoring
    // distribution, and check E[w 1{y=k}] against the oracle cif and the
    // survivor term against the oracle survival, per horizon.
    SynthConfig config;
    config.n_samples = 100000;
    config.n_events = 2;
    config.n_features = 4;
    config.censoring = CensoringMode::covariate_dependent;
    config.target_censoring_rate = 0.4;
    config.seed = 3;
    auto [data, oracle] = generate(config);
    const OracleCensoring g(oracle);

    const double horizons[3] = {0.4, 1.0, 2.2};
    for (double zeta : horizons) {
        std::vector<int> y;
        std::vector<double> w;
        const std::vector<double> per_row(data.n(), zeta);
        ipcw_batch(data, per_row, g, 1e-6, y, w);

        for (int k = 0; k <= 2; ++k) {
            double mean_dev = 0.0, var = 0.0;
            std::vector<double> dev(data.n());
            for (std::size_t i = 0; i < data.n(); ++i) {
                const double stat = w[i] * (y[i] == k ? 1.0 : 0.0);
                const double truth =
                    k == 0 ? oracle.survival(data.features.row(i), zeta)
                           : oracle.cif(data.features.row(i), zeta, k);
                dev[i] = stat - truth;
                mean_dev += dev[i];
            }
            mean_dev /= double(data.n());
            for (double v : dev) var += (v - mean_dev) * (v - mean_dev);
            var /= double(data.n() - 1);
            const double se = std::sqrt(var / double(data.n()));
            INFO("zeta=", zeta, " k=", k, " dev=", mean_dev, " se=", se);
            CHECK(std::abs(mean_dev) <= 3.0 * se + 1e-12);
        }
    }
}

}  // TEST_SUITE
