#include "survboost/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

namespace survboost {

namespace {

double softplus(double z) {
    if (z > 30.0) return z;
    return std::log1p(std::exp(z));
}

// Link level constants: with standard-normal covariates and unit-norm weight
// vectors these put shapes around 0.6..2.5 and scales around 0.2..6, enough
// spread that conditional models have real signal to pick up. The shape
// floor keeps the duration tail from dwarfing the bulk of the data, since
// horizons are sampled uniformly up to the maximum observed time.
constexpr double kShapeBias = 1.2;
constexpr double kShapeGain = 0.4;
constexpr double kScaleBias = 1.5;
constexpr double kScaleGain = 1.5;

double weibull_quantile(double u, double shape, double scale) {
    // Inverse CDF at u in [0,1): scale * (-log(1-u))^(1/shape)
    return scale * std::pow(-std::log1p(-u), 1.0 / shape);
}

ParamLink random_link(Rng& rng, int n_features, double bias, double gain) {
    ParamLink link;
    link.bias = bias;
    link.weights.resize(std::size_t(n_features));
    const double scale = gain / std::sqrt(double(n_features));
    for (auto& w : link.weights) w = rng.normal() * scale;
    return link;
}

}  // namespace

void SynthConfig::validate() const {
    if (n_samples < 1) throw ValidationError("n_samples must be >= 1");
    if (n_events < 1) throw ValidationError("n_events must be >= 1");
    if (n_features < 2 * n_events)
        throw ValidationError("n_features must be >= 2 * n_events");
    if (!(target_censoring_rate > 0.0 && target_censoring_rate < 1.0))
        throw ValidationError("target_censoring_rate must be in (0, 1)");
}

double ParamLink::operator()(std::span<const double> x) const {
    double z = bias;
    for (std::size_t j = 0; j < weights.size(); ++j) z += weights[j] * x[j];
    return softplus(z);
}

std::pair<double, double> SynthOracle::event_params(std::span<const double> x,
                                                    int k) const {
    const std::size_t idx = std::size_t(k) - 1;
    return {event_shape[idx](x), event_scale[idx](x)};
}

std::pair<double, double> SynthOracle::censoring_params(
    std::span<const double> x) const {
    if (censoring == CensoringMode::covariate_dependent)
        return {cens_shape(x), cens_scale_multiplier * cens_scale(x)};
    return {cens_shape_const, cens_scale_multiplier * cens_scale_const};
}

double SynthOracle::survival(std::span<const double> x, double zeta) const {
    double log_s = 0.0;
    for (int k = 1; k <= k_events; ++k) {
        const auto [shape, scale] = event_params(x, k);
        log_s -= std::pow(zeta / scale, shape);
    }
    return std::exp(log_s);
}

double SynthOracle::censoring_survival(std::span<const double> x, double zeta) const {
    if (zeta <= 0.0) return 1.0;
    const auto [shape, scale] = censoring_params(x);
    return std::exp(-std::pow(zeta / scale, shape));
}

namespace {

// Adaptive Simpson on [a, b] with absolute tolerance.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm,
                        double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double integrate(const F& f, double a, double b, double tol) {
    if (!(b > a)) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace

double SynthOracle::cif(std::span<const double> x, double zeta, int k) const {
    if (!(zeta >= 0.0)) throw ValidationError("oracle cif: zeta must be >= 0");
    if (k < 1 || k > k_events) throw ValidationError("oracle cif: bad event index");
    if (zeta == 0.0) return 0.0;

    const auto [shape_k, scale_k] = event_params(x, k);

    // Substituting s = (t / scale_k)^shape_k turns the subdistribution
    // density integral into int_0^{s_max} exp(-s) * prod_{j != k} S_j(t(s)) ds,
    // which is bounded and free of the t -> 0 singularity when shape_k < 1.
    std::vector<std::pair<double, double>> others;
    for (int j = 1; j <= k_events; ++j)
        if (j != k) others.push_back(event_params(x, j));

    const double s_max = std::min(std::pow(zeta / scale_k, shape_k), 40.0);
    const auto integrand = [&](double s) {
        const double t = scale_k * std::pow(s, 1.0 / shape_k);
        double log_other = 0.0;
        for (const auto& [shape_j, scale_j] : others)
            log_other -= std::pow(t / scale_j, shape_j);
        return std::exp(-s + log_other);
    };
    return integrate(integrand, 0.0, s_max, 1e-8);
}

std::pair<Dataset, SynthOracle> generate(const SynthConfig& config) {
    config.validate();
    const std::size_t n = config.n_samples;
    const int k_events = config.n_events;
    const int d = config.n_features;

    SynthOracle oracle;
    oracle.k_events = k_events;
    oracle.n_features = d;
    oracle.censoring = config.censoring;

    Rng coef_rng(mix_seed({config.seed, 0xc0efu}));
    for (int k = 0; k < k_events; ++k) {
        oracle.event_shape.push_back(random_link(coef_rng, d, kShapeBias, kShapeGain));
        oracle.event_scale.push_back(random_link(coef_rng, d, kScaleBias, kScaleGain));
    }
    oracle.cens_shape = random_link(coef_rng, d, kShapeBias, kShapeGain);
    oracle.cens_scale = random_link(coef_rng, d, kScaleBias, kScaleGain);
    oracle.cens_shape_const = softplus(kShapeBias);
    oracle.cens_scale_const = softplus(kScaleBias);

    Matrix features(n, std::size_t(d));
    std::vector<double> event_time(n);      // min over events
    std::vector<int> event_label(n);        // argmin event
    std::vector<double> cens_time_unit(n);  // censoring time at multiplier 1

    parallel_for(n, [&](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) {
            Rng rng(mix_seed({config.seed, 0x0b5u, std::uint64_t(i)}));
            auto x = features.row(i);
            for (int j = 0; j < d; ++j) x[std::size_t(j)] = rng.normal();

            double best_t = std::numeric_limits<double>::infinity();
            int best_k = 0;
            for (int k = 1; k <= k_events; ++k) {
                const auto [shape, scale] = oracle.event_params(x, k);
                const double t = weibull_quantile(rng.uniform(), shape, scale);
                if (t < best_t) {
                    best_t = t;
                    best_k = k;
                }
            }
            event_time[i] = best_t;
            event_label[i] = best_k;

            double c_shape, c_scale;
            if (config.censoring == CensoringMode::covariate_dependent) {
                c_shape = oracle.cens_shape(x);
                c_scale = oracle.cens_scale(x);
            } else {
                c_shape = oracle.cens_shape_const;
                c_scale = oracle.cens_scale_const;
            }
            cens_time_unit[i] = weibull_quantile(rng.uniform(), c_shape, c_scale);
        }
    });

    // The censoring scale multiplier shifts every censoring time by the same
    // factor, so the realized rate is monotone in it. Bisection runs on an
    // independent calibration sample (separate substream of the same seed):
    // calibrating on the emitted rows would tune the multiplier to their
    // noise and break the exactness of oracle-weighted expectations.
    std::vector<double> cal_event(n), cal_cens(n);
    parallel_for(n, [&](std::size_t i0, std::size_t i1) {
        std::vector<double> x(static_cast<std::size_t>(d));
        for (std::size_t i = i0; i < i1; ++i) {
            Rng rng(mix_seed({config.seed, 0xca11bu, std::uint64_t(i)}));
            for (int j = 0; j < d; ++j) x[std::size_t(j)] = rng.normal();
            double best_t = std::numeric_limits<double>::infinity();
            for (int k = 1; k <= k_events; ++k) {
                const auto [shape, scale] = oracle.event_params(x, k);
                best_t = std::min(best_t,
                                  weibull_quantile(rng.uniform(), shape, scale));
            }
            cal_event[i] = best_t;
            double c_shape, c_scale;
            if (config.censoring == CensoringMode::covariate_dependent) {
                c_shape = oracle.cens_shape(x);
                c_scale = oracle.cens_scale(x);
            } else {
                c_shape = oracle.cens_shape_const;
                c_scale = oracle.cens_scale_const;
            }
            cal_cens[i] = weibull_quantile(rng.uniform(), c_shape, c_scale);
        }
    });
    const auto rate_at = [&](double mult) {
        std::size_t censored = 0;
        for (std::size_t i = 0; i < n; ++i)
            censored += mult * cal_cens[i] < cal_event[i];
        return double(censored) / double(n);
    };
    double lo = 1e-6, hi = 1e6;
    double mult = 1.0, rate = rate_at(1.0);
    for (int step = 0; step < 100; ++step) {
        if (std::abs(rate - config.target_censoring_rate) <= 0.005) break;
        if (rate > config.target_censoring_rate)
            lo = mult;  // too much censoring: lengthen censoring times
        else
            hi = mult;
        mult = std::sqrt(lo * hi);  // geometric midpoint over twelve decades
        rate = rate_at(mult);
    }
    if (std::abs(rate - config.target_censoring_rate) > 0.03)
        throw Error("censoring calibration failed: achieved rate " +
                    std::to_string(rate) + ", target " +
                    std::to_string(config.target_censoring_rate));
    oracle.cens_scale_multiplier = mult;

    std::vector<double> durations(n);
    std::vector<int> events(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double c = mult * cens_time_unit[i];
        if (c < event_time[i]) {
            durations[i] = c;
            events[i] = 0;
        } else {
            durations[i] = event_time[i];
            events[i] = event_label[i];
        }
    }

    Dataset data =
        Dataset::from_arrays(std::move(features), std::move(durations),
                             std::move(events), k_events);
    return {std::move(data), std::move(oracle)};
}

// ---------------------------------------------------------------------------
// Sidecar file
// ---------------------------------------------------------------------------

namespace {

using Json = nlohmann::ordered_json;

Json link_to_json(const ParamLink& link) {
    Json j;
    j["bias"] = link.bias;
    j["weights"] = link.weights;
    return j;
}

ParamLink link_from_json(const Json& j) {
    ParamLink link;
    link.bias = j.at("bias").get<double>();
    link.weights = j.at("weights").get<std::vector<double>>();
    return link;
}

}  // namespace

void save_oracle(const SynthOracle& oracle, const std::string& path) {
    Json j;
    j["format"] = "survboost-oracle";
    j["version"] = 1;
    j["k_events"] = oracle.k_events;
    j["n_features"] = oracle.n_features;
    j["censoring"] = oracle.censoring == CensoringMode::covariate_dependent
                         ? "covariate_dependent"
                         : "independent";
    Json shapes = Json::array(), scales = Json::array();
    for (const auto& link : oracle.event_shape) shapes.push_back(link_to_json(link));
    for (const auto& link : oracle.event_scale) scales.push_back(link_to_json(link));
    j["event_shape"] = std::move(shapes);
    j["event_scale"] = std::move(scales);
    j["cens_shape"] = link_to_json(oracle.cens_shape);
    j["cens_scale"] = link_to_json(oracle.cens_scale);
    j["cens_shape_const"] = oracle.cens_shape_const;
    j["cens_scale_const"] = oracle.cens_scale_const;
    j["cens_scale_multiplier"] = oracle.cens_scale_multiplier;
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << j.dump() << '\n';
}

SynthOracle load_oracle(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("'" + path + "' is not a valid oracle file: " + e.what());
    }
    if (!j.contains("format") || j.at("format") != "survboost-oracle")
        throw ParseError("'" + path + "' is not an oracle sidecar file");
    SynthOracle oracle;
    oracle.k_events = j.at("k_events").get<int>();
    oracle.n_features = j.at("n_features").get<int>();
    oracle.censoring = j.at("censoring").get<std::string>() == "independent"
                           ? CensoringMode::independent
                           : CensoringMode::covariate_dependent;
    for (const auto& link : j.at("event_shape"))
        oracle.event_shape.push_back(link_from_json(link));
    for (const auto& link : j.at("event_scale"))
        oracle.event_scale.push_back(link_from_json(link));
    oracle.cens_shape = link_from_json(j.at("cens_shape"));
    oracle.cens_scale = link_from_json(j.at("cens_scale"));
    oracle.cens_shape_const = j.at("cens_shape_const").get<double>();
    oracle.cens_scale_const = j.at("cens_scale_const").get<double>();
    oracle.cens_scale_multiplier = j.at("cens_scale_multiplier").get<double>();
    return oracle;
}

}  // namespace survboost
