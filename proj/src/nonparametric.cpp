#include "survboost/nonparametric.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>

namespace survboost {

namespace {

struct TimeGroup {
    double t;
    std::size_t at_risk;
    std::vector<std::size_t> row_ids;  // rows leaving at t, any status
};

// Distinct observed times in increasing order with the at-risk count
// n_j = #{i : t_i >= t_j}.
std::vector<TimeGroup> group_times(std::span<const double> durations) {
    const std::size_t n = durations.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return durations[a] < durations[b];
    });

    std::vector<TimeGroup> groups;
    std::size_t i = 0;
    while (i < n) {
        const double t = durations[order[i]];
        TimeGroup g;
        g.t = t;
        g.at_risk = n - i;
        while (i < n && durations[order[i]] == t) {
            g.row_ids.push_back(order[i]);
            ++i;
        }
        groups.push_back(std::move(g));
    }
    return groups;
}

}  // namespace

StepFunction kaplan_meier(std::span<const double> durations,
                          std::span<const int> indicator) {
    if (durations.empty()) throw ValidationError("kaplan_meier: empty input");
    if (durations.size() != indicator.size())
        throw ValidationError("kaplan_meier: durations/indicator length mismatch");
    for (double t : durations)
        if (!(t >= 0.0))
            throw ValidationError("kaplan_meier: negative or NaN duration");

    std::vector<double> knots, values;
    double s = 1.0;
    for (const auto& g : group_times(durations)) {
        std::size_t d = 0;
        for (std::size_t row : g.row_ids) d += indicator[row] != 0;
        if (d == 0) continue;
        s *= 1.0 - double(d) / double(g.at_risk);
        knots.push_back(g.t);
        values.push_back(s);
    }
    return StepFunction(std::move(knots), std::move(values), 1.0);
}

StepFunction censoring_km(const Dataset& data) {
    std::vector<int> censored(data.n());
    for (std::size_t i = 0; i < data.n(); ++i)
        censored[i] = data.events[i] == 0 ? 1 : 0;
    return kaplan_meier(data.durations, censored);
}

std::vector<StepFunction> aalen_johansen(const Dataset& data) {
    if (data.n() == 0) throw ValidationError("aalen_johansen: empty input");
    const int k_events = data.k_events;
    if (k_events < 1) throw ValidationError("aalen_johansen: needs k_events >= 1");

    std::vector<std::vector<double>> knots(k_events), values(k_events);
    std::vector<double> cif(k_events, 0.0);

    // Single pass sharing the all-event Kaplan-Meier survival so that
    // sum_k F_k + S telescopes to 1 exactly at every jump.
    double surv = 1.0;
    for (const auto& g : group_times(data.durations)) {
        std::vector<std::size_t> d_k(k_events, 0);
        std::size_t d_any = 0;
        for (std::size_t row : g.row_ids) {
            const int e = data.events[row];
            if (e > 0) {
                ++d_k[std::size_t(e) - 1];
                ++d_any;
            }
        }
        if (d_any == 0) continue;
        const double surv_before = surv;
        surv *= 1.0 - double(d_any) / double(g.at_risk);
        for (int k = 0; k < k_events; ++k) {
            if (d_k[std::size_t(k)] == 0) continue;
            cif[std::size_t(k)] +=
                surv_before * double(d_k[std::size_t(k)]) / double(g.at_risk);
            knots[std::size_t(k)].push_back(g.t);
            values[std::size_t(k)].push_back(cif[std::size_t(k)]);
        }
    }

    std::vector<StepFunction> out;
    out.reserve(std::size_t(k_events));
    for (int k = 0; k < k_events; ++k)
        out.emplace_back(std::move(knots[std::size_t(k)]),
                         std::move(values[std::size_t(k)]), 0.0);
    return out;
}

void save_step_function_csv(const StepFunction& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    auto fmt = [](double v) {
        char buf[40];
        auto res = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, res.ptr);
    };
    out << "time,value\n";
    if (f.knots().empty() || f.knots().front() > 0.0)
        out << "0," << fmt(f.value_at_0()) << '\n';
    for (std::size_t j = 0; j < f.knots().size(); ++j)
        out << fmt(f.knots()[j]) << ',' << fmt(f.values()[j]) << '\n';
}

}  // namespace survboost
