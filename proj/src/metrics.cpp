#include "survboost/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

namespace survboost {

double brier_score_event(std::span<const double> pred_k, const Dataset& data,
                         double zeta, const CensoringEstimator& g, int k,
                         double eps) {
    if (k < 1 || k > data.k_events)
        throw ValidationError("brier_score_event: event index out of range");
    if (pred_k.size() != data.n())
        throw ValidationError("brier_score_event: prediction length mismatch");
    if (!(eps > 0.0 && eps < 0.5))
        throw ValidationError("brier_score_event: eps must be in (0, 0.5)");

    double total = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i) {
        const double t = data.durations[i];
        const int delta = data.events[i];
        const double f = pred_k[i];
        const auto x = data.features.row(i);
        if (t <= zeta && delta == k) {
            total += (1.0 - f) * (1.0 - f) / std::max(g.at_left(x, t), eps);
        } else if (t > zeta) {
            total += f * f / std::max(g.at(x, zeta), eps);
        } else if (delta != 0) {  // another event before zeta
            total += f * f / std::max(g.at_left(x, t), eps);
        }
        // censored before zeta: no contribution
    }
    return total / double(data.n());
}

MetricReport integrated_brier_score(const CifMatrix& cif, const Dataset& data,
                                    const CensoringEstimator& g, double eps) {
    if (cif.n_rows != data.n())
        throw ValidationError("integrated_brier_score: row count mismatch");
    if (cif.k_events != data.k_events)
        throw ValidationError("integrated_brier_score: model predicts " +
                              std::to_string(cif.k_events) + " events, data has " +
                              std::to_string(data.k_events));
    const auto& grid = cif.grid;
    if (grid.size() < 2)
        throw ValidationError("integrated_brier_score: grid needs >= 2 points");
    if (grid.horizons.back() > data.t_max)
        throw ValidationError("integrated_brier_score: grid exceeds the data range");

    MetricReport report;
    report.name = "ibs";
    report.grid = grid;
    report.n_effective = data.n();

    const double span = grid.horizons.back() - grid.horizons.front();
    std::vector<double> pred(data.n());
    double mean = 0.0;
    for (int k = 1; k <= data.k_events; ++k) {
        std::vector<double> bs(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j) {
            for (std::size_t i = 0; i < data.n(); ++i)
                pred[i] = cif.at(i, j, std::size_t(k));
            bs[j] = brier_score_event(pred, data, grid[j], g, k, eps);
        }
        double integral = 0.0;
        for (std::size_t j = 0; j + 1 < grid.size(); ++j)
            integral += 0.5 * (bs[j] + bs[j + 1]) * (grid[j + 1] - grid[j]);
        report.per_event.push_back(integral / span);
        mean += report.per_event.back();
    }
    report.value = mean / double(data.k_events);
    return report;
}

double accuracy_at_index(const CifMatrix& cif, const Dataset& data, std::size_t j) {
    if (cif.n_rows != data.n())
        throw ValidationError("accuracy_in_time: row count mismatch");
    const double zeta = cif.grid[j];
    std::size_t n_eval = 0, n_correct = 0;
    for (std::size_t i = 0; i < data.n(); ++i) {
        const double t = data.durations[i];
        const int delta = data.events[i];
        if (delta == 0 && t <= zeta) continue;  // censored by zeta: not evaluable
        const int observed = t <= zeta ? delta : 0;
        int best = 0;
        double best_p = cif.at(i, j, 0);
        for (std::size_t c = 1; c < cif.n_classes(); ++c) {
            if (cif.at(i, j, c) > best_p) {  // ties keep the lowest class
                best_p = cif.at(i, j, c);
                best = int(c);
            }
        }
        ++n_eval;
        n_correct += best == observed;
    }
    if (n_eval == 0) throw ValidationError("accuracy_in_time: no evaluable rows");
    return double(n_correct) / double(n_eval);
}

double accuracy_in_time(const CifMatrix& cif, const Dataset& data, double zeta) {
    const auto& h = cif.grid.horizons;
    const auto it = std::find(h.begin(), h.end(), zeta);
    if (it == h.end())
        throw ValidationError("accuracy_in_time: zeta is not a grid horizon");
    return accuracy_at_index(cif, data, std::size_t(it - h.begin()));
}

MetricReport s_cen_log_simple(const Matrix& pred_any_event, const Dataset& data,
                              double node_t_max) {
    if (pred_any_event.rows != data.n())
        throw ValidationError("s_cen_log_simple: row count mismatch");
    if (pred_any_event.cols < 3)
        throw ValidationError("s_cen_log_simple: needs at least 2 buckets");
    if (!(node_t_max > 0.0))
        throw ValidationError("s_cen_log_simple: node span must be positive");

    const std::size_t n_buckets = pred_any_event.cols - 1;
    const double width = node_t_max / double(n_buckets);

    MetricReport report;
    report.name = "s_cen_log_simple";
    report.n_effective = data.n();

    double total = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i) {
        const double t = data.durations[i];
        // Bucket b covers (node_b, node_{b+1}]; times at or below node 0 or
        // beyond the last node fall outside every bucket and contribute 0.
        std::size_t bucket = n_buckets;
        for (std::size_t b = 0; b < n_buckets; ++b) {
            const double lo = width * double(b);
            const double hi = b + 1 == n_buckets ? node_t_max : width * double(b + 1);
            if (t > lo && t <= hi) {
                bucket = b;
                break;
            }
        }
        if (bucket == n_buckets) continue;
        if (data.events[i] != 0) {
            double inc = pred_any_event.at(i, bucket + 1) - pred_any_event.at(i, bucket);
            if (inc < 1e-15) {
                inc = 1e-15;
                ++report.clamped_increments;
            }
            total -= std::log(inc);
        } else {
            double surv = 1.0 - pred_any_event.at(i, bucket + 1);
            if (surv < 1e-15) {
                surv = 1e-15;
                ++report.clamped_increments;
            }
            total -= std::log(surv);
        }
    }
    report.value = total / double(data.n());
    return report;
}

double c_index_at(std::span<const double> risk, const Dataset& data, double zeta,
                  int k) {
    if (!(zeta > 0.0)) throw ValidationError("c_index_at: zeta must be positive");
    if (risk.size() != data.n())
        throw ValidationError("c_index_at: risk length mismatch");
    if (k < 1 || k > data.k_events)
        throw ValidationError("c_index_at: event index out of range");

    double concordant = 0.0;
    std::size_t n_pairs = 0;
    for (std::size_t i = 0; i < data.n(); ++i) {
        if (data.events[i] != k || data.durations[i] > zeta) continue;
        for (std::size_t j = 0; j < data.n(); ++j) {
            if (data.durations[j] <= data.durations[i]) continue;
            ++n_pairs;
            if (risk[i] > risk[j])
                concordant += 1.0;
            else if (risk[i] == risk[j])
                concordant += 0.5;
        }
    }
    if (n_pairs == 0)
        throw ValidationError("c_index_at: no comparable pairs at this horizon");
    return concordant / double(n_pairs);
}

TimeGrid default_ibs_grid(const Dataset& data, std::size_t n_points) {
    double t_event_max = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i)
        if (data.events[i] != 0) t_event_max = std::max(t_event_max, data.durations[i]);
    if (t_event_max <= 0.0) t_event_max = data.t_max;
    if (t_event_max <= 0.0)
        throw ValidationError("default_ibs_grid: no positive times in data");
    std::vector<double> h(n_points);
    for (std::size_t j = 0; j < n_points; ++j)
        h[j] = t_event_max * double(j + 1) / double(n_points);
    return TimeGrid(std::move(h));
}

std::vector<double> horizon_quantiles(const Dataset& data,
                                      std::span<const double> quantiles) {
    std::vector<double> event_times;
    for (std::size_t i = 0; i < data.n(); ++i)
        if (data.events[i] != 0) event_times.push_back(data.durations[i]);
    if (event_times.empty())
        throw ValidationError("horizon_quantiles: no observed events");
    std::sort(event_times.begin(), event_times.end());
    std::vector<double> out;
    for (double q : quantiles) {
        if (!(q >= 0.0 && q <= 1.0))
            throw ValidationError("horizon_quantiles: quantile outside [0, 1]");
        const std::size_t idx = std::min(
            event_times.size() - 1, std::size_t(q * double(event_times.size())));
        out.push_back(event_times[idx]);
    }
    return out;
}

void save_report_csv(std::span<const MetricReport> reports, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    auto fmt = [](double v) {
        char buf[40];
        auto res = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, res.ptr);
    };
    out << "metric,component,value,n_effective\n";
    for (const MetricReport& r : reports) {
        out << r.name << ",all," << fmt(r.value) << ',' << r.n_effective << '\n';
        for (std::size_t k = 0; k < r.per_event.size(); ++k)
            out << r.name << ',' << (k + 1) << ',' << fmt(r.per_event[k]) << ','
                << r.n_effective << '\n';
    }
}

}  // namespace survboost
