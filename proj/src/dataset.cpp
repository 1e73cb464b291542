#include "survboost/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace survboost {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    cells.push_back(cell);
    return cells;
}

bool parse_double(const std::string& s, double& out) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

bool parse_int(const std::string& s, int& out) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::size_t find_column(const std::vector<std::string>& header,
                        const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
        throw SchemaError("column '" + name + "' not found in CSV header");
    return std::size_t(it - header.begin());
}

}  // namespace

Dataset Dataset::from_arrays(Matrix features, std::vector<double> durations,
                             std::vector<int> events, int k_events) {
    Dataset d;
    d.features = std::move(features);
    d.durations = std::move(durations);
    d.events = std::move(events);
    if (k_events < 0) {
        int k = 0;
        for (int e : d.events) k = std::max(k, e);
        k_events = std::max(k, 1);
    }
    d.k_events = k_events;
    d.t_max = d.durations.empty()
                  ? 0.0
                  : *std::max_element(d.durations.begin(), d.durations.end());
    d.feature_info.resize(d.features.cols);
    for (std::size_t j = 0; j < d.features.cols; ++j)
        d.feature_info[j].name = "x" + std::to_string(j);
    d.validate();
    return d;
}

void Dataset::validate() const {
    if (n() == 0) throw ValidationError("dataset is empty");
    if (events.size() != n() || features.rows != n())
        throw ValidationError("durations, events and features disagree on row count");
    for (std::size_t i = 0; i < n(); ++i) {
        if (!(durations[i] >= 0.0))
            throw ValidationError("negative or non-finite duration at row " +
                                  std::to_string(i + 1));
        if (events[i] < 0 || events[i] > k_events)
            throw ValidationError("event label " + std::to_string(events[i]) +
                                  " at row " + std::to_string(i + 1) +
                                  " outside {0.." + std::to_string(k_events) + "}");
    }
    for (double v : features.data)
        if (std::isinf(v))
            throw ValidationError("infinite feature value");
}

Dataset load_dataset(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw ParseError("'" + path + "' is empty");
    const std::vector<std::string> header = split_line(line);

    const std::size_t dur_idx = find_column(header, schema.duration_col);
    const std::size_t ev_idx = find_column(header, schema.event_col);

    std::vector<std::size_t> feat_idx;
    if (schema.feature_cols.empty()) {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (j != dur_idx && j != ev_idx) feat_idx.push_back(j);
    } else {
        for (const auto& name : schema.feature_cols)
            feat_idx.push_back(find_column(header, name));
    }

    std::vector<std::vector<std::string>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != header.size())
            throw ParseError("row " + std::to_string(line_no - 1) + " has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(header.size()));
        rows.push_back(std::move(cells));
    }
    if (rows.empty()) throw ParseError("'" + path + "' has no data rows");

    const std::size_t n = rows.size();
    const std::size_t d = feat_idx.size();

    Dataset out;
    out.duration_name = schema.duration_col;
    out.event_name = schema.event_col;
    out.durations.resize(n);
    out.events.resize(n);
    out.features = Matrix(n, d, kMissing);
    out.feature_info.resize(d);

    for (std::size_t i = 0; i < n; ++i) {
        const std::string& cell = rows[i][dur_idx];
        double v;
        if (!parse_double(cell, v))
            throw ParseError("row " + std::to_string(i + 1) + ", column '" +
                             schema.duration_col + "': cannot parse '" + cell + "'");
        if (!(v >= 0.0))
            throw ValidationError("row " + std::to_string(i + 1) + ", column '" +
                                  schema.duration_col + "': negative duration");
        out.durations[i] = v;

        const std::string& ecell = rows[i][ev_idx];
        int e;
        if (!parse_int(ecell, e))
            throw ParseError("row " + std::to_string(i + 1) + ", column '" +
                             schema.event_col + "': cannot parse '" + ecell +
                             "' as integer");
        if (e < 0)
            throw ValidationError("row " + std::to_string(i + 1) + ", column '" +
                                  schema.event_col + "': event label < 0");
        out.events[i] = e;
    }

    // Feature columns: numeric if every non-empty cell parses, otherwise
    // categorical with ordinal codes in first-appearance order.
    for (std::size_t jj = 0; jj < d; ++jj) {
        const std::size_t col = feat_idx[jj];
        out.feature_info[jj].name = header[col];
        bool numeric = true;
        for (std::size_t i = 0; i < n && numeric; ++i) {
            const std::string& cell = rows[i][col];
            if (cell.empty()) continue;
            double v;
            numeric = parse_double(cell, v);
        }
        out.feature_info[jj].categorical = !numeric;
        if (numeric) {
            for (std::size_t i = 0; i < n; ++i) {
                const std::string& cell = rows[i][col];
                if (cell.empty()) continue;
                double v;
                parse_double(cell, v);
                out.features.at(i, jj) = v;
            }
        } else {
            auto& cats = out.feature_info[jj].categories;
            for (std::size_t i = 0; i < n; ++i) {
                const std::string& cell = rows[i][col];
                if (cell.empty()) continue;
                auto it = std::find(cats.begin(), cats.end(), cell);
                std::size_t code;
                if (it == cats.end()) {
                    code = cats.size();
                    cats.push_back(cell);
                } else {
                    code = std::size_t(it - cats.begin());
                }
                out.features.at(i, jj) = double(code);
            }
        }
    }

    int k = 0;
    for (int e : out.events) k = std::max(k, e);
    out.k_events = std::max(k, 1);
    out.t_max = *std::max_element(out.durations.begin(), out.durations.end());
    out.validate();
    return out;
}

void save_dataset_csv(const Dataset& data, const std::string& path) {
    std::ofstream outf(path);
    if (!outf) throw Error("cannot write '" + path + "'");

    outf << data.duration_name << ',' << data.event_name;
    for (const auto& fi : data.feature_info) outf << ',' << fi.name;
    outf << '\n';

    for (std::size_t i = 0; i < data.n(); ++i) {
        outf << format_double(data.durations[i]) << ',' << data.events[i];
        for (std::size_t j = 0; j < data.n_features(); ++j) {
            outf << ',';
            const double v = data.features.at(i, j);
            if (std::isnan(v)) continue;  // empty cell = missing
            const auto& fi = data.feature_info[j];
            if (fi.categorical) {
                outf << fi.categories.at(std::size_t(v));
            } else {
                outf << format_double(v);
            }
        }
        outf << '\n';
    }
    if (!outf) throw Error("write to '" + path + "' failed");
}

std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction,
                                  std::uint64_t seed) {
    const std::size_t n = data.n();
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ValidationError("test_fraction must be in (0, 1)");
    if (double(n) * test_fraction < 1.0 || double(n) * (1.0 - test_fraction) < 1.0)
        throw ValidationError("split would leave an empty partition (n = " +
                              std::to_string(n) + ")");

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(mix_seed({seed, 0x5eedu}));
    for (std::size_t i = n - 1; i > 0; --i)
        std::swap(idx[i], idx[rng.below(i + 1)]);

    std::size_t n_test = std::size_t(double(n) * test_fraction);
    n_test = std::clamp<std::size_t>(n_test, 1, n - 1);

    std::vector<std::size_t> test_rows(idx.begin(), idx.begin() + n_test);
    std::vector<std::size_t> train_rows(idx.begin() + n_test, idx.end());
    std::sort(test_rows.begin(), test_rows.end());
    std::sort(train_rows.begin(), train_rows.end());

    auto take = [&](const std::vector<std::size_t>& sel) {
        Dataset out;
        out.k_events = data.k_events;
        out.feature_info = data.feature_info;
        out.duration_name = data.duration_name;
        out.event_name = data.event_name;
        out.features = Matrix(sel.size(), data.n_features());
        out.durations.resize(sel.size());
        out.events.resize(sel.size());
        for (std::size_t i = 0; i < sel.size(); ++i) {
            out.durations[i] = data.durations[sel[i]];
            out.events[i] = data.events[sel[i]];
            auto src = data.features.row(sel[i]);
            std::copy(src.begin(), src.end(), out.features.row(i).begin());
        }
        out.t_max = *std::max_element(out.durations.begin(), out.durations.end());
        return out;
    };

    return {take(train_rows), take(test_rows)};
}

void reencode_features(Dataset& data, const std::vector<FeatureInfo>& reference) {
    if (data.feature_info.size() != reference.size())
        throw SchemaError("dataset has " + std::to_string(data.feature_info.size()) +
                          " features, model expects " +
                          std::to_string(reference.size()));
    for (std::size_t j = 0; j < reference.size(); ++j) {
        if (data.feature_info[j].name != reference[j].name)
            throw SchemaError("feature " + std::to_string(j) + " is '" +
                              data.feature_info[j].name + "', model expects '" +
                              reference[j].name + "'");
        if (!reference[j].categorical) {
            if (data.feature_info[j].categorical)
                throw SchemaError("column '" + reference[j].name +
                                  "' is categorical here but was numeric at training");
            continue;
        }
        const auto& ref_cats = reference[j].categories;
        auto ref_code = [&](const std::string& s) {
            auto it = std::find(ref_cats.begin(), ref_cats.end(), s);
            return it == ref_cats.end() ? kMissing : double(it - ref_cats.begin());
        };
        const auto& own = data.feature_info[j];
        for (std::size_t i = 0; i < data.n(); ++i) {
            double& v = data.features.at(i, j);
            if (std::isnan(v)) continue;
            // Numeric-looking categories parse as numbers on reload; map the
            // shortest formatting of the value back through the code table.
            const std::string key =
                own.categorical ? own.categories.at(std::size_t(v)) : format_double(v);
            v = ref_code(key);
        }
        data.feature_info[j] = reference[j];
    }
}

TimeGrid::TimeGrid(std::vector<double> h) : horizons(std::move(h)) {
    if (horizons.empty()) throw ValidationError("time grid is empty");
    for (std::size_t j = 0; j < horizons.size(); ++j) {
        if (!(horizons[j] >= 0.0))
            throw ValidationError("time grid contains a negative or NaN horizon");
        if (j > 0 && !(horizons[j] > horizons[j - 1]))
            throw ValidationError("time grid must be strictly increasing");
    }
}

TimeGrid TimeGrid::linspace(double lo, double hi, std::size_t n_points) {
    if (n_points == 0) throw ValidationError("time grid is empty");
    if (!(hi > lo) && n_points > 1)
        throw ValidationError("linspace needs hi > lo");
    std::vector<double> h(n_points);
    if (n_points == 1) {
        h[0] = lo;
    } else {
        for (std::size_t j = 0; j < n_points; ++j)
            h[j] = lo + (hi - lo) * double(j) / double(n_points - 1);
        h.back() = hi;
    }
    return TimeGrid(std::move(h));
}

}  // namespace survboost
