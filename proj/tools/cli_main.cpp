#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "survboost/metrics.hpp"
#include "survboost/nonparametric.hpp"
#include "survboost/survival_boost.hpp"
#include "survboost/synthetic.hpp"

namespace sb = survboost;

namespace {

std::string fmt(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    for (const auto& item : split_csv_list(s)) out.push_back(std::stod(item));
    return out;
}

struct SchemaFlags {
    std::string duration_col = "duration";
    std::string event_col = "event";
    std::string features;

    void attach(CLI::App* cmd) {
        cmd->add_option("--duration-col", duration_col, "Duration column name");
        cmd->add_option("--event-col", event_col,
                        "Event column name (0 = censored, 1..K = event type)");
        cmd->add_option("--features", features,
                        "Comma-separated feature columns (default: all others)");
    }

    sb::CsvSchema schema() const {
        return {duration_col, event_col, split_csv_list(features)};
    }
};

struct TrainFlags {
    sb::SurvivalBoostConfig config;
    double cens_learning_rate = -1.0;  // <0: reuse the event learning rate
    int cens_max_depth = -1;

    void attach(CLI::App* cmd) {
        cmd->add_option("--learning-rate", config.gbt.learning_rate,
                        "Shrinkage per boosting round");
        cmd->add_option("--rounds", config.gbt.n_rounds, "Boosting rounds");
        cmd->add_option("--max-depth", config.gbt.max_depth, "Tree depth limit");
        cmd->add_option("--max-bins", config.gbt.max_bins,
                        "Histogram bins per feature (2-255)");
        cmd->add_option("--min-child-weight", config.gbt.min_child_weight,
                        "Minimum summed hessian per leaf");
        cmd->add_option("--l2", config.gbt.l2_regularization, "L2 leaf penalty");
        cmd->add_option("--cens-learning-rate", cens_learning_rate,
                        "Censoring model learning rate (default: same as event)");
        cmd->add_option("--cens-max-depth", cens_max_depth,
                        "Censoring model depth (default: same as event)");
        cmd->add_option("--horizons-per-row", config.n_horizons_per_row,
                        "Sampled horizons per observation per round (1-5)");
        cmd->add_option("--feedback-period", config.feedback_period,
                        "Rounds between censoring-model updates");
        cmd->add_option("--ipcw-clip", config.ipcw_clip,
                        "Lower clip on censoring probabilities in weights");
    }

    sb::SurvivalBoostConfig resolve(std::uint64_t seed) const {
        sb::SurvivalBoostConfig out = config;
        out.seed = seed;
        out.gbt.seed = seed;
        out.censoring_gbt = out.gbt;
        if (cens_learning_rate > 0.0)
            out.censoring_gbt.learning_rate = cens_learning_rate;
        if (cens_max_depth > 0) out.censoring_gbt.max_depth = cens_max_depth;
        return out;
    }
};

int env_thread_default() {
    if (const char* env = std::getenv("SURVBOOST_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

sb::Dataset load_for_model(const std::string& path, const SchemaFlags& schema,
                           const sb::SurvivalModel& model) {
    sb::Dataset data = sb::load_dataset(path, schema.schema());
    sb::reencode_features(data, model.feature_info);
    int max_label = 0;
    for (int e : data.events) max_label = std::max(max_label, e);
    if (max_label > model.k_events)
        throw sb::ValidationError("dataset has event label " +
                                  std::to_string(max_label) + " but the model knows " +
                                  std::to_string(model.k_events) + " events");
    data.k_events = model.k_events;
    return data;
}

struct EvalResult {
    std::vector<sb::MetricReport> reports;
    std::vector<double> acc_values;  // aligned with quantile horizons
    std::vector<double> acc_horizons;
};

EvalResult evaluate_model(const sb::SurvivalModel& model, const sb::Dataset& test,
                          const sb::CensoringEstimator& weights,
                          const std::vector<std::string>& metrics,
                          std::size_t grid_size, const std::vector<double>& quantiles,
                          const std::string& brier_csv) {
    EvalResult out;
    auto want = [&](const std::string& m) {
        return std::find(metrics.begin(), metrics.end(), m) != metrics.end();
    };

    if (want("ibs")) {
        const sb::TimeGrid grid = sb::default_ibs_grid(test, grid_size);
        const sb::CifMatrix cif = sb::predict_cif(model, test.features, grid);
        out.reports.push_back(sb::integrated_brier_score(cif, test, weights));
        if (!brier_csv.empty()) {
            std::ofstream bs(brier_csv);
            if (!bs) throw sb::Error("cannot write '" + brier_csv + "'");
            bs << "zeta";
            for (int k = 1; k <= test.k_events; ++k) bs << ",bs_" << k;
            bs << '\n';
            std::vector<double> pred(test.n());
            for (std::size_t j = 0; j < grid.size(); ++j) {
                bs << fmt(grid[j]);
                for (int k = 1; k <= test.k_events; ++k) {
                    for (std::size_t i = 0; i < test.n(); ++i)
                        pred[i] = cif.at(i, j, std::size_t(k));
                    bs << ',' << fmt(sb::brier_score_event(pred, test, grid[j],
                                                           weights, k));
                }
                bs << '\n';
            }
        }
    }

    const std::vector<double> horizons = sb::horizon_quantiles(test, quantiles);
    std::vector<double> dedup;
    for (double h : horizons)
        if (dedup.empty() || h > dedup.back()) dedup.push_back(h);

    if (want("acc")) {
        const sb::TimeGrid grid{std::vector<double>(dedup)};
        const sb::CifMatrix cif = sb::predict_cif(model, test.features, grid);
        sb::MetricReport report;
        report.name = "accuracy_in_time";
        report.grid = grid;
        report.n_effective = test.n();
        double mean = 0.0;
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const double acc = sb::accuracy_at_index(cif, test, j);
            out.acc_values.push_back(acc);
            out.acc_horizons.push_back(grid[j]);
            report.per_event.push_back(acc);
            mean += acc;
        }
        report.value = mean / double(grid.size());
        out.reports.push_back(std::move(report));
    }

    if (want("scls")) {
        const int n_buckets = 32;
        const sb::TimeGrid nodes = sb::TimeGrid::linspace(0.0, test.t_max, n_buckets + 1);
        const sb::CifMatrix cif = sb::predict_cif(model, test.features, nodes);
        sb::Matrix any_event(test.n(), nodes.size());
        for (std::size_t i = 0; i < test.n(); ++i)
            for (std::size_t j = 0; j < nodes.size(); ++j)
                any_event.at(i, j) = 1.0 - cif.at(i, j, 0);
        out.reports.push_back(sb::s_cen_log_simple(any_event, test, test.t_max));
    }

    if (want("cindex")) {
        sb::MetricReport report;
        report.name = "c_index";
        report.n_effective = test.n();
        const sb::TimeGrid grid{std::vector<double>(dedup)};
        const sb::CifMatrix cif = sb::predict_cif(model, test.features, grid);
        std::vector<double> risk(test.n());
        double mean = 0.0;
        std::size_t count = 0;
        for (int k = 1; k <= test.k_events; ++k) {
            for (std::size_t j = 0; j < grid.size(); ++j) {
                for (std::size_t i = 0; i < test.n(); ++i)
                    risk[i] = cif.at(i, j, std::size_t(k));
                const double c = sb::c_index_at(risk, test, grid[j], k);
                report.per_event.push_back(c);
                mean += c;
                ++count;
            }
        }
        report.value = count ? mean / double(count) : 0.0;
        out.reports.push_back(std::move(report));
    }
    return out;
}

void print_reports(std::ostream& os, const EvalResult& result) {
    for (const auto& r : result.reports) {
        os << r.name << ": " << fmt(r.value);
        if (!r.per_event.empty()) {
            os << "  [";
            for (std::size_t k = 0; k < r.per_event.size(); ++k)
                os << (k ? " " : "") << fmt(r.per_event[k]);
            os << "]";
        }
        if (!r.grid.horizons.empty())
            os << "  (grid: " << r.grid.size() << " points on ["
               << fmt(r.grid.horizons.front()) << ", " << fmt(r.grid.horizons.back())
               << "], n=" << r.n_effective << ")";
        if (r.clamped_increments > 0)
            os << "  (clamped increments: " << r.clamped_increments << ")";
        os << '\n';
    }
    if (!result.acc_values.empty()) {
        os << "accuracy horizons:";
        for (double h : result.acc_horizons) os << ' ' << fmt(h);
        os << '\n';
    }
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int run_synth(const sb::SynthConfig& config, const std::string& out_csv,
              const std::string& oracle_out, const std::string& test_out,
              double test_fraction, std::uint64_t seed) {
    auto [data, oracle] = sb::generate(config);
    std::size_t censored = 0;
    for (int e : data.events) censored += e == 0;
    if (test_out.empty()) {
        sb::save_dataset_csv(data, out_csv);
        std::cout << "wrote " << data.n() << " rows to " << out_csv;
    } else {
        auto [train, test] = sb::split(data, test_fraction, seed);
        sb::save_dataset_csv(train, out_csv);
        sb::save_dataset_csv(test, test_out);
        std::cout << "wrote " << train.n() << " rows to " << out_csv << " and "
                  << test.n() << " rows to " << test_out;
    }
    if (!oracle_out.empty()) sb::save_oracle(oracle, oracle_out);
    std::cout << " (censoring rate " << fmt(double(censored) / double(data.n()))
              << ", k_events " << data.k_events << ")\n";
    return 0;
}

int run_train(const std::string& data_path, const SchemaFlags& schema,
              const TrainFlags& train, std::uint64_t seed, const std::string& out,
              const std::string& log_path, int search) {
    if (search > 0) {
        // Stub: sample hyperparameters from the documented search ranges and
        // print them; no search orchestration happens here.
        sb::Rng rng(sb::mix_seed({seed, 0x5eacu}));
        std::cout << "learning_rate,rounds,max_depth,horizons_per_row\n";
        for (int i = 0; i < search; ++i) {
            const double lr =
                std::exp(rng.uniform(std::log(0.01), std::log(0.5)));
            const int rounds = 20 + int(rng.below(181));
            const int depth = 2 + int(rng.below(9));
            const int horizons = 1 + int(rng.below(5));
            std::cout << fmt(lr) << ',' << rounds << ',' << depth << ','
                      << horizons << '\n';
        }
        return 0;
    }

    const sb::Dataset data = sb::load_dataset(data_path, schema.schema());
    const sb::SurvivalBoostConfig config = train.resolve(seed);

    std::vector<sb::FitLogEntry> log;
    const auto start = std::chrono::steady_clock::now();
    const sb::SurvivalModel model = sb::fit(data, config, &log);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    sb::save_model(model, out);

    for (const auto& entry : log)
        std::cout << "round " << entry.round << "  loss " << fmt(entry.loss)
                  << "  rows " << entry.n_rows << "  " << fmt(entry.seconds)
                  << "s\n";
    std::cout << "trained " << config.gbt.n_rounds << " rounds on " << data.n()
              << " rows in " << fmt(elapsed) << "s; model written to " << out
              << '\n';

    if (!log_path.empty()) {
        std::ofstream lf(log_path);
        if (!lf) throw sb::Error("cannot write '" + log_path + "'");
        lf << "round,loss,n_rows,seconds\n";
        for (const auto& entry : log)
            lf << entry.round << ',' << fmt(entry.loss) << ',' << entry.n_rows << ','
               << fmt(entry.seconds) << '\n';
    }
    return 0;
}

int run_predict(const std::string& model_path, const std::string& data_path,
                const SchemaFlags& schema, const std::string& times,
                std::size_t grid_size, bool isotonic, const std::string& out) {
    const sb::SurvivalModel model = sb::load_model(model_path);
    const sb::Dataset data = load_for_model(data_path, schema, model);

    sb::TimeGrid grid = times.empty()
                            ? sb::TimeGrid::linspace(model.t_max / double(grid_size),
                                                     model.t_max, grid_size)
                            : sb::TimeGrid(parse_double_list(times));
    const sb::CifMatrix cif = sb::predict_cif(model, data.features, grid, isotonic);

    std::ofstream os(out);
    if (!os) throw sb::Error("cannot write '" + out + "'");
    os << "row,zeta,survival";
    for (int k = 1; k <= model.k_events; ++k) os << ",cif_" << k;
    os << '\n';
    for (std::size_t i = 0; i < cif.n_rows; ++i)
        for (std::size_t j = 0; j < grid.size(); ++j) {
            os << i << ',' << fmt(grid[j]) << ',' << fmt(cif.at(i, j, 0));
            for (std::size_t c = 1; c < cif.n_classes(); ++c)
                os << ',' << fmt(cif.at(i, j, c));
            os << '\n';
        }
    std::cout << "wrote " << cif.n_rows * grid.size() << " predictions to " << out
              << '\n';
    return 0;
}

int run_evaluate(const std::string& model_path, const std::string& data_path,
                 const SchemaFlags& schema, const std::string& metrics_list,
                 std::size_t grid_size, const std::string& quantiles_list,
                 const std::string& oracle_path, const std::string& out,
                 const std::string& brier_csv, const std::string& report_csv) {
    const sb::SurvivalModel model = sb::load_model(model_path);
    const sb::Dataset test = load_for_model(data_path, schema, model);

    std::unique_ptr<sb::CensoringEstimator> weights;
    sb::SynthOracle oracle;
    if (!oracle_path.empty()) {
        oracle = sb::load_oracle(oracle_path);
        weights = std::make_unique<sb::OracleCensoring>(oracle);
    } else {
        weights = std::make_unique<sb::MarginalCensoring>(sb::censoring_km(test));
    }

    const std::vector<std::string> metrics = split_csv_list(metrics_list);
    const std::vector<double> quantiles = parse_double_list(quantiles_list);
    const EvalResult result = evaluate_model(model, test, *weights, metrics,
                                             grid_size, quantiles, brier_csv);

    print_reports(std::cout, result);
    if (!out.empty()) {
        std::ofstream os(out);
        if (!os) throw sb::Error("cannot write '" + out + "'");
        print_reports(os, result);
    }
    if (!report_csv.empty()) sb::save_report_csv(result.reports, report_csv);
    return 0;
}

struct BenchRow {
    std::string model;
    double ibs_mean = 0.0;
    std::vector<double> ibs_event;
    double acc_q50 = 0.0;
    double fit_seconds = 0.0;
};

int run_benchmark(const std::string& data_path, const SchemaFlags& schema,
                  const sb::SynthConfig& synth_config, bool use_synth,
                  const TrainFlags& train, std::uint64_t seed, double test_fraction,
                  const std::string& models_list, bool oracle_ibs,
                  const std::string& out_csv, const std::string& save_models_dir,
                  const std::string& export_curves_dir) {
    sb::Dataset full;
    std::optional<sb::SynthOracle> oracle;
    if (use_synth) {
        auto [data, orc] = sb::generate(synth_config);
        full = std::move(data);
        oracle = std::move(orc);
    } else {
        full = sb::load_dataset(data_path, schema.schema());
    }
    if (oracle_ibs && !oracle)
        throw sb::Error("--oracle-ibs needs --synth (no oracle for file data)");

    auto [train_data, test_data] = sb::split(full, test_fraction, seed);

    std::vector<std::string> models = split_csv_list(models_list);
    if (models.empty()) {
        models.push_back("survboost");
        models.push_back(full.k_events == 1 ? "km" : "aj");
    }

    std::unique_ptr<sb::CensoringEstimator> weights;
    if (oracle_ibs)
        weights = std::make_unique<sb::OracleCensoring>(*oracle);
    else
        weights = std::make_unique<sb::MarginalCensoring>(sb::censoring_km(test_data));

    const sb::TimeGrid grid = sb::default_ibs_grid(test_data, 100);
    const double q50 = sb::horizon_quantiles(test_data, std::vector<double>{0.5})[0];
    const sb::TimeGrid acc_grid{std::vector<double>{q50}};

    // Covariate-free baseline CIF replicated across rows.
    auto marginal_cif = [&](const std::vector<sb::StepFunction>& cifs,
                            const sb::TimeGrid& g) {
        sb::CifMatrix cif(test_data.n(), test_data.k_events, g);
        for (std::size_t j = 0; j < g.size(); ++j) {
            double total = 0.0;
            std::vector<double> f(cifs.size());
            for (std::size_t k = 0; k < cifs.size(); ++k) {
                f[k] = cifs[k](g[j]);
                total += f[k];
            }
            for (std::size_t i = 0; i < test_data.n(); ++i) {
                cif.at(i, j, 0) = std::max(1.0 - total, 0.0);
                for (std::size_t k = 0; k < cifs.size(); ++k)
                    cif.at(i, j, k + 1) = f[k];
            }
        }
        return cif;
    };

    std::vector<BenchRow> rows;
    for (const std::string& name : models) {
        BenchRow row;
        row.model = name;
        const auto start = std::chrono::steady_clock::now();
        sb::CifMatrix cif, acc_cif;
        if (name == "survboost") {
            const sb::SurvivalBoostConfig config = train.resolve(seed);
            const sb::SurvivalModel model = sb::fit(train_data, config);
            row.fit_seconds = std::chrono::duration<double>(
                                  std::chrono::steady_clock::now() - start)
                                  .count();
            cif = sb::predict_cif(model, test_data.features, grid);
            acc_cif = sb::predict_cif(model, test_data.features, acc_grid);
            if (!save_models_dir.empty())
                sb::save_model(model, save_models_dir + "/survboost.json");
        } else if (name == "aj" || (name == "km" && full.k_events > 1)) {
            const auto cifs = sb::aalen_johansen(train_data);
            row.fit_seconds = std::chrono::duration<double>(
                                  std::chrono::steady_clock::now() - start)
                                  .count();
            cif = marginal_cif(cifs, grid);
            acc_cif = marginal_cif(cifs, acc_grid);
            if (!save_models_dir.empty()) {
                std::vector<int> any(train_data.n());
                for (std::size_t i = 0; i < train_data.n(); ++i)
                    any[i] = train_data.events[i] != 0;
                sb::save_aalen_johansen(
                    cifs, sb::kaplan_meier(train_data.durations, any),
                    save_models_dir + "/aalen_johansen.json");
            }
            if (!export_curves_dir.empty()) {
                for (std::size_t k = 0; k < cifs.size(); ++k)
                    sb::save_step_function_csv(
                        cifs[k], export_curves_dir + "/aj_cif_" +
                                     std::to_string(k + 1) + ".csv");
                std::vector<int> any(train_data.n());
                for (std::size_t i = 0; i < train_data.n(); ++i)
                    any[i] = train_data.events[i] != 0;
                sb::save_step_function_csv(
                    sb::kaplan_meier(train_data.durations, any),
                    export_curves_dir + "/km_survival.csv");
                sb::save_step_function_csv(sb::censoring_km(train_data),
                                           export_curves_dir + "/censoring_km.csv");
            }
        } else if (name == "km") {
            std::vector<int> any(train_data.n());
            for (std::size_t i = 0; i < train_data.n(); ++i)
                any[i] = train_data.events[i] != 0;
            const sb::StepFunction km =
                sb::kaplan_meier(train_data.durations, any);
            row.fit_seconds = std::chrono::duration<double>(
                                  std::chrono::steady_clock::now() - start)
                                  .count();
            // K = 1: the single CIF is one minus the survival curve.
            std::vector<sb::StepFunction> cifs;
            {
                std::vector<double> vals(km.values());
                for (double& v : vals) v = 1.0 - v;
                cifs.emplace_back(std::vector<double>(km.knots()), std::move(vals),
                                  1.0 - km.value_at_0());
            }
            cif = marginal_cif(cifs, grid);
            acc_cif = marginal_cif(cifs, acc_grid);
            if (!export_curves_dir.empty())
                sb::save_step_function_csv(km,
                                           export_curves_dir + "/km_survival.csv");
        } else {
            throw sb::Error("unknown model '" + name +
                            "' (expected survboost, aj or km)");
        }
        const sb::MetricReport ibs =
            sb::integrated_brier_score(cif, test_data, *weights);
        row.ibs_mean = ibs.value;
        row.ibs_event = ibs.per_event;
        row.acc_q50 = sb::accuracy_at_index(acc_cif, test_data, 0);
        rows.push_back(std::move(row));
    }

    std::cout << std::left << std::setw(16) << "model" << std::setw(12)
              << "ibs_mean";
    for (int k = 1; k <= test_data.k_events; ++k)
        std::cout << std::setw(12) << ("ibs_" + std::to_string(k));
    std::cout << std::setw(12) << "acc_q50" << std::setw(12) << "fit_s" << '\n';
    for (const auto& row : rows) {
        std::cout << std::left << std::setw(16) << row.model << std::setw(12)
                  << std::setprecision(5) << row.ibs_mean;
        for (double v : row.ibs_event)
            std::cout << std::setw(12) << std::setprecision(5) << v;
        std::cout << std::setw(12) << std::setprecision(5) << row.acc_q50
                  << std::setw(12) << std::setprecision(4) << row.fit_seconds
                  << '\n';
    }

    if (!out_csv.empty()) {
        std::ofstream os(out_csv);
        if (!os) throw sb::Error("cannot write '" + out_csv + "'");
        os << "model,ibs_mean";
        for (int k = 1; k <= test_data.k_events; ++k) os << ",ibs_" << k;
        os << ",acc_q50,fit_seconds\n";
        for (const auto& row : rows) {
            os << row.model << ',' << fmt(row.ibs_mean);
            for (double v : row.ibs_event) os << ',' << fmt(v);
            os << ',' << fmt(row.acc_q50) << ',' << fmt(row.fit_seconds) << '\n';
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gradient-boosted competing-risks and survival modeling"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Config file (ini/toml style, keys match flags)");

    std::uint64_t seed = 0;
    int n_threads = env_thread_default();
    app.add_option("--seed", seed, "Seed for all randomness")->capture_default_str();
    app.add_option("--threads", n_threads,
                   "Worker thread cap (env SURVBOOST_THREADS; results do not "
                   "depend on it)");

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a Weibull benchmark dataset");
    sb::SynthConfig synth_config;
    std::string synth_out = "synth.csv", synth_oracle_out, synth_test_out;
    double synth_test_fraction = 0.3;
    std::string censoring_mode = "covariate";
    synth->add_option("--n", synth_config.n_samples, "Rows to generate");
    synth->add_option("--events", synth_config.n_events, "Number of competing events");
    synth->add_option("--n-features", synth_config.n_features, "Covariate count");
    synth->add_option("--censoring", censoring_mode,
                      "independent or covariate (-dependent censoring)");
    synth->add_option("--rate", synth_config.target_censoring_rate,
                      "Target censoring fraction");
    synth->add_option("--out", synth_out, "Output CSV path")->capture_default_str();
    synth->add_option("--oracle-out", synth_oracle_out,
                      "Sidecar with the generating distributions");
    synth->add_option("--test-out", synth_test_out,
                      "Also write a held-out split to this CSV");
    synth->add_option("--test-fraction", synth_test_fraction,
                      "Held-out fraction for --test-out")
        ->capture_default_str();

    // train
    auto* train_cmd = app.add_subcommand("train", "Fit a model on a CSV dataset");
    SchemaFlags train_schema;
    TrainFlags train_flags;
    std::string train_data, train_out = "model.json", train_log;
    int search = 0;
    train_schema.attach(train_cmd);
    train_flags.attach(train_cmd);
    train_cmd->add_option("--data", train_data, "Training CSV")->required();
    train_cmd->add_option("--out", train_out, "Model file path")
        ->capture_default_str();
    train_cmd->add_option("--log", train_log, "Per-round training log CSV");
    train_cmd->add_option("--search", search,
                          "Print N hyperparameter draws from the search ranges "
                          "and exit (no search is run)");

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "Predict CIFs on a dataset");
    SchemaFlags predict_schema;
    std::string predict_model, predict_data, predict_times,
        predict_out = "predictions.csv";
    std::size_t predict_grid = 50;
    bool isotonic = false;
    predict_schema.attach(predict_cmd);
    predict_cmd->add_option("--model", predict_model, "Model file")->required();
    predict_cmd->add_option("--data", predict_data, "Dataset CSV")->required();
    predict_cmd->add_option("--times", predict_times,
                            "Comma-separated horizons (default: a uniform grid)");
    predict_cmd->add_option("--grid", predict_grid, "Horizons when --times absent");
    predict_cmd->add_flag("--isotonic", isotonic,
                          "Clamp per-event curves to be nondecreasing in time");
    predict_cmd->add_option("--out", predict_out, "Output CSV")
        ->capture_default_str();

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "Score a model on a test CSV");
    SchemaFlags eval_schema;
    std::string eval_model, eval_data, eval_metrics = "ibs,acc,scls";
    std::string eval_quantiles = "0.125,0.25,0.375,0.5,0.625,0.75";
    std::string eval_oracle, eval_out, eval_brier_csv, eval_report_csv;
    std::size_t eval_grid = 100;
    eval_schema.attach(eval_cmd);
    eval_cmd->add_option("--model", eval_model, "Model file")->required();
    eval_cmd->add_option("--data", eval_data, "Test CSV")->required();
    eval_cmd->add_option("--metrics", eval_metrics,
                         "Subset of ibs,acc,scls,cindex")
        ->capture_default_str();
    eval_cmd->add_option("--grid-size", eval_grid, "IBS grid points");
    eval_cmd->add_option("--quantiles", eval_quantiles,
                         "Event-time quantiles for acc/cindex horizons");
    eval_cmd->add_option("--oracle", eval_oracle,
                         "Oracle sidecar: weight metrics by the true censoring "
                         "distribution instead of test-split Kaplan-Meier");
    eval_cmd->add_option("--out", eval_out, "Report text file");
    eval_cmd->add_option("--brier-csv", eval_brier_csv,
                         "Per-horizon Brier scores for plotting");
    eval_cmd->add_option("--report-csv", eval_report_csv, "Flat metric CSV");

    // benchmark
    auto* bench_cmd =
        app.add_subcommand("benchmark", "Compare against marginal baselines");
    SchemaFlags bench_schema;
    TrainFlags bench_train;
    sb::SynthConfig bench_synth;
    std::string bench_data, bench_models, bench_out, bench_save_dir,
        bench_curves_dir;
    std::string bench_censoring = "covariate";
    bool use_synth = false, bench_oracle_ibs = false;
    double bench_test_fraction = 0.3;
    bench_schema.attach(bench_cmd);
    bench_train.attach(bench_cmd);
    bench_cmd->add_option("--data", bench_data, "Dataset CSV (or use --synth)");
    bench_cmd->add_flag("--synth", use_synth, "Generate the benchmark dataset");
    bench_cmd->add_option("--n", bench_synth.n_samples, "Synth rows");
    bench_cmd->add_option("--events", bench_synth.n_events, "Synth event count");
    bench_cmd->add_option("--n-features", bench_synth.n_features, "Synth covariates");
    bench_cmd->add_option("--censoring", bench_censoring,
                          "Synth censoring: independent or covariate");
    bench_cmd->add_option("--rate", bench_synth.target_censoring_rate,
                          "Synth censoring rate");
    bench_cmd->add_option("--test-fraction", bench_test_fraction,
                          "Held-out fraction")
        ->capture_default_str();
    bench_cmd->add_option("--models", bench_models,
                          "Comma subset of survboost,aj,km");
    bench_cmd->add_flag("--oracle-ibs", bench_oracle_ibs,
                        "Weight the IBS by the true censoring distribution "
                        "(synth only)");
    bench_cmd->add_option("--out", bench_out, "Comparison table CSV");
    bench_cmd->add_option("--save-models", bench_save_dir,
                          "Directory for fitted model files");
    bench_cmd->add_option("--export-curves", bench_curves_dir,
                          "Directory for baseline curve CSVs");

    CLI11_PARSE(app, argc, argv);
    sb::threads::set_count(n_threads);

    try {
        if (*synth) {
            synth_config.seed = seed;
            synth_config.censoring = censoring_mode.rfind("ind", 0) == 0
                                         ? sb::CensoringMode::independent
                                         : sb::CensoringMode::covariate_dependent;
            return run_synth(synth_config, synth_out, synth_oracle_out,
                             synth_test_out, synth_test_fraction, seed);
        }
        if (*train_cmd)
            return run_train(train_data, train_schema, train_flags, seed, train_out,
                             train_log, search);
        if (*predict_cmd)
            return run_predict(predict_model, predict_data, predict_schema,
                               predict_times, predict_grid, isotonic, predict_out);
        if (*eval_cmd)
            return run_evaluate(eval_model, eval_data, eval_schema, eval_metrics,
                                eval_grid, eval_quantiles, eval_oracle, eval_out,
                                eval_brier_csv, eval_report_csv);
        if (*bench_cmd) {
            bench_synth.seed = seed;
            bench_synth.censoring = bench_censoring.rfind("ind", 0) == 0
                                        ? sb::CensoringMode::independent
                                        : sb::CensoringMode::covariate_dependent;
            return run_benchmark(bench_data, bench_schema, bench_synth, use_synth,
                                 bench_train, seed, bench_test_fraction,
                                 bench_models, bench_oracle_ibs, bench_out,
                                 bench_save_dir, bench_curves_dir);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
