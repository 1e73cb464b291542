#include <fstream>

#include "json.hpp"
#include "survboost/survival_boost.hpp"

namespace survboost {

namespace {

using Json = nlohmann::ordered_json;

constexpr int kFormatVersion = 1;
constexpr const char* kFormatName = "survboost-model";

Json tree_to_json(const Tree& tree) {
    // One flat array per field keeps the file compact and the order fixed.
    Json j;
    Json feature = Json::array(), left = Json::array(), right = Json::array();
    Json split_bin = Json::array(), missing_bin = Json::array();
    Json threshold = Json::array(), missing_left = Json::array(), value = Json::array();
    for (const TreeNode& nd : tree.nodes) {
        feature.push_back(nd.feature);
        left.push_back(nd.left);
        right.push_back(nd.right);
        split_bin.push_back(nd.split_bin);
        missing_bin.push_back(nd.missing_bin);
        threshold.push_back(nd.threshold);
        missing_left.push_back(int(nd.missing_left));
        value.push_back(nd.value);
    }
    j["feature"] = std::move(feature);
    j["left"] = std::move(left);
    j["right"] = std::move(right);
    j["split_bin"] = std::move(split_bin);
    j["missing_bin"] = std::move(missing_bin);
    j["threshold"] = std::move(threshold);
    j["missing_left"] = std::move(missing_left);
    j["value"] = std::move(value);
    return j;
}

Tree tree_from_json(const Json& j) {
    Tree tree;
    const auto& feature = j.at("feature");
    const std::size_t n = feature.size();
    tree.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        TreeNode& nd = tree.nodes[i];
        nd.feature = j.at("feature")[i].get<int>();
        nd.left = j.at("left")[i].get<int>();
        nd.right = j.at("right")[i].get<int>();
        nd.split_bin = j.at("split_bin")[i].get<std::uint16_t>();
        nd.missing_bin = j.at("missing_bin")[i].get<std::uint16_t>();
        nd.threshold = j.at("threshold")[i].get<double>();
        nd.missing_left = j.at("missing_left")[i].get<int>() != 0;
        nd.value = j.at("value")[i].get<double>();
    }
    return tree;
}

Json ensemble_to_json(const Ensemble& ens) {
    Json j;
    j["n_classes"] = ens.n_classes;
    j["learning_rate"] = ens.learning_rate;
    j["base_scores"] = ens.base_scores;
    j["bin_edges"] = ens.mapper.edges;
    Json stages = Json::array();
    for (const auto& stage : ens.stages) {
        Json trees = Json::array();
        for (const Tree& t : stage) trees.push_back(tree_to_json(t));
        stages.push_back(std::move(trees));
    }
    j["stages"] = std::move(stages);
    return j;
}

Ensemble ensemble_from_json(const Json& j) {
    Ensemble ens;
    ens.n_classes = j.at("n_classes").get<int>();
    ens.learning_rate = j.at("learning_rate").get<double>();
    ens.base_scores = j.at("base_scores").get<std::vector<double>>();
    ens.mapper.edges = j.at("bin_edges").get<std::vector<std::vector<double>>>();
    for (const auto& stage : j.at("stages")) {
        std::vector<Tree> trees;
        for (const auto& t : stage) trees.push_back(tree_from_json(t));
        ens.stages.push_back(std::move(trees));
    }
    return ens;
}

Json step_function_to_json(const StepFunction& f) {
    Json j;
    j["knots"] = f.knots();
    j["values"] = f.values();
    j["value_at_0"] = f.value_at_0();
    return j;
}

StepFunction step_function_from_json(const Json& j) {
    return StepFunction(j.at("knots").get<std::vector<double>>(),
                        j.at("values").get<std::vector<double>>(),
                        j.at("value_at_0").get<double>());
}

Json parse_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("'" + path + "' is not a valid model file: " + e.what());
    }
    if (!j.contains("format") || j.at("format") != kFormatName)
        throw ParseError("'" + path + "' is not a " + std::string(kFormatName) +
                         " file");
    const int version = j.at("version").get<int>();
    if (version != kFormatVersion)
        throw VersionError("model file version " + std::to_string(version) +
                           " not supported; this build reads version " +
                           std::to_string(kFormatVersion));
    return j;
}

}  // namespace

void save_model(const SurvivalModel& model, const std::string& path) {
    Json j;
    j["format"] = kFormatName;
    j["version"] = kFormatVersion;
    j["kind"] = "survival_boost";
    j["k_events"] = model.k_events;
    j["t_max"] = model.t_max;
    Json cfg;
    cfg["n_horizons_per_row"] = model.config.n_horizons_per_row;
    cfg["feedback_period"] = model.config.feedback_period;
    cfg["ipcw_clip"] = model.config.ipcw_clip;
    cfg["seed"] = model.config.seed;
    cfg["max_depth"] = model.config.gbt.max_depth;
    cfg["min_child_weight"] = model.config.gbt.min_child_weight;
    cfg["min_samples_leaf"] = model.config.gbt.min_samples_leaf;
    cfg["l2_regularization"] = model.config.gbt.l2_regularization;
    j["config"] = std::move(cfg);
    Json features = Json::array();
    for (const FeatureInfo& fi : model.feature_info) {
        Json f;
        f["name"] = fi.name;
        f["categorical"] = fi.categorical;
        f["categories"] = fi.categories;
        features.push_back(std::move(f));
    }
    j["features"] = std::move(features);
    j["km_censoring"] = step_function_to_json(model.km_censoring);
    j["event_model"] = ensemble_to_json(model.event_model);
    j["censoring_model"] = ensemble_to_json(model.censoring_model);

    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << j.dump() << '\n';
    if (!out) throw Error("write to '" + path + "' failed");
}

SurvivalModel load_model(const std::string& path) {
    const Json j = parse_model_file(path);
    const std::string kind = j.at("kind").get<std::string>();
    if (kind != "survival_boost")
        throw Error("'" + path + "' holds a '" + kind +
                    "' model, expected 'survival_boost'");

    SurvivalModel model;
    model.k_events = j.at("k_events").get<int>();
    model.t_max = j.at("t_max").get<double>();
    const auto& cfg = j.at("config");
    model.config.n_horizons_per_row = cfg.at("n_horizons_per_row").get<int>();
    model.config.feedback_period = cfg.at("feedback_period").get<int>();
    model.config.ipcw_clip = cfg.at("ipcw_clip").get<double>();
    model.config.seed = cfg.at("seed").get<std::uint64_t>();
    model.config.gbt.max_depth = cfg.at("max_depth").get<int>();
    model.config.gbt.min_child_weight = cfg.at("min_child_weight").get<double>();
    model.config.gbt.min_samples_leaf = cfg.at("min_samples_leaf").get<int>();
    model.config.gbt.l2_regularization = cfg.at("l2_regularization").get<double>();
    for (const auto& f : j.at("features")) {
        FeatureInfo fi;
        fi.name = f.at("name").get<std::string>();
        fi.categorical = f.at("categorical").get<bool>();
        fi.categories = f.at("categories").get<std::vector<std::string>>();
        model.feature_info.push_back(std::move(fi));
    }
    model.km_censoring = step_function_from_json(j.at("km_censoring"));
    model.event_model = ensemble_from_json(j.at("event_model"));
    model.censoring_model = ensemble_from_json(j.at("censoring_model"));
    model.config.gbt.learning_rate = model.event_model.learning_rate;
    model.config.censoring_gbt.learning_rate = model.censoring_model.learning_rate;
    return model;
}

void save_aalen_johansen(const std::vector<StepFunction>& cifs,
                         const StepFunction& km_survival, const std::string& path) {
    Json j;
    j["format"] = kFormatName;
    j["version"] = kFormatVersion;
    j["kind"] = "aalen_johansen";
    j["k_events"] = cifs.size();
    Json curves = Json::array();
    for (const StepFunction& f : cifs) curves.push_back(step_function_to_json(f));
    j["cifs"] = std::move(curves);
    j["km_survival"] = step_function_to_json(km_survival);
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << j.dump() << '\n';
}

}  // namespace survboost
