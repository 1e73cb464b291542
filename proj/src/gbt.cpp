#include "survboost/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace survboost {

void GbtConfig::validate() const {
    if (!(learning_rate >= 0.0 && learning_rate <= 1.0))
        throw ValidationError("learning_rate must be in [0, 1]");
    if (n_rounds < 0) throw ValidationError("n_rounds must be >= 0");
    if (max_depth < 1) throw ValidationError("max_depth must be >= 1");
    if (max_bins < 2 || max_bins > 255)
        throw ValidationError("max_bins must be in [2, 255]");
    if (min_child_weight < 0.0)
        throw ValidationError("min_child_weight must be >= 0");
    if (min_samples_leaf < 1)
        throw ValidationError("min_samples_leaf must be >= 1");
    if (l2_regularization < 0.0)
        throw ValidationError("l2_regularization must be >= 0");
}

// ---------------------------------------------------------------------------
// Binning
// ---------------------------------------------------------------------------

std::uint8_t BinMapper::bin_value(std::size_t f, double v) const {
    if (std::isnan(v)) return std::uint8_t(missing_bin(f));
    const auto& e = edges[f];
    const auto it = std::lower_bound(e.begin(), e.end(), v);
    return std::uint8_t(it - e.begin());
}

BinMapper fit_bin_mapper(const Matrix& features, int max_bins) {
    if (max_bins < 2 || max_bins > 255)
        throw ValidationError("max_bins must be in [2, 255]");
    BinMapper mapper;
    mapper.edges.resize(features.cols);

    std::vector<double> col;
    for (std::size_t f = 0; f < features.cols; ++f) {
        col.clear();
        for (std::size_t i = 0; i < features.rows; ++i) {
            const double v = features.at(i, f);
            if (!std::isnan(v)) col.push_back(v);
        }
        std::sort(col.begin(), col.end());
        auto& edges = mapper.edges[f];
        if (col.size() < 2) continue;  // constant or all-missing: single bin

        std::vector<double> distinct;
        distinct.push_back(col.front());
        for (double v : col)
            if (v != distinct.back()) distinct.push_back(v);

        if (int(distinct.size()) <= max_bins) {
            for (std::size_t j = 0; j + 1 < distinct.size(); ++j)
                edges.push_back(0.5 * (distinct[j] + distinct[j + 1]));
        } else {
            // Quantile cuts, midpoint between the flanking order statistics.
            for (int b = 1; b < max_bins; ++b) {
                const std::size_t pos = std::size_t(
                    double(b) * double(col.size()) / double(max_bins));
                if (pos == 0 || pos >= col.size()) continue;
                const double edge = 0.5 * (col[pos - 1] + col[pos]);
                if (edges.empty() || edge > edges.back()) edges.push_back(edge);
            }
        }
    }
    return mapper;
}

BinnedMatrix apply_bins(const Matrix& features, const BinMapper& mapper) {
    if (features.cols != mapper.n_features())
        throw ValidationError("apply_bins: feature count mismatch");
    BinnedMatrix binned(features.rows, features.cols);
    parallel_for(features.cols, [&](std::size_t f0, std::size_t f1) {
        for (std::size_t f = f0; f < f1; ++f) {
            std::uint8_t* out = binned.column(f);
            for (std::size_t i = 0; i < features.rows; ++i)
                out[i] = mapper.bin_value(f, features.at(i, f));
        }
    });
    return binned;
}

std::pair<BinnedMatrix, BinMapper> bin_features(const Matrix& features, int max_bins) {
    BinMapper mapper = fit_bin_mapper(features, max_bins);
    BinnedMatrix binned = apply_bins(features, mapper);
    return {std::move(binned), std::move(mapper)};
}

// ---------------------------------------------------------------------------
// Tree prediction
// ---------------------------------------------------------------------------

double Tree::predict_row(std::span<const double> x) const {
    int node = 0;
    while (!nodes[std::size_t(node)].is_leaf()) {
        const TreeNode& nd = nodes[std::size_t(node)];
        const double v = x[std::size_t(nd.feature)];
        bool go_left;
        if (std::isnan(v)) {
            go_left = nd.missing_left;
        } else {
            go_left = v <= nd.threshold;
        }
        node = go_left ? nd.left : nd.right;
    }
    return nodes[std::size_t(node)].value;
}

double Tree::predict_binned(const BinnedMatrix& binned, std::size_t row) const {
    int node = 0;
    while (!nodes[std::size_t(node)].is_leaf()) {
        const TreeNode& nd = nodes[std::size_t(node)];
        const std::uint8_t b = binned.at(row, std::size_t(nd.feature));
        const bool go_left =
            b == nd.missing_bin ? nd.missing_left : b <= nd.split_bin;
        node = go_left ? nd.left : nd.right;
    }
    return nodes[std::size_t(node)].value;
}

// ---------------------------------------------------------------------------
// Tree growth
// ---------------------------------------------------------------------------

namespace {

struct HistBin {
    double grad = 0.0;
    double hess = 0.0;
    std::size_t count = 0;
};

struct SplitCandidate {
    bool valid = false;
    int feature = -1;
    int bin = 0;
    bool missing_left = false;
    double gain = 0.0;
    double grad_left = 0.0, hess_left = 0.0;
    double grad_right = 0.0, hess_right = 0.0;
    std::size_t count_left = 0, count_right = 0;
};

struct GrowNode {
    int node_id = 0;
    std::size_t begin = 0, end = 0;  // range in the row index buffer
    double sum_grad = 0.0, sum_hess = 0.0;
    int depth = 0;
};

double leaf_score(double g, double h, double l2) {
    const double denom = h + l2;
    return denom > 0.0 ? g * g / denom : 0.0;
}

double leaf_value(double g, double h, double l2) {
    const double denom = h + l2;
    return denom > 1e-12 ? -g / denom : 0.0;
}

/// Scans every (bin, missing placement) of one feature; candidates are
/// compared with strict > so the earliest candidate wins ties, giving the
/// documented lowest-feature lowest-bin ordering.
SplitCandidate best_split_for_feature(int feature, const std::vector<HistBin>& hist,
                                      int finite_bins, double sum_grad,
                                      double sum_hess, std::size_t node_count,
                                      const GbtConfig& cfg) {
    SplitCandidate best;
    best.feature = feature;

    const HistBin& miss = hist[std::size_t(finite_bins)];
    const bool has_missing = miss.count > 0;
    const double parent = leaf_score(sum_grad, sum_hess, cfg.l2_regularization);

    double gl = 0.0, hl = 0.0;
    std::size_t cl = 0;
    for (int b = 0; b + 1 < finite_bins; ++b) {
        gl += hist[std::size_t(b)].grad;
        hl += hist[std::size_t(b)].hess;
        cl += hist[std::size_t(b)].count;
        for (int ml = 1; ml >= 0; --ml) {
            if (!has_missing && ml == 0) continue;  // both placements identical
            const double g_left = gl + (ml ? miss.grad : 0.0);
            const double h_left = hl + (ml ? miss.hess : 0.0);
            const std::size_t c_left = cl + (ml ? miss.count : 0);
            const double g_right = sum_grad - g_left;
            const double h_right = sum_hess - h_left;
            const std::size_t c_right = node_count - c_left;
            if (h_left < cfg.min_child_weight || h_right < cfg.min_child_weight)
                continue;
            if (c_left < std::size_t(cfg.min_samples_leaf) ||
                c_right < std::size_t(cfg.min_samples_leaf))
                continue;
            const double gain = leaf_score(g_left, h_left, cfg.l2_regularization) +
                                leaf_score(g_right, h_right, cfg.l2_regularization) -
                                parent;
            if (gain <= 0.0) continue;
            if (!best.valid || gain > best.gain) {
                best.valid = true;
                best.bin = b;
                best.missing_left = ml != 0;
                best.gain = gain;
                best.grad_left = g_left;
                best.hess_left = h_left;
                best.grad_right = g_right;
                best.hess_right = h_right;
                best.count_left = c_left;
                best.count_right = c_right;
            }
        }
    }
    return best;
}

}  // namespace

Tree grow_tree(const BinnedMatrix& binned, const BinMapper& mapper,
               std::span<const double> grad, std::span<const double> hess,
               const GbtConfig& config) {
    config.validate();
    const std::size_t n = binned.rows;
    if (grad.size() != n || hess.size() != n)
        throw ValidationError("grow_tree: gradient length mismatch");

    Tree tree;
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);

    double total_grad = 0.0, total_hess = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        total_grad += grad[i];
        total_hess += hess[i];
    }

    tree.nodes.push_back(TreeNode{});
    tree.nodes[0].value = leaf_value(total_grad, total_hess, config.l2_regularization);

    std::vector<GrowNode> frontier;
    frontier.push_back({0, 0, n, total_grad, total_hess, 0});

    const std::size_t n_features = binned.cols;
    std::vector<std::vector<HistBin>> hists(n_features);

    std::vector<std::size_t> scratch;
    while (!frontier.empty()) {
        std::vector<GrowNode> next;
        for (const GrowNode& gn : frontier) {
            if (gn.depth >= config.max_depth) continue;
            if (gn.end - gn.begin < 2) continue;

            // Histograms per feature; each feature is filled sequentially in
            // row order so results do not depend on the thread count.
            parallel_for(n_features, [&](std::size_t f0, std::size_t f1) {
                for (std::size_t f = f0; f < f1; ++f) {
                    auto& h = hists[f];
                    h.assign(std::size_t(mapper.finite_bins(f)) + 1, HistBin{});
                    const std::uint8_t* col = binned.column(f);
                    for (std::size_t r = gn.begin; r < gn.end; ++r) {
                        const std::size_t row = rows[r];
                        h[col[row]].grad += grad[row];
                        h[col[row]].hess += hess[row];
                        h[col[row]].count += 1;
                    }
                }
            });

            SplitCandidate best;
            for (std::size_t f = 0; f < n_features; ++f) {
                SplitCandidate cand = best_split_for_feature(
                    int(f), hists[f], mapper.finite_bins(f), gn.sum_grad,
                    gn.sum_hess, gn.end - gn.begin, config);
                if (cand.valid && (!best.valid || cand.gain > best.gain))
                    best = cand;
            }
            if (!best.valid) continue;

            // Stable partition keeps row order inside children deterministic.
            scratch.clear();
            const std::uint8_t* col = binned.column(std::size_t(best.feature));
            const std::uint8_t miss_bin =
                std::uint8_t(mapper.missing_bin(std::size_t(best.feature)));
            std::size_t write = gn.begin;
            for (std::size_t r = gn.begin; r < gn.end; ++r) {
                const std::size_t row = rows[r];
                const std::uint8_t b = col[row];
                const bool left = b == miss_bin ? best.missing_left
                                                : b <= std::uint8_t(best.bin);
                if (left)
                    rows[write++] = row;
                else
                    scratch.push_back(row);
            }
            std::copy(scratch.begin(), scratch.end(), rows.begin() + std::ptrdiff_t(write));
            const std::size_t mid = write;

            const int left_id = int(tree.nodes.size());
            const int right_id = left_id + 1;
            TreeNode left_leaf, right_leaf;
            left_leaf.value =
                leaf_value(best.grad_left, best.hess_left, config.l2_regularization);
            right_leaf.value =
                leaf_value(best.grad_right, best.hess_right, config.l2_regularization);
            tree.nodes.push_back(left_leaf);
            tree.nodes.push_back(right_leaf);

            TreeNode& parent = tree.nodes[std::size_t(gn.node_id)];
            parent.feature = best.feature;
            parent.split_bin = std::uint16_t(best.bin);
            parent.missing_bin =
                std::uint16_t(mapper.missing_bin(std::size_t(best.feature)));
            parent.threshold = mapper.edges[std::size_t(best.feature)][std::size_t(best.bin)];
            parent.missing_left = best.missing_left;
            parent.left = left_id;
            parent.right = right_id;

            next.push_back({left_id, gn.begin, mid, best.grad_left, best.hess_left,
                            gn.depth + 1});
            next.push_back({right_id, mid, gn.end, best.grad_right, best.hess_right,
                            gn.depth + 1});
        }
        frontier = std::move(next);
    }
    return tree;
}

// ---------------------------------------------------------------------------
// Ensemble
// ---------------------------------------------------------------------------

void softmax_inplace(std::span<double> scores) {
    double m = scores[0];
    for (double s : scores) m = std::max(m, s);
    double sum = 0.0;
    for (double& s : scores) {
        s = std::exp(s - m);
        sum += s;
    }
    for (double& s : scores) s /= sum;
}

void Ensemble::predict_raw_binned(const BinnedMatrix& binned, Matrix& raw) const {
    raw = Matrix(binned.rows, std::size_t(n_classes));
    parallel_for(binned.rows, [&](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) {
            auto out = raw.row(i);
            for (int c = 0; c < n_classes; ++c) out[std::size_t(c)] = base_scores[std::size_t(c)];
            for (const auto& stage : stages)
                for (int c = 0; c < n_classes; ++c)
                    out[std::size_t(c)] +=
                        learning_rate * stage[std::size_t(c)].predict_binned(binned, i);
        }
    });
}

void Ensemble::predict_raw(const Matrix& features, Matrix& raw) const {
    if (features.cols != mapper.n_features())
        throw ValidationError("predict: expected " +
                              std::to_string(mapper.n_features()) + " features, got " +
                              std::to_string(features.cols));
    raw = Matrix(features.rows, std::size_t(n_classes));
    parallel_for(features.rows, [&](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) {
            auto out = raw.row(i);
            const auto x = features.row(i);
            for (int c = 0; c < n_classes; ++c) out[std::size_t(c)] = base_scores[std::size_t(c)];
            for (const auto& stage : stages)
                for (int c = 0; c < n_classes; ++c)
                    out[std::size_t(c)] += learning_rate * stage[std::size_t(c)].predict_row(x);
        }
    });
}

void Ensemble::predict_proba(const Matrix& features, Matrix& proba) const {
    predict_raw(features, proba);
    for (std::size_t i = 0; i < proba.rows; ++i) softmax_inplace(proba.row(i));
}

void Ensemble::predict_proba_row(std::span<const double> x, std::span<double> out) const {
    if (x.size() != mapper.n_features())
        throw ValidationError("predict: feature dimension mismatch");
    for (int c = 0; c < n_classes; ++c) out[std::size_t(c)] = base_scores[std::size_t(c)];
    for (const auto& stage : stages)
        for (int c = 0; c < n_classes; ++c)
            out[std::size_t(c)] += learning_rate * stage[std::size_t(c)].predict_row(x);
    softmax_inplace(out);
}

void init_base_scores(Ensemble& ens, std::span<const int> y, std::span<const double> w) {
    std::vector<double> freq(std::size_t(ens.n_classes), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        freq[std::size_t(y[i])] += w[i];
        total += w[i];
    }
    ens.base_scores.resize(std::size_t(ens.n_classes));
    for (int c = 0; c < ens.n_classes; ++c) {
        const double p = total > 0.0 ? freq[std::size_t(c)] / total : 1.0 / ens.n_classes;
        ens.base_scores[std::size_t(c)] = std::log(std::max(p, 1e-15));
    }
}

void softmax_grad_hess(const Matrix& raw, std::span<const int> y,
                       std::span<const double> w, Matrix& grad, Matrix& hess) {
    const std::size_t n = raw.rows;
    const std::size_t n_classes = raw.cols;
    if (y.size() != n || w.size() != n)
        throw ValidationError("softmax_grad_hess: shape mismatch");
    grad = Matrix(n, n_classes);
    hess = Matrix(n, n_classes);
    std::vector<double> p(n_classes);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = raw.row(i);
        std::copy(r.begin(), r.end(), p.begin());
        softmax_inplace(p);
        const double wi = w[i];
        for (std::size_t c = 0; c < n_classes; ++c) {
            const double ind = std::size_t(y[i]) == c ? 1.0 : 0.0;
            grad.at(i, c) = wi * (p[c] - ind);
            hess.at(i, c) = wi * p[c] * (1.0 - p[c]);
        }
    }
}

double weighted_nll(const Matrix& raw, std::span<const int> y, std::span<const double> w) {
    double loss = 0.0, total = 0.0;
    std::vector<double> p(raw.cols);
    for (std::size_t i = 0; i < raw.rows; ++i) {
        if (w[i] == 0.0) continue;
        const auto r = raw.row(i);
        std::copy(r.begin(), r.end(), p.begin());
        softmax_inplace(p);
        const double prob = std::clamp(p[std::size_t(y[i])], 1e-15, 1.0 - 1e-15);
        loss -= w[i] * std::log(prob);
        total += w[i];
    }
    return total > 0.0 ? loss / total : 0.0;
}

void boost_round(Ensemble& ens, const BinnedMatrix& binned, std::span<const int> y,
                 std::span<const double> w, Matrix& raw, const GbtConfig& config) {
    if (raw.rows != binned.rows || raw.cols != std::size_t(ens.n_classes))
        throw ValidationError("boost_round: raw score shape mismatch");
    Matrix grad, hess;
    softmax_grad_hess(raw, y, w, grad, hess);

    std::vector<double> g_col(binned.rows), h_col(binned.rows);
    std::vector<Tree> stage;
    stage.reserve(std::size_t(ens.n_classes));
    for (int c = 0; c < ens.n_classes; ++c) {
        for (std::size_t i = 0; i < binned.rows; ++i) {
            g_col[i] = grad.at(i, std::size_t(c));
            h_col[i] = hess.at(i, std::size_t(c));
        }
        stage.push_back(grow_tree(binned, ens.mapper, g_col, h_col, config));
    }
    // Update cached raw scores with the new stage.
    parallel_for(binned.rows, [&](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i)
            for (int c = 0; c < ens.n_classes; ++c)
                raw.at(i, std::size_t(c)) +=
                    ens.learning_rate * stage[std::size_t(c)].predict_binned(binned, i);
    });
    ens.stages.push_back(std::move(stage));
}

Ensemble fit_gbt(const Matrix& features, std::span<const int> y,
                 std::span<const double> w, int n_classes, const GbtConfig& config) {
    config.validate();
    if (n_classes < 2) throw ValidationError("fit_gbt: n_classes must be >= 2");

    Ensemble ens;
    ens.n_classes = n_classes;
    ens.learning_rate = config.learning_rate;
    auto [binned, mapper] = bin_features(features, config.max_bins);
    ens.mapper = std::move(mapper);
    init_base_scores(ens, y, w);

    Matrix raw;
    ens.predict_raw_binned(binned, raw);
    for (int m = 0; m < config.n_rounds; ++m)
        boost_round(ens, binned, y, w, raw, config);
    return ens;
}

}  // namespace survboost
