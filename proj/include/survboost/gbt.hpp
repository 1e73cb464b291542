#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "survboost/common.hpp"

namespace survboost {

struct GbtConfig {
    double learning_rate = 0.1;
    int n_rounds = 100;
    int max_depth = 3;
    int max_bins = 255;
    // Minimum summed hessian per leaf. Inverse-censoring weights reach 1/eps,
    // so leaves need real hessian mass behind them or Newton steps overshoot;
    // 5.0 is roughly a 20-row floor at typical weights.
    double min_child_weight = 5.0;
    // Raw row-count floor per leaf. The hessian floor alone can be met by a
    // single near-cap-weight row, which lets leaves chase individual
    // reweighted observations in sparse time regions.
    int min_samples_leaf = 20;
    double l2_regularization = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

// ---------------------------------------------------------------------------
// Histogram binning
// ---------------------------------------------------------------------------

/// Per-feature quantile cut points. Bin b holds values in (edge[b-1], edge[b]];
/// values above the last edge fall in the last finite bin and NaN gets the
/// dedicated missing bin (index finite_bins).
struct BinMapper {
    std::vector<std::vector<double>> edges;

    std::size_t n_features() const { return edges.size(); }
    int finite_bins(std::size_t f) const { return int(edges[f].size()) + 1; }
    int missing_bin(std::size_t f) const { return finite_bins(f); }
    std::uint8_t bin_value(std::size_t f, double v) const;
};

/// Column-major matrix of bin indices.
struct BinnedMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> data;

    BinnedMatrix() = default;
    BinnedMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0) {}

    std::uint8_t at(std::size_t i, std::size_t f) const { return data[f * rows + i]; }
    std::uint8_t* column(std::size_t f) { return data.data() + f * rows; }
    const std::uint8_t* column(std::size_t f) const { return data.data() + f * rows; }
};

BinMapper fit_bin_mapper(const Matrix& features, int max_bins);
BinnedMatrix apply_bins(const Matrix& features, const BinMapper& mapper);
std::pair<BinnedMatrix, BinMapper> bin_features(const Matrix& features, int max_bins);

// ---------------------------------------------------------------------------
// Trees
// ---------------------------------------------------------------------------

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    int left = -1;
    int right = -1;
    std::uint16_t split_bin = 0;    // binned row goes left iff bin <= split_bin
    std::uint16_t missing_bin = 0;  // this feature's dedicated missing bin
    double threshold = 0.0;         // raw row goes left iff x <= threshold
    bool missing_left = false;
    double value = 0.0;  // leaf output (unscaled; learning rate applied on top)

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;

    double predict_row(std::span<const double> x) const;
    double predict_binned(const BinnedMatrix& binned, std::size_t row) const;
};

/// Greedy depth-wise growth on histogram statistics. Gain of a split is
/// GL^2/(HL+l2) + GR^2/(HR+l2) - G^2/(H+l2); non-positive-gain splits and
/// children below min_child_weight are rejected; leaf value is -G/(H+l2).
/// Equal gains break toward the lowest feature index, then the lowest bin.
Tree grow_tree(const BinnedMatrix& binned, const BinMapper& mapper,
               std::span<const double> grad, std::span<const double> hess,
               const GbtConfig& config);

// ---------------------------------------------------------------------------
// Multiclass ensemble
// ---------------------------------------------------------------------------

/// Staged additive model: raw score of class c is
/// base_scores[c] + learning_rate * sum over stages of tree_{m,c}(x),
/// mapped to probabilities by softmax.
struct Ensemble {
    int n_classes = 0;
    double learning_rate = 0.1;
    std::vector<double> base_scores;
    BinMapper mapper;
    std::vector<std::vector<Tree>> stages;  // [round][class]

    std::size_t n_stages() const { return stages.size(); }

    void predict_raw(const Matrix& features, Matrix& raw) const;
    void predict_raw_binned(const BinnedMatrix& binned, Matrix& raw) const;
    void predict_proba(const Matrix& features, Matrix& proba) const;
    void predict_proba_row(std::span<const double> x, std::span<double> out) const;
};

/// Stabilized in-place softmax.
void softmax_inplace(std::span<double> scores);

/// base_scores = log of weighted class frequencies, so that
/// softmax(base_scores) reproduces the frequencies.
void init_base_scores(Ensemble& ens, std::span<const int> y, std::span<const double> w);

/// Gradients and diagonal hessians of the weighted multiclass log loss:
/// grad = w (p - 1{y=c}), hess = w p (1 - p) with p = softmax(raw).
void softmax_grad_hess(const Matrix& raw, std::span<const int> y,
                       std::span<const double> w, Matrix& grad, Matrix& hess);

/// Mean weighted negative log likelihood (normalized by total weight).
double weighted_nll(const Matrix& raw, std::span<const int> y, std::span<const double> w);

/// Appends one stage (n_classes trees) fitted to the current residuals and
/// updates the cached raw scores in place.
void boost_round(Ensemble& ens, const BinnedMatrix& binned, std::span<const int> y,
                 std::span<const double> w, Matrix& raw, const GbtConfig& config);

/// Fixed-target fit: binning, base scores, then config.n_rounds boost rounds.
Ensemble fit_gbt(const Matrix& features, std::span<const int> y,
                 std::span<const double> w, int n_classes, const GbtConfig& config);

}  // namespace survboost
