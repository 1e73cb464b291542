#pragma once

#include <span>
#include <string>
#include <vector>

#include "survboost/cif_matrix.hpp"
#include "survboost/dataset.hpp"
#include "survboost/ipcw.hpp"

namespace survboost {

struct MetricReport {
    std::string name;
    double value = 0.0;
    std::vector<double> per_event;  // empty when the metric has no breakdown
    TimeGrid grid;
    std::size_t n_effective = 0;
    std::size_t clamped_increments = 0;  // warning counter (s_cen_log_simple)
};

/// Censoring-adjusted Brier score for event k at horizon zeta:
/// rows with the event by zeta contribute (1 - F_k)^2 / G(t-|x), rows past
/// zeta contribute F_k^2 / G(zeta|x), rows hit by another event by zeta
/// contribute F_k^2 / G(t-|x), censored-before-zeta rows contribute 0; the
/// sum is averaged over all n rows. Censoring probabilities are clipped
/// below at eps: the raw 1/G weights have unbounded variance at tail event
/// times, which can rank even the true distribution behind a marginal one.
double brier_score_event(std::span<const double> pred_k, const Dataset& data,
                         double zeta, const CensoringEstimator& g, int k,
                         double eps = 0.02);

/// Per event, the trapezoidal average of the Brier score over the prediction
/// grid normalized by the grid span; value is the mean across events.
MetricReport integrated_brier_score(const CifMatrix& cif, const Dataset& data,
                                    const CensoringEstimator& g,
                                    double eps = 0.02);

/// Fraction of evaluable rows (not censored by zeta) whose argmax class over
/// (S, F_1..F_K) matches the observed outcome at zeta. Argmax ties break
/// toward the lowest class index. zeta must be one of the grid horizons.
double accuracy_in_time(const CifMatrix& cif, const Dataset& data, double zeta);
double accuracy_at_index(const CifMatrix& cif, const Dataset& data, std::size_t j);

/// Interval log score of the any-event CIF on B evenly spaced buckets over
/// [0, node_t_max]: event rows score -log of their bucket's CIF increment,
/// censored rows -log of the survival at the bucket's right edge. pred holds
/// F(zeta_i) at the B+1 node points per row; increments are clamped at 1e-15
/// and clamps are counted in the report.
MetricReport s_cen_log_simple(const Matrix& pred_any_event, const Dataset& data,
                              double node_t_max);

/// Time-truncated concordance for event k: over pairs with t_i < t_j,
/// delta_i == k, t_i <= zeta, the fraction where risk_i > risk_j (risk ties
/// count one half). Throws when no pair is comparable.
double c_index_at(std::span<const double> risk, const Dataset& data, double zeta,
                  int k);

/// 100 evenly spaced horizons on (0, max observed event time].
TimeGrid default_ibs_grid(const Dataset& data, std::size_t n_points = 100);

/// Quantiles of the observed any-event time distribution.
std::vector<double> horizon_quantiles(const Dataset& data,
                                      std::span<const double> quantiles);

void save_report_csv(std::span<const MetricReport> reports, const std::string& path);

}  // namespace survboost
