#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sbb/bootstrap.hpp"
#include "sbb/data_model.hpp"
#include "sbb/stats.hpp"

namespace sbb {

enum class UnitOrigin { source, target };

struct LogisticOptions {
    double ridge = 1e-6; // penalty on slopes only
    int max_iterations = 100;
    double tolerance = 1e-10;
    std::vector<std::string> column_names; // for separation messages
};

struct MembershipFit {
    std::vector<double> prob; // P(T = 0 | X) per unit
    std::vector<double> coef; // intercept first, then slopes
    int iterations = 0;
};

/// Weighted ridge-logistic regression of the source indicator on X, fit by
/// iteratively reweighted least squares. `in_source` is 1 for units of the
/// source study (T = 0). X excludes the intercept column (added
/// internally). Probabilities can instead be supplied externally by any
/// classifier; this is the bundled default.
MembershipFit fit_membership_model(const Matrix& x, const std::vector<int>& in_source,
                                   const std::vector<double>& weights,
                                   const LogisticOptions& options = {});

/// Selection scores for the stacked source + target units: raw score
/// (compliance * membership probability, clamped away from {0,1}), its
/// logit, and after standardization the z-scored logit.
struct SelectionScores {
    std::vector<double> raw;
    std::vector<double> logit;
    std::vector<double> standardized; // filled by standardize_scores
    std::vector<UnitOrigin> origin;
    double complier_mean = 0.0;
    double complier_sd = 0.0;
    bool standardized_valid = false;
};

/// raw = compliance * membership clamped to [1e-6, 1 - 1e-6] before the
/// logit (which is undefined at the endpoints).
SelectionScores selection_score(const std::vector<double>& compliance,
                                const std::vector<double>& membership,
                                const std::vector<UnitOrigin>& origin);

/// Standardize every logit by the mean and sd (n-1 denominator) over the
/// designated complier units. Requires >= 2 compliers with distinct logits.
SelectionScores standardize_scores(SelectionScores scores,
                                   const std::vector<std::size_t>& complier_ids);

struct SupportFlags {
    double threshold = 0.0;
    std::vector<char> flagged;        // one per target unit, in scores order
    double flagged_proportion = 0.0;  // weighted by target survey weights
};

/// Threshold is the interpolated `percentile` quantile of standardized
/// scores among compliers; a target unit is flagged iff its standardized
/// score is strictly below it. `target_weights` aligns with the target
/// units of `scores` in order.
SupportFlags flag_low_support(const SelectionScores& scores,
                              const std::vector<std::size_t>& complier_ids,
                              const std::vector<double>& target_weights,
                              double percentile = 0.05);

enum class SupportPolicy { exclude, null_impute };

/// Recompute the PATE under a low-support policy. exclude drops flagged
/// observations (empty clusters disappear, cluster exponents recomputed);
/// null_impute zeroes their CATE entries in every draw row. Flags align
/// with dataset rows.
PosteriorSummary pate_with_support_policy(const SurveyDataset& dataset, const CateDraws& cate,
                                          const SupportFlags& flags, SupportPolicy policy,
                                          ScaledWeightMode mode, std::size_t n_bb, Rng& rng,
                                          double level = 0.95);

} // namespace sbb
