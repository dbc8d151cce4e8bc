#include "sbb/overlap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sbb {

namespace {

constexpr double kProbClamp = 1e-6;

// Solve A x = b for symmetric positive definite A (in place Cholesky).
std::vector<double> solve_spd(Matrix a, std::vector<double> b) {
    const std::size_t n = a.rows;
    for (std::size_t j = 0; j < n; ++j) {
        double d = a.at(j, j);
        for (std::size_t k = 0; k < j; ++k) {
            d -= a.at(j, k) * a.at(j, k);
        }
        if (!(d > 0.0)) {
            throw ConvergenceError("normal equations are not positive definite");
        }
        a.at(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a.at(i, j);
            for (std::size_t k = 0; k < j; ++k) {
                s -= a.at(i, k) * a.at(j, k);
            }
            a.at(i, j) = s / a.at(j, j);
        }
    }
    for (std::size_t i = 0; i < n; ++i) { // forward
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) {
            s -= a.at(i, k) * b[k];
        }
        b[i] = s / a.at(i, i);
    }
    for (std::size_t i = n; i-- > 0;) { // backward
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) {
            s -= a.at(k, i) * b[k];
        }
        b[i] = s / a.at(i, i);
    }
    return b;
}

// Complete separation by a single covariate is the diagnosable case: one
// class sits entirely above the other on that axis.
std::string find_separating_covariate(const Matrix& x, const std::vector<int>& y,
                                      const std::vector<std::string>& names) {
    for (std::size_t j = 0; j < x.cols; ++j) {
        double max0 = -std::numeric_limits<double>::infinity();
        double min0 = std::numeric_limits<double>::infinity();
        double max1 = max0;
        double min1 = min0;
        for (std::size_t i = 0; i < x.rows; ++i) {
            const double v = x.at(i, j);
            if (y[i] == 1) {
                max1 = std::max(max1, v);
                min1 = std::min(min1, v);
            } else {
                max0 = std::max(max0, v);
                min0 = std::min(min0, v);
            }
        }
        if (max0 < min1 || max1 < min0) {
            return j < names.size() ? names[j] : "column " + std::to_string(j + 1);
        }
    }
    return "";
}

} // namespace

MembershipFit fit_membership_model(const Matrix& x, const std::vector<int>& in_source,
                                   const std::vector<double>& weights,
                                   const LogisticOptions& options) {
    const std::size_t n = in_source.size();
    if (n == 0 || (x.rows != n && x.cols > 0)) {
        throw AlignmentError("fit_membership_model: design matrix misaligned with labels");
    }
    if (weights.size() != n) {
        throw AlignmentError("fit_membership_model: weights misaligned with labels");
    }
    bool any0 = false;
    bool any1 = false;
    for (int v : in_source) {
        (v == 1 ? any1 : any0) = true;
    }
    if (!any0 || !any1) {
        throw ValidationError("fit_membership_model: both source and target units required");
    }
    if (x.cols > 0) {
        const std::string sep = find_separating_covariate(x, in_source, options.column_names);
        if (!sep.empty()) {
            throw ConvergenceError("perfect separation detected on covariate '" + sep + "'");
        }
    }

    const std::size_t p = x.cols + 1; // intercept first
    std::vector<double> beta(p, 0.0);
    std::vector<double> eta(n, 0.0);
    MembershipFit fit;

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        Matrix xtwx(p, p);
        std::vector<double> xtwz(p, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double mu = 1.0 / (1.0 + std::exp(-eta[i]));
            double s = mu * (1.0 - mu);
            s = std::max(s, 1e-10);
            const double wt = weights[i] * s;
            const double z = eta[i] + (static_cast<double>(in_source[i]) - mu) / s;
            for (std::size_t a = 0; a < p; ++a) {
                const double xa = a == 0 ? 1.0 : x.at(i, a - 1);
                xtwz[a] += wt * xa * z;
                for (std::size_t b = 0; b <= a; ++b) {
                    const double xb = b == 0 ? 1.0 : x.at(i, b - 1);
                    xtwx.at(a, b) += wt * xa * xb;
                }
            }
        }
        for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = a + 1; b < p; ++b) {
                xtwx.at(a, b) = xtwx.at(b, a);
            }
        }
        for (std::size_t a = 1; a < p; ++a) {
            xtwx.at(a, a) += options.ridge; // slopes only
        }
        const std::vector<double> beta_new = solve_spd(xtwx, xtwz);
        double delta = 0.0;
        for (std::size_t a = 0; a < p; ++a) {
            delta = std::max(delta, std::abs(beta_new[a] - beta[a]));
        }
        beta = beta_new;
        for (std::size_t i = 0; i < n; ++i) {
            double e = beta[0];
            for (std::size_t a = 1; a < p; ++a) {
                e += beta[a] * x.at(i, a - 1);
            }
            eta[i] = e;
        }
        fit.iterations = iter + 1;
        if (delta < options.tolerance) {
            fit.coef = beta;
            fit.prob.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                fit.prob[i] = 1.0 / (1.0 + std::exp(-eta[i]));
            }
            return fit;
        }
    }
    throw ConvergenceError("membership model did not converge in " +
                           std::to_string(options.max_iterations) + " iterations");
}

SelectionScores selection_score(const std::vector<double>& compliance,
                                const std::vector<double>& membership,
                                const std::vector<UnitOrigin>& origin) {
    const std::size_t n = origin.size();
    if (compliance.size() != n || membership.size() != n) {
        throw AlignmentError("selection_score: inputs misaligned");
    }
    SelectionScores scores;
    scores.origin = origin;
    scores.raw.resize(n);
    scores.logit.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(compliance[i] >= 0.0 && compliance[i] <= 1.0) ||
            !(membership[i] >= 0.0 && membership[i] <= 1.0)) {
            throw ValidationError("selection_score: unit " + std::to_string(i + 1) +
                                  " has a probability outside [0, 1]");
        }
        double raw = compliance[i] * membership[i];
        raw = std::clamp(raw, kProbClamp, 1.0 - kProbClamp);
        scores.raw[i] = raw;
        scores.logit[i] = std::log(raw / (1.0 - raw));
    }
    return scores;
}

SelectionScores standardize_scores(SelectionScores scores,
                                   const std::vector<std::size_t>& complier_ids) {
    if (complier_ids.size() < 2) {
        throw ValidationError("standardize_scores: need at least 2 complier units");
    }
    double m = 0.0;
    for (std::size_t i : complier_ids) {
        m += scores.logit.at(i);
    }
    m /= static_cast<double>(complier_ids.size());
    double ss = 0.0;
    for (std::size_t i : complier_ids) {
        ss += (scores.logit[i] - m) * (scores.logit[i] - m);
    }
    const double sd = std::sqrt(ss / static_cast<double>(complier_ids.size() - 1));
    if (!(sd > 0.0)) {
        throw ValidationError("standardize_scores: complier logits have zero spread");
    }
    scores.complier_mean = m;
    scores.complier_sd = sd;
    scores.standardized.resize(scores.logit.size());
    for (std::size_t i = 0; i < scores.logit.size(); ++i) {
        scores.standardized[i] = (scores.logit[i] - m) / sd;
    }
    scores.standardized_valid = true;
    return scores;
}

SupportFlags flag_low_support(const SelectionScores& scores,
                              const std::vector<std::size_t>& complier_ids,
                              const std::vector<double>& target_weights, double percentile) {
    if (!scores.standardized_valid) {
        throw ValidationError("flag_low_support: standardize scores first");
    }
    if (!(percentile >= 0.0 && percentile <= 1.0)) {
        throw SpecError("flag_low_support: percentile must be in [0, 1]");
    }
    std::vector<double> complier_scores;
    complier_scores.reserve(complier_ids.size());
    for (std::size_t i : complier_ids) {
        complier_scores.push_back(scores.standardized.at(i));
    }
    SupportFlags flags;
    flags.threshold = quantile_type7(std::move(complier_scores), percentile);

    double flagged_weight = 0.0;
    double total_weight = 0.0;
    std::size_t t = 0;
    for (std::size_t i = 0; i < scores.standardized.size(); ++i) {
        if (scores.origin[i] != UnitOrigin::target) {
            continue;
        }
        if (t >= target_weights.size()) {
            throw AlignmentError("flag_low_support: fewer target weights than target units");
        }
        const bool low = scores.standardized[i] < flags.threshold;
        flags.flagged.push_back(low ? 1 : 0);
        total_weight += target_weights[t];
        if (low) {
            flagged_weight += target_weights[t];
        }
        ++t;
    }
    if (t != target_weights.size()) {
        throw AlignmentError("flag_low_support: more target weights than target units");
    }
    flags.flagged_proportion = t == 0 ? 0.0 : flagged_weight / total_weight;
    return flags;
}

PosteriorSummary pate_with_support_policy(const SurveyDataset& dataset, const CateDraws& cate,
                                          const SupportFlags& flags, SupportPolicy policy,
                                          ScaledWeightMode mode, std::size_t n_bb, Rng& rng,
                                          double level) {
    if (flags.flagged.size() != dataset.n_obs()) {
        throw AlignmentError("pate_with_support_policy: flags misaligned with dataset");
    }
    if (policy == SupportPolicy::exclude) {
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < flags.flagged.size(); ++i) {
            if (!flags.flagged[i]) {
                keep.push_back(i);
            }
        }
        if (keep.empty()) {
            throw ValidationError("exclude policy would drop every observation");
        }
        if (keep.size() == dataset.n_obs()) {
            return estimate_pate(dataset, cate, mode, n_bb, rng, level);
        }
        const SurveyDataset trimmed = dataset.subset(keep);
        const CateDraws trimmed_cate = cate.subset_columns(keep);
        return estimate_pate(trimmed, trimmed_cate, mode, n_bb, rng, level);
    }
    // null_impute: zero the flagged units' effect in every draw row.
    std::vector<double> values = cate.values();
    const std::size_t m = cate.n_obs();
    for (std::size_t d = 0; d < cate.n_draws(); ++d) {
        for (std::size_t j = 0; j < m; ++j) {
            if (flags.flagged[j]) {
                values[d * m + j] = 0.0;
            }
        }
    }
    const CateDraws imputed = CateDraws::from_matrix(cate.n_draws(), m, std::move(values));
    return estimate_pate(dataset, imputed, mode, n_bb, rng, level);
}

} // namespace sbb
