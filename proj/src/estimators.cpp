#include "sbb/estimators.hpp"

#include <cmath>
#include <stdexcept>

#include "sbb/stats.hpp"

namespace sbb {

namespace {

// Acklam's rational approximation with one Halley refinement; good to
// machine precision over (0, 1).
double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("inverse_normal_cdf: p must be in (0, 1)");
    }
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Halley step against the exact CDF via erfc.
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

} // namespace

double normal_interval_z(double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw std::invalid_argument("interval level must be in (0, 1)");
    }
    return inverse_normal_cdf(0.5 + level / 2.0);
}

PointEstimate naive_mean(const SurveyDataset& dataset, const std::string& outcome_column,
                         double level) {
    const std::vector<double>& y = dataset.analysis_column(outcome_column);
    if (y.size() < 2) {
        throw ValidationError("naive_mean: need at least 2 observations");
    }
    PointEstimate est;
    est.method = "naive";
    est.level = level;
    est.value = mean(y);
    est.std_error = sample_sd(y) / std::sqrt(static_cast<double>(y.size()));
    const double z = normal_interval_z(level);
    est.ci_lower = est.value - z * est.std_error;
    est.ci_upper = est.value + z * est.std_error;
    return est;
}

PointEstimate design_mean(const SurveyDataset& dataset, const std::string& outcome_column,
                          double level, bool single_cluster_certainty) {
    const std::vector<double>& y = dataset.analysis_column(outcome_column);
    const std::vector<double>& w = dataset.weights();
    const std::size_t n = y.size();
    if (n == 0) {
        throw ValidationError("design_mean: empty dataset");
    }

    double w_total = 0.0;
    double wy_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        w_total += w[i];
        wy_total += w[i] * y[i];
    }
    const double estimate = wy_total / w_total;

    // Cluster totals of linearized residuals, grouped by stratum.
    const auto& clusters = dataset.clusters();
    std::vector<double> cluster_total(clusters.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        cluster_total[dataset.cluster_of(i)] += w[i] * (y[i] - estimate) / w_total;
    }
    const std::size_t n_strata = dataset.n_strata();
    std::vector<std::vector<double>> by_stratum(n_strata);
    for (std::size_t q = 0; q < clusters.size(); ++q) {
        by_stratum[clusters[q].stratum_index].push_back(cluster_total[q]);
    }

    double variance = 0.0;
    for (std::size_t h = 0; h < n_strata; ++h) {
        const auto& z = by_stratum[h];
        if (z.size() < 2) {
            if (single_cluster_certainty) {
                continue; // certainty unit: zero variance contribution
            }
            throw ValidationError(
                "design_mean: stratum '" + dataset.stratum_labels()[h] +
                "' has a single cluster; collapse strata or enable the certainty option");
        }
        double zbar = 0.0;
        for (double v : z) {
            zbar += v;
        }
        zbar /= static_cast<double>(z.size());
        double ss = 0.0;
        for (double v : z) {
            ss += (v - zbar) * (v - zbar);
        }
        variance += static_cast<double>(z.size()) / static_cast<double>(z.size() - 1) * ss;
    }

    PointEstimate est;
    est.method = "design";
    est.level = level;
    est.value = estimate;
    est.std_error = std::sqrt(variance);
    const double zq = normal_interval_z(level);
    est.ci_lower = est.value - zq * est.std_error;
    est.ci_upper = est.value + zq * est.std_error;
    return est;
}

} // namespace sbb
