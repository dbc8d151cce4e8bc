#pragma once

#include <string>

#include "sbb/data_model.hpp"

namespace sbb {

/// Frequentist point estimate with normal-theory interval.
struct PointEstimate {
    double value = 0.0;
    double std_error = 0.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    double level = 0.95;
    std::string method;
};

/// Unweighted mean assuming simple random sampling; SE = sd / sqrt(n).
/// Requires n >= 2.
PointEstimate naive_mean(const SurveyDataset& dataset, const std::string& outcome_column = "",
                         double level = 0.95);

/// Hajek weighted mean with Taylor-linearized variance under the
/// with-replacement (ultimate cluster) approximation:
///   u_i = w_i (y_i - yhat) / sum(w),  z_hc = sum_{i in hc} u_i,
///   V = sum_h n_h/(n_h - 1) * sum_c (z_hc - zbar_h)^2.
/// A stratum with a single cluster is an error unless
/// `single_cluster_certainty` treats it as a zero-variance certainty unit.
PointEstimate design_mean(const SurveyDataset& dataset, const std::string& outcome_column = "",
                          double level = 0.95, bool single_cluster_certainty = false);

/// Two-sided normal quantile for a coverage level (e.g. 0.95 -> 1.959964).
double normal_interval_z(double level);

} // namespace sbb
