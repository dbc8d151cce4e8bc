#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sbb/bootstrap.hpp"
#include "sbb/data_model.hpp"

namespace sbb {

/// Stratified two-stage PPS design replayed against a fixed population.
/// Both stages sample with replacement (small sample fractions assumed;
/// no finite population correction anywhere).
struct SimulationDesign {
    std::map<std::string, int> clusters_per_stratum; // empty: default for all strata
    int default_clusters_per_stratum = 10;
    int respondents_per_cluster = 10; // 0: census of every selected cluster
    std::map<std::string, int> respondents_override;    // by cluster label
    std::map<std::string, double> size_measure_override; // by cluster label
    int replications = 500;
    double level = 0.95;
    int n_bb = 500;
    ScaledWeightMode mode = ScaledWeightMode::product_normalized;
    bool run_naive = true;
    bool run_design = true;
    bool run_bb = true;
};

struct EstimatorMetrics {
    std::string method;
    double bias = 0.0;
    double coverage = 0.0;
    double sd = 0.0;
    double rmse = 0.0;
};

struct MetricsTable {
    std::vector<EstimatorMetrics> rows;
    double truth = 0.0;
    int replications = 0;
    int failed = 0;
};

/// Bias / coverage / sd / rmse of one estimator against a known truth.
/// Enforces rmse^2 = bias^2 + sd^2 (R-1)/R to 1e-9 relative.
EstimatorMetrics compute_metrics(const std::string& method,
                                 const std::vector<double>& estimates,
                                 const std::vector<double>& ci_lower,
                                 const std::vector<double>& ci_upper, double truth);

/// One stratified two-stage PPS sample. Each first-stage draw selects a
/// cluster with probability proportional to its measure of size; each
/// selected instance gets an SRS-with-replacement of respondents. Sampling
/// weights are the exact inverse inclusion intensity
///   [m_h * (s_c / S_h) * (k / N_c)]^{-1},
/// and repeated selections of the same population cluster become distinct
/// sample clusters.
SurveyDataset draw_pps_two_stage(const Population& population, const SimulationDesign& design,
                                 Rng& rng);

/// Replays the design `replications` times against the population outcome,
/// with truth computed by full enumeration. Replication r runs on a seed
/// derived from (master_seed, r), so any thread count gives identical
/// results. A failed replication is counted; more than 1% failures aborts.
MetricsTable run_replication_study(const Population& population, const SimulationDesign& design,
                                   std::uint64_t master_seed, int threads = 1);

void write_metrics_csv(const MetricsTable& table, const std::string& path);

} // namespace sbb
