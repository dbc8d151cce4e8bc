#include "sbb/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sbb/csv.hpp"
#include "sbb/estimators.hpp"
#include "sbb/stats.hpp"

namespace sbb {

namespace {

struct StratumClusters {
    std::vector<std::size_t> cluster_ids; // indices into population.data.clusters()
    std::vector<double> cumulative_size;  // running sums of measures
    double total_size = 0.0;
};

std::size_t pick_pps(const StratumClusters& sc, Rng& rng) {
    const double u = rng.uniform01() * sc.total_size;
    const auto it = std::upper_bound(sc.cumulative_size.begin(), sc.cumulative_size.end(), u);
    const auto k = static_cast<std::size_t>(it - sc.cumulative_size.begin());
    return sc.cluster_ids[std::min(k, sc.cluster_ids.size() - 1)];
}

} // namespace

SurveyDataset draw_pps_two_stage(const Population& population, const SimulationDesign& design,
                                 Rng& rng) {
    const SurveyDataset& pop = population.data;
    if (pop.n_obs() == 0) {
        throw ValidationError("draw_pps_two_stage: empty population");
    }
    for (const auto& [label, count] : design.clusters_per_stratum) {
        bool found = false;
        for (const auto& s : pop.stratum_labels()) {
            if (s == label) {
                found = true;
                break;
            }
        }
        if (!found) {
            throw SpecError("design names stratum '" + label + "' not present in population");
        }
        if (count < 1) {
            throw SpecError("design: clusters per stratum must be >= 1");
        }
    }
    if (design.default_clusters_per_stratum < 1 || design.respondents_per_cluster < 0) {
        throw SpecError("design: counts must be >= 1 (respondents 0 selects every member)");
    }

    auto size_of = [&](std::size_t c) {
        const auto it = design.size_measure_override.find(pop.clusters()[c].label);
        return it != design.size_measure_override.end() ? it->second
                                                        : population.size_measure[c];
    };

    std::vector<StratumClusters> strata(pop.n_strata());
    for (std::size_t c = 0; c < pop.n_clusters(); ++c) {
        if (pop.clusters()[c].members.empty()) {
            throw ValidationError("population cluster '" + pop.clusters()[c].label +
                                  "' is empty");
        }
        auto& sc = strata[pop.clusters()[c].stratum_index];
        const double s = size_of(c);
        if (!(s > 0.0) || !std::isfinite(s)) {
            throw ValidationError("cluster '" + pop.clusters()[c].label +
                                  "' has non-positive measure of size");
        }
        sc.cluster_ids.push_back(c);
        sc.total_size += s;
        sc.cumulative_size.push_back(sc.total_size);
    }

    SurveyColumns cols;
    cols.outcome_name = pop.outcome_name();
    std::vector<double> outcome;
    std::vector<std::vector<double>> numeric(pop.numeric_columns().size());
    std::vector<std::vector<std::string>> categorical(pop.categorical_columns().size());

    std::size_t obs_counter = 0;
    for (std::size_t h = 0; h < pop.n_strata(); ++h) {
        const auto& sc = strata[h];
        if (sc.cluster_ids.empty()) {
            continue;
        }
        int m_h = design.default_clusters_per_stratum;
        const auto it = design.clusters_per_stratum.find(pop.stratum_labels()[h]);
        if (it != design.clusters_per_stratum.end()) {
            m_h = it->second;
        }
        for (int inst = 0; inst < m_h; ++inst) {
            const std::size_t c = pick_pps(sc, rng);
            const ClusterInfo& cluster = pop.clusters()[c];
            int k = design.respondents_per_cluster;
            const auto rit = design.respondents_override.find(cluster.label);
            if (rit != design.respondents_override.end()) {
                k = rit->second;
            }
            if (k < 0) {
                throw SpecError("design: respondent count must be >= 0");
            }
            const auto cluster_n = static_cast<double>(cluster.members.size());
            const double p_cluster = size_of(c) / sc.total_size;
            // k == 0 takes the full membership once (census second stage);
            // otherwise SRS with replacement. Weight is the inverse
            // inclusion intensity under with-replacement sampling.
            const bool census = k == 0;
            const int draws = census ? static_cast<int>(cluster.members.size()) : k;
            const double within_fraction =
                census ? 1.0 : static_cast<double>(k) / cluster_n;
            const double weight =
                1.0 / (static_cast<double>(m_h) * p_cluster * within_fraction);
            const std::string sample_cluster_label =
                pop.stratum_labels()[h] + ":" + std::to_string(inst + 1);
            for (int j = 0; j < draws; ++j) {
                const std::size_t member =
                    census ? cluster.members[static_cast<std::size_t>(j)]
                           : cluster.members[rng.uniform_index(cluster.members.size())];
                ++obs_counter;
                cols.ids.push_back(std::to_string(obs_counter));
                cols.strata.push_back(pop.stratum_labels()[h]);
                cols.clusters.push_back(sample_cluster_label);
                cols.weights.push_back(weight);
                if (pop.has_outcome()) {
                    outcome.push_back(pop.outcome()[member]);
                }
                for (std::size_t v = 0; v < numeric.size(); ++v) {
                    numeric[v].push_back(pop.numeric_columns()[v].second[member]);
                }
                for (std::size_t v = 0; v < categorical.size(); ++v) {
                    categorical[v].push_back(pop.categorical_columns()[v].second[member]);
                }
            }
        }
    }
    if (pop.has_outcome()) {
        cols.outcome = std::move(outcome);
    }
    for (std::size_t v = 0; v < numeric.size(); ++v) {
        cols.numeric.emplace_back(pop.numeric_columns()[v].first, std::move(numeric[v]));
    }
    for (std::size_t v = 0; v < categorical.size(); ++v) {
        cols.categorical.emplace_back(pop.categorical_columns()[v].first,
                                      std::move(categorical[v]));
    }
    return SurveyDataset::from_columns(std::move(cols));
}

namespace {

struct ReplicationResult {
    bool failed = false;
    std::string error;
    // estimate and interval per estimator actually run
    std::vector<double> value;
    std::vector<double> lower;
    std::vector<double> upper;
};

} // namespace

EstimatorMetrics compute_metrics(const std::string& method,
                                 const std::vector<double>& estimates,
                                 const std::vector<double>& ci_lower,
                                 const std::vector<double>& ci_upper, double truth) {
    const std::size_t r = estimates.size();
    if (r == 0 || ci_lower.size() != r || ci_upper.size() != r) {
        throw Error("compute_metrics: misaligned replication results");
    }
    EstimatorMetrics m;
    m.method = method;
    double covered = 0.0;
    double sq_err = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
        if (ci_lower[i] <= truth && truth <= ci_upper[i]) {
            covered += 1.0;
        }
        sq_err += (estimates[i] - truth) * (estimates[i] - truth);
    }
    m.bias = mean(estimates) - truth;
    m.coverage = covered / static_cast<double>(r);
    m.sd = sample_sd(estimates);
    m.rmse = std::sqrt(sq_err / static_cast<double>(r));
    if (r > 1) {
        // rmse^2 = bias^2 + sd^2 (R-1)/R by construction; guard against
        // accounting drift between the three accumulations.
        const double lhs = m.rmse * m.rmse;
        const double rhs = m.bias * m.bias +
                           m.sd * m.sd * (static_cast<double>(r) - 1.0) / static_cast<double>(r);
        const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
        if (std::abs(lhs - rhs) / scale > 1e-9) {
            throw Error("metrics identity violated for estimator '" + method + "'");
        }
    }
    return m;
}

MetricsTable run_replication_study(const Population& population, const SimulationDesign& design,
                                   std::uint64_t master_seed, int threads) {
    if (design.replications < 1) {
        throw SpecError("replications must be >= 1");
    }
    if (!population.data.has_outcome()) {
        throw ValidationError("replication study requires a population outcome column");
    }
    // Truth by full enumeration of the fixed population.
    const double truth = mean(population.data.outcome());

    std::vector<std::string> methods;
    if (design.run_naive) {
        methods.push_back("naive");
    }
    if (design.run_design) {
        methods.push_back("design");
    }
    if (design.run_bb) {
        methods.push_back("bb");
    }
    if (methods.empty()) {
        throw SpecError("no estimators selected");
    }

    const auto R = static_cast<std::size_t>(design.replications);
    std::vector<ReplicationResult> results(R);
    parallel_for(R, threads, [&](std::size_t r) {
        ReplicationResult& out = results[r];
        try {
            Rng rng(Rng::derive(master_seed, r));
            const SurveyDataset sample = draw_pps_two_stage(population, design, rng);
            if (design.run_naive) {
                const PointEstimate e = naive_mean(sample, "", design.level);
                out.value.push_back(e.value);
                out.lower.push_back(e.ci_lower);
                out.upper.push_back(e.ci_upper);
            }
            if (design.run_design) {
                const PointEstimate e = design_mean(sample, "", design.level);
                out.value.push_back(e.value);
                out.lower.push_back(e.ci_lower);
                out.upper.push_back(e.ci_upper);
            }
            if (design.run_bb) {
                const PosteriorSummary s =
                    estimate_mean(sample, "", design.mode,
                                  static_cast<std::size_t>(design.n_bb), rng, design.level);
                out.value.push_back(s.mean);
                out.lower.push_back(s.ci_lower);
                out.upper.push_back(s.ci_upper);
            }
        } catch (const std::exception& e) {
            out.failed = true;
            out.error = e.what();
        }
    });

    int failed = 0;
    std::string first_error;
    for (const auto& r : results) {
        if (r.failed) {
            ++failed;
            if (first_error.empty()) {
                first_error = r.error;
            }
        }
    }
    if (static_cast<double>(failed) > 0.01 * static_cast<double>(R)) {
        std::ostringstream msg;
        msg << failed << " of " << R << " replications failed (first error: " << first_error
            << ")";
        throw Error(msg.str());
    }

    MetricsTable table;
    table.truth = truth;
    table.replications = design.replications;
    table.failed = failed;
    for (std::size_t e = 0; e < methods.size(); ++e) {
        std::vector<double> estimates;
        std::vector<double> lower;
        std::vector<double> upper;
        estimates.reserve(R);
        for (const auto& r : results) {
            if (r.failed) {
                continue;
            }
            estimates.push_back(r.value[e]);
            lower.push_back(r.lower[e]);
            upper.push_back(r.upper[e]);
        }
        table.rows.push_back(compute_metrics(methods[e], estimates, lower, upper, truth));
    }
    return table;
}

void write_metrics_csv(const MetricsTable& table, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& m : table.rows) {
        rows.push_back({m.method, format_double(m.bias), format_double(m.coverage),
                        format_double(m.sd), format_double(m.rmse)});
    }
    csv::write_file(path, {"method", "bias", "coverage", "sd", "rmse"}, rows);
}

} // namespace sbb
