#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sbb/errors.hpp"

namespace sbb {

/// Column-name mapping for survey / population CSV files. DHS-style exports
/// do not share a fixed layout, so every role is named explicitly.
struct SchemaMapping {
    std::string stratum;
    std::string cluster;
    std::string weight;                   // may be empty for population files
    std::string id;                       // empty: row numbers "1".."n"
    std::string outcome;                  // optional
    std::string segment;                  // optional: per-observation segment label
    std::string size_measure;             // optional: per-cluster measure of size
    std::vector<std::string> covariates;  // empty: every remaining column
};

/// Raw parsed columns before invariants are enforced.
struct SurveyColumns {
    std::vector<std::string> ids;      // may be empty
    std::vector<std::string> strata;
    std::vector<std::string> clusters;
    std::vector<double> weights;
    std::string outcome_name;
    std::optional<std::vector<double>> outcome;
    std::vector<std::pair<std::string, std::vector<double>>> numeric;
    std::vector<std::pair<std::string, std::vector<std::string>>> categorical;
};

struct ValidationReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    std::size_t n_obs = 0;
    std::size_t n_strata = 0;
    std::size_t n_clusters = 0;
    std::vector<std::pair<std::string, std::size_t>> obs_per_stratum;
    std::vector<std::pair<std::string, std::size_t>> clusters_per_stratum;

    bool ok() const { return errors.empty(); }
    /// All error lines joined, for exception messages.
    std::string error_text() const;
};

/// Hard invariants for SurveyColumns; empty errors iff all hold.
ValidationReport validate_columns(const SurveyColumns& cols);

/// One sampled cluster: members, count and the pseudo-likelihood exponent
/// f_q = n_q * mean(w) used by the scaled bootstrap.
struct ClusterInfo {
    std::size_t stratum_index = 0;
    std::string label;
    std::vector<std::size_t> members;
    double weight_sum = 0.0;

    std::size_t size() const { return members.size(); }
    double f() const {
        return weight_sum; // n_q * mean weight == sum of member weights
    }
};

/// Immutable target-population sample. Clusters are keyed by
/// (stratum, cluster) pairs internally; construction validates every
/// invariant and throws ValidationError otherwise. Safe to share across
/// threads once built.
class SurveyDataset {
  public:
    /// Empty placeholder; every populated instance comes from from_columns.
    SurveyDataset() = default;

    static SurveyDataset from_columns(SurveyColumns cols);

    std::size_t n_obs() const { return cols_.weights.size(); }
    std::size_t n_strata() const { return stratum_labels_.size(); }
    std::size_t n_clusters() const { return clusters_.size(); }

    const std::vector<std::string>& ids() const { return cols_.ids; }
    const std::vector<double>& weights() const { return cols_.weights; }
    const std::vector<std::string>& stratum_labels() const { return stratum_labels_; }
    const std::vector<ClusterInfo>& clusters() const { return clusters_; }
    std::size_t cluster_of(std::size_t obs) const { return cluster_of_[obs]; }
    std::size_t stratum_of(std::size_t obs) const { return clusters_[cluster_of_[obs]].stratum_index; }

    bool has_outcome() const { return cols_.outcome.has_value(); }
    const std::vector<double>& outcome() const;
    const std::string& outcome_name() const { return cols_.outcome_name; }

    bool has_numeric(const std::string& name) const;
    const std::vector<double>& numeric(const std::string& name) const;
    bool has_categorical(const std::string& name) const;
    const std::vector<std::string>& categorical(const std::string& name) const;
    const std::vector<std::pair<std::string, std::vector<double>>>& numeric_columns() const {
        return cols_.numeric;
    }
    const std::vector<std::pair<std::string, std::vector<std::string>>>& categorical_columns() const {
        return cols_.categorical;
    }

    /// Resolve an analysis column: empty name means the designated outcome.
    const std::vector<double>& analysis_column(const std::string& name) const;

    /// New dataset restricted to the given observation rows (order kept).
    /// Empty clusters disappear and cluster exponents are recomputed.
    SurveyDataset subset(const std::vector<std::size_t>& keep) const;

    bool operator==(const SurveyDataset& other) const;

  private:
    SurveyColumns cols_;
    std::vector<std::string> stratum_labels_;
    std::vector<ClusterInfo> clusters_;
    std::vector<std::size_t> cluster_of_;
};

/// Posterior draws of conditional effects, one column per target
/// observation, aligned to dataset row order.
class CateDraws {
  public:
    /// Empty placeholder; populated instances come from from_matrix.
    CateDraws() = default;

    /// Validates shape and finiteness. Entries outside [-1, 1] produce a
    /// warning in `report` (effects on a proportion scale live inside it).
    static CateDraws from_matrix(std::size_t n_draws, std::size_t n_obs,
                                 std::vector<double> values,
                                 ValidationReport* report = nullptr);

    std::size_t n_draws() const { return n_draws_; }
    std::size_t n_obs() const { return n_obs_; }
    double at(std::size_t draw, std::size_t obs) const { return values_[draw * n_obs_ + obs]; }
    const std::vector<double>& values() const { return values_; }

    CateDraws subset_columns(const std::vector<std::size_t>& keep) const;

  private:
    std::size_t n_draws_ = 0;
    std::size_t n_obs_ = 0;
    std::vector<double> values_;
};

/// A complete finite population with a per-cluster measure of size for
/// PPS sampling. Weights in `data` are all 1 (it is a census).
struct Population {
    SurveyDataset data;
    std::vector<double> size_measure; // aligned with data.clusters()
};

/// Specification for the bundled DHS-like synthetic population. Cluster
/// size feeds the age mean (informative design) and the measure of size is
/// a noisy power of the true size, so PPS weights carry information.
struct SyntheticSpec {
    int n_strata = 4;
    int clusters_per_stratum = 60;
    int cluster_size_min = 26;
    int cluster_size_max = 40;
    std::uint64_t seed = 0;

    double age_base = 30.0;
    double stratum_age_step = 0.75;
    double age_size_slope = 0.5;
    double age_cluster_sd = 1.0;
    double age_indiv_sd = 6.0;

    double size_measure_alpha = 0.5;
    double size_measure_noise_sd = 0.2;

    int n_extra_covariates = 2;
};

/// Deterministic in the spec (including seed): equal specs give
/// byte-identical populations.
Population generate_synthetic_population(const SyntheticSpec& spec);

SurveyDataset load_survey_csv(const std::string& path, const SchemaMapping& schema);
void write_survey_csv(const SurveyDataset& dataset, const std::string& path,
                      const SchemaMapping& schema);

Population load_population_csv(const std::string& path, const SchemaMapping& schema);
void write_population_csv(const Population& population, const std::string& path,
                          const SchemaMapping& schema);

/// Accepts a full matrix file (header: draw_id, <observation ids...>) or a
/// segment lookup file (header: segment, draw_id, value expanded through
/// `segment_column` of the dataset).
CateDraws load_cate_draws(const std::string& path, const SurveyDataset& dataset,
                          const std::string& segment_column = "",
                          ValidationReport* report = nullptr);

} // namespace sbb
