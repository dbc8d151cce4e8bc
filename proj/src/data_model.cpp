#include "sbb/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "sbb/csv.hpp"
#include "sbb/rng.hpp"
#include "sbb/stats.hpp"

namespace sbb {

std::string ValidationReport::error_text() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (i > 0) {
            out << "; ";
        }
        out << errors[i];
    }
    return out.str();
}

ValidationReport validate_columns(const SurveyColumns& cols) {
    ValidationReport report;
    const std::size_t n = cols.strata.size();
    report.n_obs = n;

    if (n == 0) {
        report.errors.push_back("dataset has no observations");
        return report;
    }
    auto check_len = [&](std::size_t len, const std::string& what) {
        if (len != n) {
            report.errors.push_back(what + " has " + std::to_string(len) +
                                    " entries, expected " + std::to_string(n));
        }
    };
    check_len(cols.clusters.size(), "cluster column");
    check_len(cols.weights.size(), "weight column");
    if (!cols.ids.empty()) {
        check_len(cols.ids.size(), "id column");
    }
    if (cols.outcome) {
        check_len(cols.outcome->size(), "outcome column");
    }
    for (const auto& [name, values] : cols.numeric) {
        check_len(values.size(), "column '" + name + "'");
    }
    for (const auto& [name, values] : cols.categorical) {
        check_len(values.size(), "column '" + name + "'");
    }
    if (!report.errors.empty()) {
        return report;
    }

    for (std::size_t i = 0; i < n; ++i) {
        const double w = cols.weights[i];
        if (!std::isfinite(w) || w <= 0.0) {
            report.errors.push_back("row " + std::to_string(i + 1) +
                                    ": weight must be strictly positive and finite, got " +
                                    format_double(w));
        }
    }
    if (cols.outcome) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite((*cols.outcome)[i])) {
                report.errors.push_back("row " + std::to_string(i + 1) +
                                        ": outcome is not finite");
            }
        }
    }
    for (const auto& [name, values] : cols.numeric) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(values[i])) {
                report.errors.push_back("row " + std::to_string(i + 1) + ": covariate '" +
                                        name + "' is not finite");
            }
        }
    }

    // A cluster label must live inside exactly one stratum.
    std::map<std::string, std::set<std::string>> cluster_strata;
    for (std::size_t i = 0; i < n; ++i) {
        cluster_strata[cols.clusters[i]].insert(cols.strata[i]);
    }
    for (const auto& [cluster, strata] : cluster_strata) {
        if (strata.size() > 1) {
            std::string list;
            for (const auto& s : strata) {
                if (!list.empty()) {
                    list += ", ";
                }
                list += s;
            }
            report.errors.push_back("cluster crosses strata: cluster '" + cluster +
                                    "' appears under strata {" + list + "}");
        }
    }

    if (!cols.ids.empty()) {
        std::set<std::string> seen;
        for (std::size_t i = 0; i < n; ++i) {
            if (!seen.insert(cols.ids[i]).second) {
                report.errors.push_back("duplicate observation id '" + cols.ids[i] + "'");
            }
        }
    }

    // Summary counts by first-appearance order.
    std::vector<std::string> stratum_order;
    std::map<std::string, std::size_t> stratum_obs;
    std::map<std::string, std::set<std::string>> stratum_clusters;
    for (std::size_t i = 0; i < n; ++i) {
        if (stratum_obs.find(cols.strata[i]) == stratum_obs.end()) {
            stratum_order.push_back(cols.strata[i]);
        }
        stratum_obs[cols.strata[i]]++;
        stratum_clusters[cols.strata[i]].insert(cols.clusters[i]);
    }
    report.n_strata = stratum_order.size();
    report.n_clusters = cluster_strata.size();
    for (const auto& s : stratum_order) {
        report.obs_per_stratum.emplace_back(s, stratum_obs[s]);
        report.clusters_per_stratum.emplace_back(s, stratum_clusters[s].size());
    }
    return report;
}

SurveyDataset SurveyDataset::from_columns(SurveyColumns cols) {
    if (cols.ids.empty()) {
        cols.ids.reserve(cols.strata.size());
        for (std::size_t i = 0; i < cols.strata.size(); ++i) {
            cols.ids.push_back(std::to_string(i + 1));
        }
    }
    const ValidationReport report = validate_columns(cols);
    if (!report.ok()) {
        throw ValidationError(report.error_text());
    }

    SurveyDataset ds;
    ds.cols_ = std::move(cols);

    const std::size_t n = ds.cols_.strata.size();
    std::unordered_map<std::string, std::size_t> stratum_index;
    std::map<std::pair<std::size_t, std::string>, std::size_t> cluster_index;
    ds.cluster_of_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto [sit, s_new] = stratum_index.try_emplace(ds.cols_.strata[i], ds.stratum_labels_.size());
        if (s_new) {
            ds.stratum_labels_.push_back(ds.cols_.strata[i]);
        }
        const std::size_t s = sit->second;
        const auto key = std::make_pair(s, ds.cols_.clusters[i]);
        auto [cit, c_new] = cluster_index.try_emplace(key, ds.clusters_.size());
        if (c_new) {
            ClusterInfo info;
            info.stratum_index = s;
            info.label = ds.cols_.clusters[i];
            ds.clusters_.push_back(std::move(info));
        }
        const std::size_t c = cit->second;
        ds.clusters_[c].members.push_back(i);
        ds.clusters_[c].weight_sum += ds.cols_.weights[i];
        ds.cluster_of_[i] = c;
    }
    return ds;
}

const std::vector<double>& SurveyDataset::outcome() const {
    if (!cols_.outcome) {
        throw ValidationError("dataset has no outcome column");
    }
    return *cols_.outcome;
}

bool SurveyDataset::has_numeric(const std::string& name) const {
    for (const auto& [n, v] : cols_.numeric) {
        if (n == name) {
            return true;
        }
    }
    return false;
}

const std::vector<double>& SurveyDataset::numeric(const std::string& name) const {
    for (const auto& [n, v] : cols_.numeric) {
        if (n == name) {
            return v;
        }
    }
    throw SchemaError("no numeric column '" + name + "'");
}

bool SurveyDataset::has_categorical(const std::string& name) const {
    for (const auto& [n, v] : cols_.categorical) {
        if (n == name) {
            return true;
        }
    }
    return false;
}

const std::vector<std::string>& SurveyDataset::categorical(const std::string& name) const {
    for (const auto& [n, v] : cols_.categorical) {
        if (n == name) {
            return v;
        }
    }
    throw SchemaError("no categorical column '" + name + "'");
}

const std::vector<double>& SurveyDataset::analysis_column(const std::string& name) const {
    if (name.empty()) {
        return outcome();
    }
    if (!cols_.outcome_name.empty() && name == cols_.outcome_name) {
        return outcome();
    }
    return numeric(name);
}

SurveyDataset SurveyDataset::subset(const std::vector<std::size_t>& keep) const {
    SurveyColumns out;
    out.outcome_name = cols_.outcome_name;
    auto take_strings = [&](const std::vector<std::string>& src) {
        std::vector<std::string> dst;
        dst.reserve(keep.size());
        for (std::size_t i : keep) {
            dst.push_back(src[i]);
        }
        return dst;
    };
    auto take_doubles = [&](const std::vector<double>& src) {
        std::vector<double> dst;
        dst.reserve(keep.size());
        for (std::size_t i : keep) {
            dst.push_back(src[i]);
        }
        return dst;
    };
    out.ids = take_strings(cols_.ids);
    out.strata = take_strings(cols_.strata);
    out.clusters = take_strings(cols_.clusters);
    out.weights = take_doubles(cols_.weights);
    if (cols_.outcome) {
        out.outcome = take_doubles(*cols_.outcome);
    }
    for (const auto& [name, values] : cols_.numeric) {
        out.numeric.emplace_back(name, take_doubles(values));
    }
    for (const auto& [name, values] : cols_.categorical) {
        out.categorical.emplace_back(name, take_strings(values));
    }
    return from_columns(std::move(out));
}

bool SurveyDataset::operator==(const SurveyDataset& other) const {
    return cols_.ids == other.cols_.ids && cols_.strata == other.cols_.strata &&
           cols_.clusters == other.cols_.clusters && cols_.weights == other.cols_.weights &&
           cols_.outcome == other.cols_.outcome &&
           cols_.outcome_name == other.cols_.outcome_name &&
           cols_.numeric == other.cols_.numeric && cols_.categorical == other.cols_.categorical;
}

CateDraws CateDraws::from_matrix(std::size_t n_draws, std::size_t n_obs,
                                 std::vector<double> values, ValidationReport* report) {
    if (n_draws == 0 || n_obs == 0) {
        throw ValidationError("CATE draw matrix must be non-empty");
    }
    if (values.size() != n_draws * n_obs) {
        throw ValidationError("CATE draw matrix has " + std::to_string(values.size()) +
                              " entries, expected " + std::to_string(n_draws * n_obs));
    }
    bool outside_unit = false;
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw ValidationError("CATE draw matrix contains a non-finite entry");
        }
        if (v < -1.0 || v > 1.0) {
            outside_unit = true;
        }
    }
    if (outside_unit && report != nullptr) {
        report->warnings.push_back(
            "CATE draws outside [-1, 1]; fine unless effects are on a proportion scale");
    }
    CateDraws draws;
    draws.n_draws_ = n_draws;
    draws.n_obs_ = n_obs;
    draws.values_ = std::move(values);
    return draws;
}

CateDraws CateDraws::subset_columns(const std::vector<std::size_t>& keep) const {
    std::vector<double> values;
    values.reserve(n_draws_ * keep.size());
    for (std::size_t d = 0; d < n_draws_; ++d) {
        for (std::size_t j : keep) {
            values.push_back(at(d, j));
        }
    }
    return from_matrix(n_draws_, keep.size(), std::move(values));
}

namespace {

double parse_cell_double(const csv::Table& table, std::size_t row, std::size_t col,
                         const std::string& what) {
    const std::string& cell = table.rows[row][col];
    double v = 0.0;
    if (!csv::parse_double(cell, v)) {
        throw ValidationError("row " + std::to_string(row + 1) + ": cannot parse " + what +
                              " value '" + cell + "' as a real number");
    }
    return v;
}

SurveyColumns columns_from_table(const csv::Table& table, const SchemaMapping& schema,
                                 bool require_weight) {
    SurveyColumns cols;
    const std::size_t n = table.rows.size();

    const std::size_t stratum_col = table.column(schema.stratum);
    const std::size_t cluster_col = table.column(schema.cluster);
    std::size_t weight_col = 0;
    bool has_weight = false;
    if (!schema.weight.empty()) {
        weight_col = table.column(schema.weight);
        has_weight = true;
    } else if (require_weight) {
        throw SchemaError("schema must name a weight column");
    }

    std::set<std::string> used = {schema.stratum, schema.cluster};
    if (has_weight) {
        used.insert(schema.weight);
    }
    if (!schema.id.empty()) {
        used.insert(schema.id);
    }
    if (!schema.outcome.empty()) {
        used.insert(schema.outcome);
    }
    if (!schema.size_measure.empty()) {
        used.insert(schema.size_measure);
    }

    for (std::size_t i = 0; i < n; ++i) {
        cols.strata.push_back(table.rows[i][stratum_col]);
        cols.clusters.push_back(table.rows[i][cluster_col]);
        cols.weights.push_back(has_weight ? parse_cell_double(table, i, weight_col, "weight")
                                          : 1.0);
    }
    if (!schema.id.empty()) {
        const std::size_t id_col = table.column(schema.id);
        for (std::size_t i = 0; i < n; ++i) {
            cols.ids.push_back(table.rows[i][id_col]);
        }
    }
    if (!schema.outcome.empty()) {
        const std::size_t col = table.column(schema.outcome);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = parse_cell_double(table, i, col, "outcome");
        }
        cols.outcome = std::move(y);
        cols.outcome_name = schema.outcome;
    }

    std::vector<std::string> covariate_names;
    if (!schema.covariates.empty()) {
        covariate_names = schema.covariates;
    } else {
        for (const auto& h : table.header) {
            if (used.find(h) == used.end()) {
                covariate_names.push_back(h);
            }
        }
    }

    for (const auto& name : covariate_names) {
        const std::size_t col = table.column(name);
        // Numeric when every cell parses as a real; otherwise categorical.
        // The designated segment column stays categorical even when its
        // labels happen to look numeric.
        bool numeric = name != schema.segment;
        for (std::size_t i = 0; i < n && numeric; ++i) {
            double v = 0.0;
            if (!csv::parse_double(table.rows[i][col], v)) {
                numeric = false;
            }
        }
        if (numeric && n > 0) {
            std::vector<double> values(n);
            for (std::size_t i = 0; i < n; ++i) {
                values[i] = parse_cell_double(table, i, col, "covariate '" + name + "'");
            }
            cols.numeric.emplace_back(name, std::move(values));
        } else {
            std::vector<std::string> values(n);
            for (std::size_t i = 0; i < n; ++i) {
                values[i] = table.rows[i][col];
                if (values[i].empty()) {
                    throw ValidationError("row " + std::to_string(i + 1) + ": covariate '" +
                                          name + "' is missing (empty cell)");
                }
            }
            cols.categorical.emplace_back(name, std::move(values));
        }
    }
    return cols;
}

} // namespace

SurveyDataset load_survey_csv(const std::string& path, const SchemaMapping& schema) {
    const csv::Table table = csv::read_file(path);
    SurveyColumns cols = columns_from_table(table, schema, /*require_weight=*/true);
    try {
        return SurveyDataset::from_columns(std::move(cols));
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void write_survey_csv(const SurveyDataset& dataset, const std::string& path,
                      const SchemaMapping& schema) {
    std::vector<std::string> header = {schema.id.empty() ? "id" : schema.id, schema.stratum,
                                       schema.cluster,
                                       schema.weight.empty() ? "weight" : schema.weight};
    if (dataset.has_outcome()) {
        header.push_back(dataset.outcome_name().empty() ? "outcome" : dataset.outcome_name());
    }
    for (const auto& [name, v] : dataset.numeric_columns()) {
        header.push_back(name);
    }
    for (const auto& [name, v] : dataset.categorical_columns()) {
        header.push_back(name);
    }
    std::vector<std::vector<std::string>> rows;
    rows.reserve(dataset.n_obs());
    for (std::size_t i = 0; i < dataset.n_obs(); ++i) {
        std::vector<std::string> row;
        row.push_back(dataset.ids()[i]);
        row.push_back(dataset.stratum_labels()[dataset.stratum_of(i)]);
        row.push_back(dataset.clusters()[dataset.cluster_of(i)].label);
        row.push_back(format_double(dataset.weights()[i]));
        if (dataset.has_outcome()) {
            row.push_back(format_double(dataset.outcome()[i]));
        }
        for (const auto& [name, v] : dataset.numeric_columns()) {
            row.push_back(format_double(v[i]));
        }
        for (const auto& [name, v] : dataset.categorical_columns()) {
            row.push_back(v[i]);
        }
        rows.push_back(std::move(row));
    }
    csv::write_file(path, header, rows);
}

Population load_population_csv(const std::string& path, const SchemaMapping& schema) {
    if (schema.size_measure.empty()) {
        throw SchemaError("population schema must name a measure-of-size column");
    }
    const csv::Table table = csv::read_file(path);
    SurveyColumns cols = columns_from_table(table, schema, /*require_weight=*/false);

    const std::size_t size_col = table.column(schema.size_measure);
    std::vector<double> row_size(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        row_size[i] = parse_cell_double(table, i, size_col, "measure of size");
    }

    Population population;
    try {
        population.data = SurveyDataset::from_columns(std::move(cols));
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
    population.size_measure.assign(population.data.n_clusters(), 0.0);
    std::vector<bool> seen(population.data.n_clusters(), false);
    for (std::size_t i = 0; i < population.data.n_obs(); ++i) {
        const std::size_t c = population.data.cluster_of(i);
        if (!seen[c]) {
            population.size_measure[c] = row_size[i];
            seen[c] = true;
        } else if (population.size_measure[c] != row_size[i]) {
            throw ValidationError(path + ": cluster '" + population.data.clusters()[c].label +
                                  "' has inconsistent measure-of-size values");
        }
    }
    for (std::size_t c = 0; c < population.size_measure.size(); ++c) {
        const double s = population.size_measure[c];
        if (!std::isfinite(s) || s <= 0.0) {
            throw ValidationError(path + ": cluster '" + population.data.clusters()[c].label +
                                  "' has non-positive measure of size");
        }
    }
    return population;
}

void write_population_csv(const Population& population, const std::string& path,
                          const SchemaMapping& schema) {
    SchemaMapping out_schema = schema;
    if (out_schema.size_measure.empty()) {
        out_schema.size_measure = "size_measure";
    }
    const SurveyDataset& data = population.data;
    std::vector<std::string> header = {out_schema.id.empty() ? "id" : out_schema.id,
                                       out_schema.stratum, out_schema.cluster,
                                       out_schema.weight.empty() ? "weight" : out_schema.weight,
                                       out_schema.size_measure};
    if (data.has_outcome()) {
        header.push_back(data.outcome_name().empty() ? "outcome" : data.outcome_name());
    }
    for (const auto& [name, v] : data.numeric_columns()) {
        header.push_back(name);
    }
    for (const auto& [name, v] : data.categorical_columns()) {
        header.push_back(name);
    }
    std::vector<std::vector<std::string>> rows;
    rows.reserve(data.n_obs());
    for (std::size_t i = 0; i < data.n_obs(); ++i) {
        std::vector<std::string> row;
        row.push_back(data.ids()[i]);
        row.push_back(data.stratum_labels()[data.stratum_of(i)]);
        row.push_back(data.clusters()[data.cluster_of(i)].label);
        row.push_back(format_double(data.weights()[i]));
        row.push_back(format_double(population.size_measure[data.cluster_of(i)]));
        if (data.has_outcome()) {
            row.push_back(format_double(data.outcome()[i]));
        }
        for (const auto& [name, v] : data.numeric_columns()) {
            row.push_back(format_double(v[i]));
        }
        for (const auto& [name, v] : data.categorical_columns()) {
            row.push_back(v[i]);
        }
        rows.push_back(std::move(row));
    }
    csv::write_file(path, header, rows);
}

namespace {

CateDraws load_cate_matrix(const csv::Table& table, const SurveyDataset& dataset,
                           ValidationReport* report) {
    const std::size_t m = dataset.n_obs();
    if (table.header.size() != m + 1) {
        throw AlignmentError("CATE matrix has " + std::to_string(table.header.size() - 1) +
                             " observation columns, dataset has " + std::to_string(m));
    }
    // Map observation ids to matrix columns, then reorder to dataset order.
    std::unordered_map<std::string, std::size_t> col_of;
    for (std::size_t c = 1; c < table.header.size(); ++c) {
        if (!col_of.emplace(table.header[c], c).second) {
            throw AlignmentError("CATE matrix has duplicate observation column '" +
                                 table.header[c] + "'");
        }
    }
    std::vector<std::size_t> order(m);
    for (std::size_t j = 0; j < m; ++j) {
        const auto it = col_of.find(dataset.ids()[j]);
        if (it == col_of.end()) {
            throw AlignmentError("CATE matrix has no column for observation id '" +
                                 dataset.ids()[j] + "'");
        }
        order[j] = it->second;
    }
    const std::size_t n_draws = table.rows.size();
    if (n_draws == 0) {
        throw ValidationError("CATE matrix has no draw rows");
    }
    std::vector<double> values;
    values.reserve(n_draws * m);
    for (std::size_t d = 0; d < n_draws; ++d) {
        for (std::size_t j = 0; j < m; ++j) {
            values.push_back(parse_cell_double(table, d, order[j], "CATE"));
        }
    }
    return CateDraws::from_matrix(n_draws, m, std::move(values), report);
}

CateDraws load_cate_segments(const csv::Table& table, const SurveyDataset& dataset,
                             const std::string& segment_column, ValidationReport* report) {
    if (segment_column.empty()) {
        throw SchemaError("segment-form CATE file requires a dataset segment column name");
    }
    const std::vector<std::string>& obs_segment = dataset.categorical(segment_column);

    const std::size_t seg_col = table.column("segment");
    const std::size_t draw_col = table.column("draw_id");
    const std::size_t value_col = table.column("value");

    // Draw ids in first-appearance order; each segment must cover all of them.
    std::vector<std::string> draw_order;
    std::unordered_map<std::string, std::size_t> draw_index;
    std::unordered_map<std::string, std::unordered_map<std::size_t, double>> segment_draws;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::string& draw_id = table.rows[r][draw_col];
        auto [it, is_new] = draw_index.try_emplace(draw_id, draw_order.size());
        if (is_new) {
            draw_order.push_back(draw_id);
        }
        const double v = parse_cell_double(table, r, value_col, "CATE");
        auto& per_draw = segment_draws[table.rows[r][seg_col]];
        if (!per_draw.emplace(it->second, v).second) {
            throw ValidationError("segment '" + table.rows[r][seg_col] +
                                  "' has duplicate draw id '" + draw_id + "'");
        }
    }
    if (draw_order.empty()) {
        throw ValidationError("segment CATE file has no rows");
    }
    for (const auto& [segment, per_draw] : segment_draws) {
        if (per_draw.size() != draw_order.size()) {
            throw ValidationError("segment '" + segment + "' covers " +
                                  std::to_string(per_draw.size()) + " draws, expected " +
                                  std::to_string(draw_order.size()));
        }
    }

    const std::size_t m = dataset.n_obs();
    const std::size_t n_draws = draw_order.size();
    std::vector<double> values(n_draws * m);
    for (std::size_t j = 0; j < m; ++j) {
        const auto it = segment_draws.find(obs_segment[j]);
        if (it == segment_draws.end()) {
            throw AlignmentError("observation id '" + dataset.ids()[j] + "' is in segment '" +
                                 obs_segment[j] + "' which the CATE file does not cover");
        }
        for (std::size_t d = 0; d < n_draws; ++d) {
            values[d * m + j] = it->second.at(d);
        }
    }
    return CateDraws::from_matrix(n_draws, m, std::move(values), report);
}

} // namespace

CateDraws load_cate_draws(const std::string& path, const SurveyDataset& dataset,
                          const std::string& segment_column, ValidationReport* report) {
    const csv::Table table = csv::read_file(path);
    const bool segment_form = table.has_column("segment") && table.has_column("draw_id") &&
                              table.has_column("value") && table.header.size() == 3;
    if (segment_form) {
        return load_cate_segments(table, dataset, segment_column, report);
    }
    if (!table.header.empty() && table.header[0] == "draw_id") {
        return load_cate_matrix(table, dataset, report);
    }
    throw SchemaError(path + ": unrecognized CATE file layout; expected a draw_id matrix or "
                      "segment,draw_id,value file");
}

Population generate_synthetic_population(const SyntheticSpec& spec) {
    if (spec.n_strata < 1) {
        throw SpecError("synthetic spec: n_strata must be >= 1");
    }
    if (spec.clusters_per_stratum < 1) {
        throw SpecError("synthetic spec: clusters_per_stratum must be >= 1");
    }
    if (spec.cluster_size_min < 1 || spec.cluster_size_max < spec.cluster_size_min) {
        throw SpecError("synthetic spec: cluster size range must satisfy 1 <= min <= max");
    }
    if (spec.n_extra_covariates < 0) {
        throw SpecError("synthetic spec: n_extra_covariates must be >= 0");
    }

    Rng rng(spec.seed);
    SurveyColumns cols;
    cols.outcome_name = "age";
    std::vector<double> age;
    std::vector<std::vector<double>> extra(spec.n_extra_covariates);
    std::vector<double> size_measure;

    const double mid_size = 0.5 * (spec.cluster_size_min + spec.cluster_size_max);
    const double stratum_center = 0.5 * (spec.n_strata - 1);
    std::size_t obs_id = 0;
    for (int h = 0; h < spec.n_strata; ++h) {
        const std::string stratum_label = "S" + std::to_string(h + 1);
        // Centered and capped so many-strata populations keep a bounded
        // stratum spread.
        const double stratum_shift =
            spec.stratum_age_step * std::clamp(h - stratum_center, -2.0, 2.0);
        for (int c = 0; c < spec.clusters_per_stratum; ++c) {
            const std::string cluster_label = stratum_label + "C" + std::to_string(c + 1);
            const int size = spec.cluster_size_min +
                             static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(
                                 spec.cluster_size_max - spec.cluster_size_min + 1)));
            const double measure = std::pow(static_cast<double>(size), spec.size_measure_alpha) *
                                   std::exp(spec.size_measure_noise_sd * rng.normal());
            size_measure.push_back(measure);
            const double cluster_effect = rng.normal();
            for (int j = 0; j < size; ++j) {
                ++obs_id;
                cols.ids.push_back(std::to_string(obs_id));
                cols.strata.push_back(stratum_label);
                cols.clusters.push_back(cluster_label);
                cols.weights.push_back(1.0);
                const double a = spec.age_base + stratum_shift +
                                 spec.age_size_slope * (size - mid_size) +
                                 spec.age_cluster_sd * cluster_effect +
                                 spec.age_indiv_sd * rng.normal();
                age.push_back(a);
                for (int k = 0; k < spec.n_extra_covariates; ++k) {
                    extra[static_cast<std::size_t>(k)].push_back(rng.normal() +
                                                                 0.5 * cluster_effect);
                }
            }
        }
    }
    cols.outcome = std::move(age);
    for (int k = 0; k < spec.n_extra_covariates; ++k) {
        cols.numeric.emplace_back("x" + std::to_string(k + 1),
                                  std::move(extra[static_cast<std::size_t>(k)]));
    }

    Population population;
    population.data = SurveyDataset::from_columns(std::move(cols));
    population.size_measure = std::move(size_measure);
    return population;
}

} // namespace sbb
