// sbb: survey-weighted Bayesian bootstrap toolkit.
//
// Subcommands: estimate, simulate, overlap, sensitivity {confounder|shift},
// synth. Every run writes a manifest.json (resolved parameters + seed +
// version) next to its outputs; rerunning a subcommand with
// --config <manifest.json> reproduces the outputs byte for byte.
//
// Exit codes: 0 success, 1 runtime/data error, 2 usage error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sbb/bootstrap.hpp"
#include "sbb/csv.hpp"
#include "sbb/data_model.hpp"
#include "sbb/errors.hpp"
#include "sbb/estimators.hpp"
#include "sbb/overlap.hpp"
#include "sbb/sensitivity.hpp"
#include "sbb/serialize.hpp"
#include "sbb/simulate.hpp"
#include "sbb/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

// Tracks every option of a subcommand so that a JSON config can fill in
// anything not given on the command line, and so the manifest can echo the
// fully resolved parameter set.
class ParamSet {
  public:
    template <typename T>
    CLI::Option* add(CLI::App& app, const std::string& flag, T& value,
                     const std::string& desc) {
        CLI::Option* opt = app.add_option(flag, value, desc);
        register_param(flag_key(flag), opt, value);
        return opt;
    }

    CLI::Option* add_flag(CLI::App& app, const std::string& flag, bool& value,
                          const std::string& desc) {
        CLI::Option* opt = app.add_flag(flag, value, desc);
        register_param(flag_key(flag), opt, value);
        return opt;
    }

    /// Fill values absent from the command line from a config object.
    void overlay(const json& config) {
        for (auto& p : params_) {
            if (p.opt->count() == 0 && config.contains(p.key)) {
                p.from_json(config.at(p.key));
                p.overlaid = true;
            }
        }
    }

    bool resolved(const std::string& key) const {
        for (const auto& p : params_) {
            if (p.key == key) {
                return p.opt->count() > 0 || p.overlaid;
            }
        }
        return false;
    }

    json manifest_params() const {
        json out = json::object();
        for (const auto& p : params_) {
            out[p.key] = p.to_json();
        }
        return out;
    }

  private:
    struct Param {
        std::string key;
        CLI::Option* opt;
        std::function<void(const json&)> from_json;
        std::function<json()> to_json;
        bool overlaid = false;
    };

    static std::string flag_key(const std::string& flag) {
        std::string name = flag.substr(flag.find_first_not_of('-'));
        const auto comma = name.find(',');
        if (comma != std::string::npos) {
            name = name.substr(0, comma);
        }
        for (auto& c : name) {
            if (c == '-') {
                c = '_';
            }
        }
        return name;
    }

    template <typename T>
    void register_param(const std::string& key, CLI::Option* opt, T& value) {
        params_.push_back(Param{key, opt, [&value](const json& j) { value = j.get<T>(); },
                                [&value]() { return json(value); }, false});
    }

    std::vector<Param> params_;
};

struct CommonOpts {
    std::uint64_t seed = 0;
    int n_bb = 1000;
    std::string mode = "product";
    double level = 0.95;
    std::string out_dir = ".";
    int threads = 1;
    std::string config_path;
};

void add_common(CLI::App& app, ParamSet& params, CommonOpts& opts) {
    params.add(app, "--seed", opts.seed, "Master seed (generated and echoed when omitted)");
    params.add(app, "--n-bb", opts.n_bb, "Number of bootstrap draws");
    params.add(app, "--mode", opts.mode, "Cluster weight mode: product|pseudo");
    params.add(app, "--level", opts.level, "Interval level");
    params.add(app, "--out", opts.out_dir, "Output directory");
    params.add(app, "--threads", opts.threads, "Worker threads for independent units of work");
    app.add_option("--config", opts.config_path,
                   "JSON config or manifest; flags override its values");
}

struct SchemaOpts {
    std::string survey_path;
    std::string stratum_col = "stratum";
    std::string cluster_col = "cluster";
    std::string weight_col = "weight";
    std::string id_col;
    std::string outcome_col;
    std::string segment_col;
    std::vector<std::string> covariate_cols;
};

void add_schema(CLI::App& app, ParamSet& params, SchemaOpts& opts) {
    params.add(app, "--survey", opts.survey_path, "Survey CSV for the target population");
    params.add(app, "--stratum-col", opts.stratum_col, "Stratum column name");
    params.add(app, "--cluster-col", opts.cluster_col, "Cluster column name");
    params.add(app, "--weight-col", opts.weight_col, "Sampling weight column name");
    params.add(app, "--id-col", opts.id_col, "Observation id column (default: row numbers)");
    params.add(app, "--outcome-col", opts.outcome_col, "Outcome column name");
    params.add(app, "--segment-col", opts.segment_col,
               "Column naming each observation's segment (for segment-form CATE files)");
    params.add(app, "--covariates", opts.covariate_cols,
               "Covariate columns (default: every remaining column)")
        ->delimiter(',');
}

sbb::SchemaMapping to_schema(const SchemaOpts& opts) {
    sbb::SchemaMapping schema;
    schema.stratum = opts.stratum_col;
    schema.cluster = opts.cluster_col;
    schema.weight = opts.weight_col;
    schema.id = opts.id_col;
    schema.outcome = opts.outcome_col;
    schema.covariates = opts.covariate_cols;
    return schema;
}

struct SynthOpts {
    int strata = 4;
    int clusters = 60;
    int size_min = 26;
    int size_max = 40;
    std::uint64_t synth_seed = 1;
    double age_base = 30.0;
    double stratum_step = 0.75;
    double size_slope = 0.5;
    double cluster_sd = 1.0;
    double indiv_sd = 6.0;
    double size_alpha = 0.5;
    double size_noise = 0.2;
    int extra_covariates = 2;
};

void add_synth(CLI::App& app, ParamSet& params, SynthOpts& opts) {
    params.add(app, "--synth-strata", opts.strata, "Synthetic population: strata count");
    params.add(app, "--synth-clusters", opts.clusters, "Synthetic population: clusters per stratum");
    params.add(app, "--synth-size-min", opts.size_min, "Synthetic population: smallest cluster");
    params.add(app, "--synth-size-max", opts.size_max, "Synthetic population: largest cluster");
    params.add(app, "--synth-seed", opts.synth_seed, "Synthetic population seed");
    params.add(app, "--synth-age-base", opts.age_base, "Age intercept");
    params.add(app, "--synth-stratum-step", opts.stratum_step, "Per-stratum age shift step");
    params.add(app, "--synth-size-slope", opts.size_slope,
               "Age change per member of cluster size (informative design)");
    params.add(app, "--synth-cluster-sd", opts.cluster_sd, "Cluster random effect sd");
    params.add(app, "--synth-indiv-sd", opts.indiv_sd, "Individual noise sd");
    params.add(app, "--synth-size-alpha", opts.size_alpha,
               "Measure of size = size^alpha * lognormal noise");
    params.add(app, "--synth-size-noise", opts.size_noise, "Measure-of-size log noise sd");
    params.add(app, "--synth-extra-covariates", opts.extra_covariates,
               "Extra numeric covariates generated");
}

sbb::SyntheticSpec to_spec(const SynthOpts& opts) {
    sbb::SyntheticSpec spec;
    spec.n_strata = opts.strata;
    spec.clusters_per_stratum = opts.clusters;
    spec.cluster_size_min = opts.size_min;
    spec.cluster_size_max = opts.size_max;
    spec.seed = opts.synth_seed;
    spec.age_base = opts.age_base;
    spec.stratum_age_step = opts.stratum_step;
    spec.age_size_slope = opts.size_slope;
    spec.age_cluster_sd = opts.cluster_sd;
    spec.age_indiv_sd = opts.indiv_sd;
    spec.size_measure_alpha = opts.size_alpha;
    spec.size_measure_noise_sd = opts.size_noise;
    spec.n_extra_covariates = opts.extra_covariates;
    return spec;
}

void require_value(const std::string& value, const std::string& flag) {
    if (value.empty()) {
        throw sbb::SpecError(flag + std::string(" is required (on the command line or in --config)"));
    }
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw sbb::IoError("cannot open config file: " + path);
    }
    json config = json::parse(in);
    // A manifest nests the parameters under "params"; a plain config is flat.
    if (config.contains("params") && config.at("params").is_object()) {
        return config.at("params");
    }
    return config;
}

/// Apply config overlay, resolve the seed, and create the output directory.
void finalize_run(ParamSet& params, CommonOpts& common) {
    if (!common.config_path.empty()) {
        params.overlay(load_config(common.config_path));
    }
    if (!params.resolved("seed")) {
        std::random_device rd;
        common.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    }
    std::cout << "seed: " << common.seed << "\n";
    if (common.n_bb < 1) {
        throw sbb::SpecError("--n-bb must be >= 1");
    }
    if (common.threads < 1) {
        throw sbb::SpecError("--threads must be >= 1");
    }
    fs::create_directories(common.out_dir);
}

void write_manifest(const std::string& subcommand, const ParamSet& params,
                    const CommonOpts& common) {
    json manifest;
    manifest["version"] = kVersion;
    manifest["subcommand"] = subcommand;
    json p = params.manifest_params();
    p["seed"] = common.seed; // resolved value, even when generated
    manifest["params"] = p;
    std::ofstream out(fs::path(common.out_dir) / "manifest.json");
    out << manifest.dump(2) << "\n";
    if (!out) {
        throw sbb::IoError("cannot write manifest in " + common.out_dir);
    }
}

void write_json_file(const json& value, const fs::path& path) {
    std::ofstream out(path);
    out << value.dump(2) << "\n";
    if (!out) {
        throw sbb::IoError("cannot write " + path.string());
    }
}

void write_draws_csv(const sbb::PosteriorSummary& s, const fs::path& path) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(s.draws.size());
    for (std::size_t i = 0; i < s.draws.size(); ++i) {
        rows.push_back({std::to_string(i + 1), sbb::format_double(s.draws[i])});
    }
    sbb::csv::write_file(path.string(), {"draw", "value"}, rows);
}

// ---------------------------------------------------------------------------
// estimate

struct EstimateCmd {
    CommonOpts common;
    SchemaOpts schema;
    std::string cate_path;
    bool keep_draws = false;

    void run(ParamSet& params) {
        finalize_run(params, common);
        require_value(schema.survey_path, "--survey");
        require_value(cate_path, "--cate");
        const sbb::SurveyDataset dataset = sbb::load_survey_csv(schema.survey_path, to_schema(schema));
        sbb::ValidationReport report;
        const sbb::CateDraws cate =
            sbb::load_cate_draws(cate_path, dataset, schema.segment_col, &report);
        for (const auto& w : report.warnings) {
            std::cerr << "warning: " << w << "\n";
        }
        sbb::Rng rng(common.seed);
        const sbb::PosteriorSummary summary =
            sbb::estimate_pate(dataset, cate, sbb::parse_mode(common.mode),
                               static_cast<std::size_t>(common.n_bb), rng, common.level);
        write_manifest("estimate", params, common);
        write_json_file(sbb::to_json(summary, keep_draws),
                        fs::path(common.out_dir) / "pate_summary.json");
        write_draws_csv(summary, fs::path(common.out_dir) / "pate_draws.csv");
        std::cout << "pate: " << summary.mean << " (sd " << summary.sd << ", " << summary.level
                  << " CI [" << summary.ci_lower << ", " << summary.ci_upper << "])\n";
    }
};

// ---------------------------------------------------------------------------
// simulate

struct SimulateCmd {
    CommonOpts common;
    SchemaOpts schema;
    SynthOpts synth;
    std::string population_path;
    std::string size_col = "size_measure";
    int clusters_per_stratum = 10;
    std::vector<std::string> stratum_clusters; // LABEL=COUNT overrides
    int respondents = 10;
    int reps = 500;

    void run(ParamSet& params) {
        finalize_run(params, common);
        sbb::Population population;
        if (!population_path.empty()) {
            sbb::SchemaMapping mapping = to_schema(schema);
            mapping.size_measure = size_col;
            population = sbb::load_population_csv(population_path, mapping);
        } else {
            population = sbb::generate_synthetic_population(to_spec(synth));
        }
        sbb::SimulationDesign design;
        design.default_clusters_per_stratum = clusters_per_stratum;
        for (const auto& entry : stratum_clusters) {
            const auto eq = entry.find('=');
            if (eq == std::string::npos) {
                throw sbb::SpecError("--stratum-clusters expects LABEL=COUNT, got '" + entry +
                                     "'");
            }
            design.clusters_per_stratum[entry.substr(0, eq)] =
                std::stoi(entry.substr(eq + 1));
        }
        design.respondents_per_cluster = respondents;
        design.replications = reps;
        design.level = common.level;
        design.n_bb = common.n_bb;
        design.mode = sbb::parse_mode(common.mode);
        if (reps < 1) {
            throw sbb::SpecError("--reps must be >= 1");
        }
        const sbb::MetricsTable table =
            sbb::run_replication_study(population, design, common.seed, common.threads);
        write_manifest("simulate", params, common);
        sbb::write_metrics_csv(table, (fs::path(common.out_dir) / "metrics.csv").string());
        write_json_file(sbb::to_json(table), fs::path(common.out_dir) / "metrics.json");
        for (const auto& m : table.rows) {
            std::cout << m.method << ": bias " << m.bias << ", coverage " << m.coverage
                      << ", sd " << m.sd << ", rmse " << m.rmse << "\n";
        }
    }
};

// ---------------------------------------------------------------------------
// overlap

struct OverlapCmd {
    CommonOpts common;
    SchemaOpts schema;
    std::string cate_path;
    std::string source_path;
    std::string compliance_col = "compliance";
    std::string source_compliance_col;
    std::string complier_col = "complier";
    std::string source_weight_col;
    std::string membership_col;
    std::vector<std::string> model_covariates;
    double percentile = 0.05;

    struct Stacked {
        sbb::Matrix x;
        std::vector<int> in_source;
        std::vector<double> weights;
        std::vector<std::string> column_names;
    };

    // One-hot encodes categoricals over the stacked level set (first level
    // dropped); numeric columns pass through.
    Stacked build_design(const sbb::SurveyDataset& target, const sbb::csv::Table& source) const {
        const std::size_t n_source = source.rows.size();
        const std::size_t n_target = target.n_obs();
        const std::size_t n = n_source + n_target;

        std::vector<std::vector<double>> columns;
        std::vector<std::string> names;
        for (const auto& name : model_covariates) {
            const std::size_t source_col = source.column(name);
            if (target.has_numeric(name)) {
                std::vector<double> col(n);
                for (std::size_t i = 0; i < n_source; ++i) {
                    double v = 0.0;
                    if (!sbb::csv::parse_double(source.rows[i][source_col], v)) {
                        throw sbb::ValidationError("source row " + std::to_string(i + 1) +
                                                   ": covariate '" + name + "' is not numeric");
                    }
                    col[i] = v;
                }
                const auto& tv = target.numeric(name);
                for (std::size_t i = 0; i < n_target; ++i) {
                    col[n_source + i] = tv[i];
                }
                columns.push_back(std::move(col));
                names.push_back(name);
            } else if (target.has_categorical(name)) {
                const auto& tv = target.categorical(name);
                std::vector<std::string> stacked(n);
                for (std::size_t i = 0; i < n_source; ++i) {
                    stacked[i] = source.rows[i][source_col];
                }
                for (std::size_t i = 0; i < n_target; ++i) {
                    stacked[n_source + i] = tv[i];
                }
                std::vector<std::string> levels = stacked;
                std::sort(levels.begin(), levels.end());
                levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
                for (std::size_t l = 1; l < levels.size(); ++l) { // drop first level
                    std::vector<double> col(n, 0.0);
                    for (std::size_t i = 0; i < n; ++i) {
                        if (stacked[i] == levels[l]) {
                            col[i] = 1.0;
                        }
                    }
                    columns.push_back(std::move(col));
                    names.push_back(name + "=" + levels[l]);
                }
            } else {
                throw sbb::SchemaError("target survey has no covariate column '" + name + "'");
            }
        }

        Stacked stacked;
        stacked.column_names = names;
        stacked.x = sbb::Matrix(n, columns.size());
        for (std::size_t j = 0; j < columns.size(); ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                stacked.x.at(i, j) = columns[j][i];
            }
        }
        stacked.in_source.assign(n, 0);
        for (std::size_t i = 0; i < n_source; ++i) {
            stacked.in_source[i] = 1;
        }
        stacked.weights.assign(n, 1.0);
        if (!source_weight_col.empty()) {
            const std::size_t wc = source.column(source_weight_col);
            for (std::size_t i = 0; i < n_source; ++i) {
                double v = 1.0;
                if (!sbb::csv::parse_double(source.rows[i][wc], v)) {
                    throw sbb::ValidationError("source row " + std::to_string(i + 1) +
                                               ": weight is not numeric");
                }
                stacked.weights[i] = v;
            }
        }
        for (std::size_t i = 0; i < n_target; ++i) {
            stacked.weights[n_source + i] = target.weights()[i];
        }
        return stacked;
    }

    void run(ParamSet& params) {
        finalize_run(params, common);
        require_value(schema.survey_path, "--survey");
        require_value(cate_path, "--cate");
        require_value(source_path, "--source");
        const sbb::SurveyDataset dataset = sbb::load_survey_csv(schema.survey_path, to_schema(schema));
        const sbb::csv::Table source = sbb::csv::read_file(source_path);
        const std::size_t n_source = source.rows.size();
        const std::size_t n = n_source + dataset.n_obs();
        if (n_source == 0) {
            throw sbb::ValidationError("source file has no rows");
        }

        // Compliance scores per unit.
        const std::string src_compliance =
            source_compliance_col.empty() ? compliance_col : source_compliance_col;
        const std::size_t source_compliance_idx = source.column(src_compliance);
        std::vector<double> compliance(n);
        for (std::size_t i = 0; i < n_source; ++i) {
            if (!sbb::csv::parse_double(source.rows[i][source_compliance_idx], compliance[i])) {
                throw sbb::ValidationError("source row " + std::to_string(i + 1) +
                                           ": compliance score is not numeric");
            }
        }
        const auto& target_compliance = dataset.numeric(compliance_col);
        for (std::size_t i = 0; i < dataset.n_obs(); ++i) {
            compliance[n_source + i] = target_compliance[i];
        }

        // Membership probabilities: externally supplied column or the
        // bundled weighted ridge-logistic fit on the stacked units.
        std::vector<double> membership(n);
        if (!membership_col.empty()) {
            const std::size_t mc = source.column(membership_col);
            for (std::size_t i = 0; i < n_source; ++i) {
                if (!sbb::csv::parse_double(source.rows[i][mc], membership[i])) {
                    throw sbb::ValidationError("source row " + std::to_string(i + 1) +
                                               ": membership probability is not numeric");
                }
            }
            const auto& tm = dataset.numeric(membership_col);
            for (std::size_t i = 0; i < dataset.n_obs(); ++i) {
                membership[n_source + i] = tm[i];
            }
        } else {
            if (model_covariates.empty()) {
                throw sbb::SchemaError(
                    "overlap requires --covariates for the membership model (or "
                    "--membership-col to supply probabilities)");
            }
            Stacked stacked = build_design(dataset, source);
            sbb::LogisticOptions options;
            options.column_names = stacked.column_names;
            const sbb::MembershipFit fit = sbb::fit_membership_model(
                stacked.x, stacked.in_source, stacked.weights, options);
            membership = fit.prob;
        }

        std::vector<sbb::UnitOrigin> origin(n, sbb::UnitOrigin::target);
        for (std::size_t i = 0; i < n_source; ++i) {
            origin[i] = sbb::UnitOrigin::source;
        }
        std::vector<std::size_t> complier_ids;
        const std::size_t complier_idx = source.column(complier_col);
        for (std::size_t i = 0; i < n_source; ++i) {
            double v = 0.0;
            if (!sbb::csv::parse_double(source.rows[i][complier_idx], v)) {
                throw sbb::ValidationError("source row " + std::to_string(i + 1) +
                                           ": complier flag is not numeric");
            }
            if (v != 0.0) {
                complier_ids.push_back(i);
            }
        }

        const sbb::SelectionScores scores = sbb::standardize_scores(
            sbb::selection_score(compliance, membership, origin), complier_ids);
        const sbb::SupportFlags flags =
            sbb::flag_low_support(scores, complier_ids, dataset.weights(), percentile);

        // Scores CSV covers the stacked units in order: source, then target.
        {
            std::vector<std::vector<std::string>> rows;
            const std::size_t id_idx =
                source.has_column("id") ? source.column("id") : static_cast<std::size_t>(-1);
            for (std::size_t i = 0; i < n; ++i) {
                std::string unit_id;
                std::string flagged;
                if (i < n_source) {
                    unit_id = id_idx == static_cast<std::size_t>(-1)
                                  ? "s" + std::to_string(i + 1)
                                  : source.rows[i][id_idx];
                } else {
                    unit_id = dataset.ids()[i - n_source];
                    flagged = flags.flagged[i - n_source] ? "1" : "0";
                }
                rows.push_back({unit_id, i < n_source ? "source" : "target",
                                sbb::format_double(scores.raw[i]),
                                sbb::format_double(scores.logit[i]),
                                sbb::format_double(scores.standardized[i]), flagged});
            }
            sbb::csv::write_file((fs::path(common.out_dir) / "scores.csv").string(),
                                 {"unit_id", "origin", "raw", "logit", "standardized", "flagged"},
                                 rows);
        }

        // Three PATE variants from the same seed: differences reflect the
        // policy, not Monte Carlo noise.
        sbb::ValidationReport report;
        const sbb::CateDraws cate =
            sbb::load_cate_draws(cate_path, dataset, schema.segment_col, &report);
        const sbb::ScaledWeightMode mode = sbb::parse_mode(common.mode);
        const auto n_bb = static_cast<std::size_t>(common.n_bb);
        sbb::Rng rng_plain(common.seed);
        const sbb::PosteriorSummary plain =
            sbb::estimate_pate(dataset, cate, mode, n_bb, rng_plain, common.level);
        sbb::Rng rng_excl(common.seed);
        const sbb::PosteriorSummary excluding = sbb::pate_with_support_policy(
            dataset, cate, flags, sbb::SupportPolicy::exclude, mode, n_bb, rng_excl,
            common.level);
        sbb::Rng rng_null(common.seed);
        const sbb::PosteriorSummary null_imputed = sbb::pate_with_support_policy(
            dataset, cate, flags, sbb::SupportPolicy::null_impute, mode, n_bb, rng_null,
            common.level);

        write_manifest("overlap", params, common);
        json report_json;
        report_json["threshold"] = flags.threshold;
        report_json["flagged_proportion"] = flags.flagged_proportion;
        report_json["pate_plain"] = sbb::to_json(plain);
        report_json["pate_excluding"] = sbb::to_json(excluding);
        report_json["pate_null_imputed"] = sbb::to_json(null_imputed);
        write_json_file(report_json, fs::path(common.out_dir) / "overlap_report.json");

        sbb::csv::write_file(
            (fs::path(common.out_dir) / "overlap_report.csv").string(),
            {"proportion_flagged", "pate_plain", "pate_plain_sd", "pate_excluding",
             "pate_excluding_sd", "pate_null_imputed", "pate_null_imputed_sd"},
            {{sbb::format_double(flags.flagged_proportion), sbb::format_double(plain.mean),
              sbb::format_double(plain.sd), sbb::format_double(excluding.mean),
              sbb::format_double(excluding.sd), sbb::format_double(null_imputed.mean),
              sbb::format_double(null_imputed.sd)}});
        std::cout << "flagged proportion: " << flags.flagged_proportion << " (threshold "
                  << flags.threshold << ")\n"
                  << "pate plain: " << plain.mean << ", excluding: " << excluding.mean
                  << ", null-imputed: " << null_imputed.mean << "\n";
    }
};

// ---------------------------------------------------------------------------
// sensitivity

struct SensitivityCmd {
    CommonOpts common;
    SchemaOpts schema;
    std::string cate_path;
    // confounder
    double kappa = 0.66;
    int sign = -1;
    std::vector<double> xi_grid;
    // shift
    std::vector<double> gamma_grid;
    std::string cells_col;
    std::string source_effects_path;

    void run_confounder(ParamSet& params) {
        finalize_run(params, common);
        require_value(schema.survey_path, "--survey");
        require_value(cate_path, "--cate");
        const sbb::SurveyDataset dataset = sbb::load_survey_csv(schema.survey_path, to_schema(schema));
        const sbb::CateDraws cate = sbb::load_cate_draws(cate_path, dataset, schema.segment_col);
        sbb::ConfounderSpec spec;
        spec.kappa = kappa;
        spec.sign = sign;
        spec.xi_grid = xi_grid;
        if (spec.xi_grid.empty()) {
            for (int i = 0; i <= 10; ++i) {
                spec.xi_grid.push_back(static_cast<double>(i) / 10.0);
            }
        }
        const sbb::SensitivityCurve curve = sbb::pate_confounder_curve(
            dataset, cate, spec, sbb::parse_mode(common.mode),
            static_cast<std::size_t>(common.n_bb), common.seed, common.level, common.threads);
        write_manifest("sensitivity confounder", params, common);
        sbb::write_confounder_csv(curve,
                                  (fs::path(common.out_dir) / "confounder_curve.csv").string());
        std::cout << "confounder curve: " << curve.confounder.size() << " points, baseline "
                  << curve.confounder.front().summary.mean << "\n";
    }

    void run_shift(ParamSet& params) {
        finalize_run(params, common);
        require_value(schema.survey_path, "--survey");
        require_value(cate_path, "--cate");
        require_value(source_effects_path, "--source-effects");
        const sbb::SurveyDataset dataset = sbb::load_survey_csv(schema.survey_path, to_schema(schema));
        const sbb::CateDraws cate = sbb::load_cate_draws(cate_path, dataset, schema.segment_col);
        sbb::ShiftSpec spec;
        spec.gamma_grid = gamma_grid.empty() ? sbb::default_gamma_grid() : gamma_grid;
        if (!cells_col.empty()) {
            if (dataset.has_categorical(cells_col)) {
                spec.cell_of = dataset.categorical(cells_col);
            } else {
                for (double v : dataset.numeric(cells_col)) {
                    spec.cell_of.push_back(sbb::format_double(v));
                }
            }
        }
        sbb::CellEffects effects;
        const sbb::csv::Table table = sbb::csv::read_file(source_effects_path);
        const std::size_t cell_idx = table.column("cell");
        const std::size_t value_idx = table.column("value");
        const bool has_weight = table.has_column("weight");
        const std::size_t weight_idx = has_weight ? table.column("weight") : 0;
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            double v = 0.0;
            if (!sbb::csv::parse_double(table.rows[r][value_idx], v)) {
                throw sbb::ValidationError("source effects row " + std::to_string(r + 1) +
                                           ": value is not numeric");
            }
            auto& cell = effects.cells[table.rows[r][cell_idx]];
            cell.tau.push_back(v);
            if (has_weight) {
                double w = 0.0;
                if (!sbb::csv::parse_double(table.rows[r][weight_idx], w)) {
                    throw sbb::ValidationError("source effects row " + std::to_string(r + 1) +
                                               ": weight is not numeric");
                }
                cell.omega.push_back(w);
            }
        }
        const sbb::SensitivityCurve curve = sbb::pate_shift_bounds(
            dataset, cate, effects, spec, sbb::parse_mode(common.mode),
            static_cast<std::size_t>(common.n_bb), common.seed, common.level, common.threads);
        write_manifest("sensitivity shift", params, common);
        sbb::write_shift_csv(curve, (fs::path(common.out_dir) / "shift_curve.csv").string());
        std::cout << "shift curve: " << curve.shift.size() << " points, baseline ["
                  << curve.shift.front().lower.mean << ", " << curve.shift.front().upper.mean
                  << "]\n";
    }
};

// ---------------------------------------------------------------------------
// synth

struct SynthCmd {
    CommonOpts common;
    SynthOpts synth;

    void run(ParamSet& params) {
        finalize_run(params, common);
        const sbb::Population population = sbb::generate_synthetic_population(to_spec(synth));
        write_manifest("synth", params, common);
        sbb::SchemaMapping schema;
        schema.stratum = "stratum";
        schema.cluster = "cluster";
        schema.weight = "weight";
        schema.id = "id";
        schema.size_measure = "size_measure";
        sbb::write_population_csv(population,
                                  (fs::path(common.out_dir) / "population.csv").string(),
                                  schema);
        std::cout << "population: " << population.data.n_obs() << " members, "
                  << population.data.n_clusters() << " clusters, "
                  << population.data.n_strata() << " strata\n";
    }
};

int classify_exception() {
    try {
        throw;
    } catch (const sbb::SchemaError&) {
        return 2;
    } catch (const sbb::SpecError&) {
        return 2;
    } catch (const sbb::IoError&) {
        return 2;
    } catch (const std::invalid_argument&) {
        return 2;
    } catch (const std::exception&) {
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Survey-weighted Bayesian bootstrap toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    EstimateCmd estimate;
    ParamSet estimate_params;
    CLI::App* estimate_app = app.add_subcommand(
        "estimate", "Population average effect from survey + CATE draws");
    add_common(*estimate_app, estimate_params, estimate.common);
    add_schema(*estimate_app, estimate_params, estimate.schema);
    estimate_params.add(*estimate_app, "--cate", estimate.cate_path, "CATE draws CSV");
    estimate_params.add_flag(*estimate_app, "--keep-draws", estimate.keep_draws,
                             "Include raw draws in the JSON summary");

    SimulateCmd simulate;
    ParamSet simulate_params;
    CLI::App* simulate_app = app.add_subcommand(
        "simulate", "Replicated two-stage PPS sampling with estimator metrics");
    add_common(*simulate_app, simulate_params, simulate.common);
    add_schema(*simulate_app, simulate_params, simulate.schema);
    add_synth(*simulate_app, simulate_params, simulate.synth);
    simulate_params.add(*simulate_app, "--population", simulate.population_path,
                        "Population CSV (omit to use the synthetic spec)");
    simulate_params.add(*simulate_app, "--size-col", simulate.size_col,
                        "Measure-of-size column in the population CSV");
    simulate_params.add(*simulate_app, "--clusters-per-stratum", simulate.clusters_per_stratum,
                        "Sampled clusters per stratum");
    simulate_params
        .add(*simulate_app, "--stratum-clusters", simulate.stratum_clusters,
             "Per-stratum override, LABEL=COUNT")
        ->delimiter(',');
    simulate_params.add(*simulate_app, "--respondents", simulate.respondents,
                        "Respondents sampled per cluster (0: take every member)");
    simulate_params.add(*simulate_app, "--reps", simulate.reps, "Replications");

    OverlapCmd overlap;
    ParamSet overlap_params;
    CLI::App* overlap_app = app.add_subcommand(
        "overlap", "Selection scores, low-support flags, and PATE recomputations");
    add_common(*overlap_app, overlap_params, overlap.common);
    add_schema(*overlap_app, overlap_params, overlap.schema);
    overlap_params.add(*overlap_app, "--cate", overlap.cate_path, "CATE draws CSV");
    overlap_params.add(*overlap_app, "--source", overlap.source_path,
                       "Source-study units CSV (covariates, compliance, complier flag)");
    overlap_params.add(*overlap_app, "--compliance-col", overlap.compliance_col,
                       "Compliance score column");
    overlap_params.add(*overlap_app, "--source-compliance-col", overlap.source_compliance_col,
                       "Compliance column in the source file when named differently");
    overlap_params.add(*overlap_app, "--complier-col", overlap.complier_col,
                       "Complier indicator column in the source file");
    overlap_params.add(*overlap_app, "--source-weight-col", overlap.source_weight_col,
                       "Source unit weight column (default: 1)");
    overlap_params.add(*overlap_app, "--membership-col", overlap.membership_col,
                       "Column with externally estimated P(T=0|X), bypassing the fit");
    overlap_params
        .add(*overlap_app, "--model-covariates", overlap.model_covariates,
             "Covariates for the membership model")
        ->delimiter(',');
    overlap_params.add(*overlap_app, "--percentile", overlap.percentile,
                       "Complier percentile defining the low-support threshold");

    SensitivityCmd sensitivity;
    ParamSet confounder_params;
    ParamSet shift_params;
    CLI::App* sensitivity_app =
        app.add_subcommand("sensitivity", "Sensitivity to unmeasured effect modification");
    sensitivity_app->require_subcommand(1);
    CLI::App* confounder_app = sensitivity_app->add_subcommand(
        "confounder", "Parametric prevalence sweep of a binary confounder");
    add_common(*confounder_app, confounder_params, sensitivity.common);
    add_schema(*confounder_app, confounder_params, sensitivity.schema);
    confounder_params.add(*confounder_app, "--cate", sensitivity.cate_path, "CATE draws CSV");
    confounder_params.add(*confounder_app, "--kappa", sensitivity.kappa,
                          "Confounder effect shift");
    confounder_params.add(*confounder_app, "--sign", sensitivity.sign,
                          "Shift direction: +1 or -1");
    confounder_params
        .add(*confounder_app, "--xi-grid", sensitivity.xi_grid,
             "Prevalence grid (default 0,0.1,...,1)")
        ->delimiter(',');

    CLI::App* shift_app = sensitivity_app->add_subcommand(
        "shift", "Bounds under a bounded distribution shift (density ratio in [1/g, g])");
    add_common(*shift_app, shift_params, sensitivity.common);
    add_schema(*shift_app, shift_params, sensitivity.schema);
    shift_params.add(*shift_app, "--cate", sensitivity.cate_path, "CATE draws CSV");
    shift_params
        .add(*shift_app, "--gamma-grid", sensitivity.gamma_grid,
             "Bound grid (default: 15 log-spaced points on [1, 8])")
        ->delimiter(',');
    shift_params.add(*shift_app, "--cells-col", sensitivity.cells_col,
                     "Dataset column assigning covariate cells (default: one marginal cell)");
    shift_params.add(*shift_app, "--source-effects", sensitivity.source_effects_path,
                     "CSV of source complier effects: cell,value[,weight]");

    SynthCmd synth;
    ParamSet synth_params;
    CLI::App* synth_app =
        app.add_subcommand("synth", "Generate a synthetic two-stage population CSV");
    add_common(*synth_app, synth_params, synth.common);
    add_synth(*synth_app, synth_params, synth.synth);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (estimate_app->parsed()) {
            estimate.run(estimate_params);
        } else if (simulate_app->parsed()) {
            simulate.run(simulate_params);
        } else if (overlap_app->parsed()) {
            overlap.run(overlap_params);
        } else if (confounder_app->parsed()) {
            sensitivity.run_confounder(confounder_params);
        } else if (shift_app->parsed()) {
            sensitivity.run_shift(shift_params);
        } else if (synth_app->parsed()) {
            synth.run(synth_params);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return classify_exception();
    }
    return 0;
}
