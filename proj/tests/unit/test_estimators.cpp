#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "sbb/estimators.hpp"
#include "sbb/serialize.hpp"

using namespace sbb;

namespace {

SurveyDataset dataset_from(std::vector<std::string> strata, std::vector<std::string> clusters,
                           std::vector<double> weights, std::vector<double> outcome) {
    SurveyColumns cols;
    cols.strata = std::move(strata);
    cols.clusters = std::move(clusters);
    cols.weights = std::move(weights);
    cols.outcome = std::move(outcome);
    cols.outcome_name = "y";
    return SurveyDataset::from_columns(std::move(cols));
}

// Direct transcription of the linearized variance formula, kept separate
// from the implementation as a check.
double reference_design_variance(const SurveyDataset& ds, const std::vector<double>& y) {
    double w_total = 0.0;
    double wy = 0.0;
    for (std::size_t i = 0; i < ds.n_obs(); ++i) {
        w_total += ds.weights()[i];
        wy += ds.weights()[i] * y[i];
    }
    const double estimate = wy / w_total;
    double variance = 0.0;
    for (std::size_t h = 0; h < ds.n_strata(); ++h) {
        std::vector<double> totals;
        for (const auto& cluster : ds.clusters()) {
            if (cluster.stratum_index != h) {
                continue;
            }
            double z = 0.0;
            for (std::size_t i : cluster.members) {
                z += ds.weights()[i] * (y[i] - estimate) / w_total;
            }
            totals.push_back(z);
        }
        const double n_h = static_cast<double>(totals.size());
        double zbar = 0.0;
        for (double z : totals) {
            zbar += z;
        }
        zbar /= n_h;
        double ss = 0.0;
        for (double z : totals) {
            ss += (z - zbar) * (z - zbar);
        }
        variance += n_h / (n_h - 1.0) * ss;
    }
    return variance;
}

} // namespace

TEST_CASE("naive mean of {1,2,3}") {
    const SurveyDataset ds =
        dataset_from({"A", "A", "A"}, {"c1", "c2", "c3"}, {1, 1, 1}, {1.0, 2.0, 3.0});
    const PointEstimate e = naive_mean(ds);
    CHECK(e.value == doctest::Approx(2.0));
    CHECK(e.std_error == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
    CHECK(e.ci_lower < e.value);
    CHECK(e.value < e.ci_upper);
}

TEST_CASE("naive mean of constant outcomes has zero standard error") {
    const SurveyDataset ds =
        dataset_from({"A", "A"}, {"c1", "c2"}, {1, 1}, {4.0, 4.0});
    const PointEstimate e = naive_mean(ds);
    CHECK(e.std_error == 0.0);
    CHECK(e.ci_lower == e.value);
}

TEST_CASE("naive mean requires two observations") {
    const SurveyDataset ds = dataset_from({"A"}, {"c1"}, {1}, {4.0});
    CHECK_THROWS_AS(naive_mean(ds), ValidationError);
}

TEST_CASE("design mean matches the hand-computed toy example") {
    // 2 strata x 2 clusters, one observation each, weights {2,2,1,1},
    // outcomes {1,3,2,4}: estimate 7/3, variance 5/9.
    const SurveyDataset ds = dataset_from({"A", "A", "B", "B"}, {"c1", "c2", "c3", "c4"},
                                          {2, 2, 1, 1}, {1.0, 3.0, 2.0, 4.0});
    const PointEstimate e = design_mean(ds);
    CHECK(e.value == doctest::Approx(7.0 / 3.0).epsilon(1e-12));
    CHECK(e.std_error * e.std_error == doctest::Approx(5.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("design mean with equal weights and one stratum is the plain mean") {
    const SurveyDataset ds = dataset_from({"A", "A", "A", "A"}, {"c1", "c1", "c2", "c2"},
                                          {3, 3, 3, 3}, {1.0, 5.0, 2.0, 8.0});
    const PointEstimate e = design_mean(ds);
    CHECK(e.value == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("single-cluster stratum errors unless marked certainty") {
    const SurveyDataset ds =
        dataset_from({"A", "A", "B"}, {"c1", "c2", "c3"}, {1, 1, 1}, {1.0, 2.0, 3.0});
    CHECK_THROWS_WITH_AS(design_mean(ds), doctest::Contains("certainty"), ValidationError);
    const PointEstimate e = design_mean(ds, "", 0.95, true);
    CHECK(e.value == doctest::Approx(2.0));
}

TEST_CASE("design mean matches an independent reimplementation on random data") {
    Rng rng(31);
    for (int rep = 0; rep < 100; ++rep) {
        const SurveyDataset ds = testutil::random_dataset(rng, true, false, 2);
        const PointEstimate e = design_mean(ds);
        const double ref = reference_design_variance(ds, ds.outcome());
        CHECK(e.std_error * e.std_error == doctest::Approx(ref).epsilon(1e-10));
    }
}

TEST_CASE("property: weight rescaling leaves the design estimate unchanged") {
    Rng rng(32);
    int cases = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const SurveyDataset ds = testutil::random_dataset(rng, true, false, 2);
        const double scale = 0.1 + 10.0 * rng.uniform01();
        SurveyColumns cols;
        for (std::size_t i = 0; i < ds.n_obs(); ++i) {
            cols.strata.push_back(ds.stratum_labels()[ds.stratum_of(i)]);
            cols.clusters.push_back(ds.clusters()[ds.cluster_of(i)].label);
            cols.weights.push_back(ds.weights()[i] * scale);
        }
        cols.outcome = ds.outcome();
        cols.outcome_name = "y";
        const SurveyDataset scaled = SurveyDataset::from_columns(std::move(cols));
        const PointEstimate a = design_mean(ds);
        const PointEstimate b = design_mean(scaled);
        CHECK(b.value == doctest::Approx(a.value).epsilon(1e-12));
        CHECK(b.std_error == doctest::Approx(a.std_error).epsilon(1e-10));
        const auto& y = ds.outcome();
        CHECK(a.value >= *std::min_element(y.begin(), y.end()) - 1e-12);
        CHECK(a.value <= *std::max_element(y.begin(), y.end()) + 1e-12);
        ++cases;
    }
    CHECK(cases == 200);
}

TEST_CASE("one cluster per observation, equal weights: design variance equals naive") {
    Rng rng(33);
    for (int rep = 0; rep < 50; ++rep) {
        const auto n = 2 + rng.uniform_index(20);
        SurveyColumns cols;
        std::vector<double> y;
        for (std::uint64_t i = 0; i < n; ++i) {
            cols.strata.push_back("A");
            cols.clusters.push_back("c" + std::to_string(i));
            cols.weights.push_back(2.5);
            y.push_back(rng.normal());
        }
        cols.outcome = y;
        cols.outcome_name = "y";
        const SurveyDataset ds = SurveyDataset::from_columns(std::move(cols));
        const PointEstimate design = design_mean(ds);
        const PointEstimate naive = naive_mean(ds);
        CHECK(design.value == doctest::Approx(naive.value).epsilon(1e-12));
        CHECK(design.std_error == doctest::Approx(naive.std_error).epsilon(1e-10));
    }
}

TEST_CASE("normal interval quantile") {
    CHECK(normal_interval_z(0.95) == doctest::Approx(1.959963985).epsilon(1e-8));
    CHECK(normal_interval_z(0.5) == doctest::Approx(0.674489750).epsilon(1e-8));
}

TEST_CASE("point estimates share the posterior summary JSON envelope") {
    const SurveyDataset ds =
        dataset_from({"A", "A", "A"}, {"c1", "c2", "c3"}, {1, 1, 1}, {1.0, 2.0, 3.0});
    const nlohmann::json point = to_json(naive_mean(ds));
    const nlohmann::json posterior =
        to_json(PosteriorSummary::from_draws({1.0, 2.0, 3.0}, 0.95));
    for (const auto& key : {"method", "mean", "sd", "ci_lower", "ci_upper", "level"}) {
        CHECK(point.contains(key));
        CHECK(posterior.contains(key));
    }
    CHECK(point["method"] == "naive");
}
