#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "sbb/bootstrap.hpp"
#include "sbb/estimators.hpp"

using namespace sbb;

namespace {

SurveyDataset two_cluster_dataset(double f1, double f2) {
    // One observation per cluster carrying the whole cluster weight.
    SurveyColumns cols;
    cols.strata = {"A", "A"};
    cols.clusters = {"c1", "c2"};
    cols.weights = {f1, f2};
    return SurveyDataset::from_columns(std::move(cols));
}

} // namespace

TEST_CASE("flat Dirichlet over a single atom is always 1") {
    Rng rng(1);
    for (int i = 0; i < 20; ++i) {
        const BBWeightDraw draw = draw_dirichlet_flat(1, rng);
        REQUIRE(draw.weights.size() == 1);
        CHECK(draw.weights[0] == 1.0);
    }
}

TEST_CASE("flat Dirichlet coordinate means converge to 1/k") {
    Rng rng(2);
    double sum0 = 0.0, sum1 = 0.0, sum2 = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const BBWeightDraw draw = draw_dirichlet_flat(3, rng);
        sum0 += draw.weights[0];
        sum1 += draw.weights[1];
        sum2 += draw.weights[2];
    }
    CHECK(std::abs(sum0 / n - 1.0 / 3.0) < 0.01);
    CHECK(std::abs(sum1 / n - 1.0 / 3.0) < 0.01);
    CHECK(std::abs(sum2 / n - 1.0 / 3.0) < 0.01);
}

TEST_CASE("weight draws live on the simplex") {
    Rng rng(3);
    for (int rep = 0; rep < 250; ++rep) {
        const auto k = 1 + rng.uniform_index(50);
        const BBWeightDraw draw = draw_dirichlet_flat(k, rng);
        double total = 0.0;
        for (double w : draw.weights) {
            CHECK(w >= 0.0);
            total += w;
        }
        CHECK(std::abs(total - 1.0) <= 1e-12);
    }
}

TEST_CASE("k = 0 is rejected") {
    Rng rng(4);
    CHECK_THROWS_AS(draw_dirichlet_flat(0, rng), std::invalid_argument);
}

TEST_CASE("single-cluster scaled draws are degenerate in both modes") {
    SurveyColumns cols;
    cols.strata = {"A", "A"};
    cols.clusters = {"c1", "c1"};
    cols.weights = {2.0, 3.0};
    const SurveyDataset ds = SurveyDataset::from_columns(std::move(cols));
    Rng rng(5);
    for (const auto mode :
         {ScaledWeightMode::product_normalized, ScaledWeightMode::pseudo_posterior}) {
        const BBWeightDraw draw = draw_scaled_cluster_weights(ds, mode, rng);
        REQUIRE(draw.weights.size() == 1);
        CHECK(draw.weights[0] == 1.0);
    }
}

TEST_CASE("pseudo-posterior coordinate mean is f1 / (f1 + f2)") {
    const SurveyDataset ds = two_cluster_dataset(10.0, 30.0);
    Rng rng(6);
    double total = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        total += draw_scaled_cluster_weights(ds, ScaledWeightMode::pseudo_posterior, rng)
                     .weights[0];
    }
    CHECK(std::abs(total / n - 0.25) < 0.01);
}

TEST_CASE("product-normalized coordinate mean matches a Monte Carlo oracle") {
    // Oracle: E[10 g / (10 g + 30 (1 - g))], g ~ Uniform(0, 1), computed
    // with its own generator and a million samples.
    Rng oracle_rng(123456);
    double oracle_sum = 0.0;
    const int oracle_n = 1000000;
    for (int i = 0; i < oracle_n; ++i) {
        const double g = oracle_rng.uniform01();
        oracle_sum += 10.0 * g / (10.0 * g + 30.0 * (1.0 - g));
    }
    const double oracle = oracle_sum / oracle_n;

    const SurveyDataset ds = two_cluster_dataset(10.0, 30.0);
    Rng rng(7);
    double total = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        total += draw_scaled_cluster_weights(ds, ScaledWeightMode::product_normalized, rng)
                     .weights[0];
    }
    CHECK(std::abs(total / n - oracle) < 0.01);
}

TEST_CASE("constant CATE draws return the constant") {
    Rng data_rng(8);
    const SurveyDataset ds = testutil::random_dataset(data_rng, false);
    const double c = 0.437;
    const CateDraws cate =
        CateDraws::from_matrix(2, ds.n_obs(), std::vector<double>(2 * ds.n_obs(), c));
    Rng rng(9);
    const PosteriorSummary s =
        estimate_pate(ds, cate, ScaledWeightMode::product_normalized, 200, rng);
    for (double d : s.draws) {
        CHECK(d == doctest::Approx(c).epsilon(1e-12));
    }
}

TEST_CASE("single cluster: draws alternate between within-cluster means") {
    SurveyColumns cols;
    cols.strata = {"A", "A"};
    cols.clusters = {"c1", "c1"};
    cols.weights = {1.0, 1.0};
    const SurveyDataset ds = SurveyDataset::from_columns(std::move(cols));
    const CateDraws cate = CateDraws::from_matrix(2, 2, {0.1, 0.3, 0.2, 0.4});
    Rng rng(10);
    const PosteriorSummary s =
        estimate_pate(ds, cate, ScaledWeightMode::product_normalized, 6, rng);
    const double mean_row0 = (0.1 + 0.3) / 2.0;
    const double mean_row1 = (0.2 + 0.4) / 2.0;
    for (std::size_t t = 0; t < s.draws.size(); ++t) {
        CHECK(s.draws[t] == (t % 2 == 0 ? mean_row0 : mean_row1));
    }
}

TEST_CASE("degenerate CATE posterior mean agrees with the design-based oracle") {
    // Zero-variance CATE per observation; the scaled bootstrap posterior
    // mean should sit within Monte Carlo error of the Hajek weighted mean.
    Rng data_rng(11);
    SurveyColumns cols;
    std::vector<double> cate_values;
    Rng value_rng(12);
    for (int h = 0; h < 2; ++h) {
        for (int c = 0; c < 12; ++c) {
            const double w = 0.5 + 2.0 * value_rng.uniform01(); // cluster-constant weights
            const auto members = 2 + value_rng.uniform_index(4);
            for (std::uint64_t j = 0; j < members; ++j) {
                cols.strata.push_back("S" + std::to_string(h));
                cols.clusters.push_back("S" + std::to_string(h) + "C" + std::to_string(c));
                cols.weights.push_back(w);
                cate_values.push_back(0.2 + 0.5 * value_rng.uniform01());
            }
        }
    }
    cols.outcome = cate_values;
    cols.outcome_name = "cate_hat";
    const SurveyDataset ds = SurveyDataset::from_columns(std::move(cols));
    const CateDraws cate = CateDraws::from_matrix(1, cate_values.size(), cate_values);

    const PointEstimate design = design_mean(ds);
    const std::size_t n_bb = 4000;
    Rng rng(13);
    const PosteriorSummary bb =
        estimate_pate(ds, cate, ScaledWeightMode::product_normalized, n_bb, rng);
    const double mc_se = bb.sd / std::sqrt(static_cast<double>(n_bb));
    CHECK(std::abs(bb.mean - design.value) < 2.0 * mc_se);
}

TEST_CASE("estimate_mean of a constant outcome is the constant") {
    SurveyColumns cols;
    cols.strata = {"A", "A", "B"};
    cols.clusters = {"c1", "c1", "c2"};
    cols.weights = {1.0, 2.0, 3.0};
    cols.outcome = std::vector<double>{5.0, 5.0, 5.0};
    cols.outcome_name = "y";
    const SurveyDataset ds = SurveyDataset::from_columns(std::move(cols));
    Rng rng(14);
    const PosteriorSummary s =
        estimate_mean(ds, "", ScaledWeightMode::pseudo_posterior, 100, rng);
    for (double d : s.draws) {
        CHECK(d == doctest::Approx(5.0).epsilon(1e-12));
    }
    CHECK(s.sd == doctest::Approx(0.0).scale(1).epsilon(1e-12));
}

TEST_CASE("estimate_mean agrees with the design-based estimate on survey-like data") {
    Rng data_rng(15);
    const SurveyDataset ds = testutil::random_dataset(data_rng, true, true, 2);
    const PointEstimate design = design_mean(ds);
    const std::size_t n_bb = 4000;
    Rng rng(16);
    const PosteriorSummary bb = estimate_mean(ds, "", ScaledWeightMode::pseudo_posterior, n_bb, rng);
    const double mc_se = bb.sd / std::sqrt(static_cast<double>(n_bb));
    CHECK(std::abs(bb.mean - design.value) < 2.0 * mc_se);
}

TEST_CASE("missing outcome or misalignment raise errors") {
    Rng data_rng(17);
    const SurveyDataset no_outcome = testutil::random_dataset(data_rng, false);
    Rng rng(18);
    CHECK_THROWS_AS(estimate_mean(no_outcome, "", ScaledWeightMode::product_normalized, 10, rng),
                    ValidationError);
    const SurveyDataset with_outcome = testutil::random_dataset(data_rng, true);
    const CateDraws wrong =
        CateDraws::from_matrix(1, with_outcome.n_obs() + 1,
                               std::vector<double>(with_outcome.n_obs() + 1, 0.0));
    CHECK_THROWS_AS(
        estimate_pate(with_outcome, wrong, ScaledWeightMode::product_normalized, 10, rng),
        AlignmentError);
    const CateDraws ok =
        CateDraws::from_matrix(1, with_outcome.n_obs(),
                               std::vector<double>(with_outcome.n_obs(), 0.0));
    CHECK_THROWS_AS(
        estimate_pate(with_outcome, ok, ScaledWeightMode::product_normalized, 0, rng),
        std::invalid_argument);
}

TEST_CASE("property: convexity, location equivariance, determinism") {
    Rng case_rng(19);
    int cases = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const std::uint64_t seed = case_rng.next_u64();
        Rng data_rng(seed);
        const SurveyDataset ds = testutil::random_dataset(data_rng, false);
        const std::size_t n_draws = 1 + data_rng.uniform_index(3);
        std::vector<double> values(n_draws * ds.n_obs());
        for (auto& v : values) {
            v = 2.0 * data_rng.uniform01() - 1.0;
        }
        const CateDraws cate = CateDraws::from_matrix(n_draws, ds.n_obs(), values);
        const auto mode = rep % 2 == 0 ? ScaledWeightMode::product_normalized
                                       : ScaledWeightMode::pseudo_posterior;

        Rng rng_a(seed + 1);
        const PosteriorSummary a = estimate_pate(ds, cate, mode, 8, rng_a);

        // Determinism: same seed, same draws.
        Rng rng_b(seed + 1);
        const PosteriorSummary b = estimate_pate(ds, cate, mode, 8, rng_b);
        CHECK(a.draws == b.draws);

        // Convexity: each draw lies between the extreme cluster means of
        // its row.
        for (std::size_t t = 0; t < a.draws.size(); ++t) {
            const std::size_t d = t % n_draws;
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (const auto& cluster : ds.clusters()) {
                double m = 0.0;
                for (std::size_t j : cluster.members) {
                    m += cate.at(d, j);
                }
                m /= static_cast<double>(cluster.members.size());
                lo = std::min(lo, m);
                hi = std::max(hi, m);
            }
            CHECK(a.draws[t] >= lo - 1e-12);
            CHECK(a.draws[t] <= hi + 1e-12);
        }

        // Location equivariance: shifting every entry by c shifts draws by c.
        const double shift = 2.0 * data_rng.uniform01() - 1.0;
        std::vector<double> shifted = values;
        for (auto& v : shifted) {
            v += shift;
        }
        const CateDraws cate_shifted = CateDraws::from_matrix(n_draws, ds.n_obs(), shifted);
        Rng rng_c(seed + 1);
        const PosteriorSummary c = estimate_pate(ds, cate_shifted, mode, 8, rng_c);
        for (std::size_t t = 0; t < a.draws.size(); ++t) {
            CHECK(c.draws[t] == doctest::Approx(a.draws[t] + shift).epsilon(1e-12));
        }
        ++cases;
    }
    CHECK(cases == 200);
}

TEST_CASE("pseudo-posterior moments match f_q / sum(f) within 3 MC errors") {
    Rng data_rng(20);
    const SurveyDataset ds = testutil::random_dataset(data_rng, false);
    std::vector<double> f;
    double f_total = 0.0;
    for (const auto& cluster : ds.clusters()) {
        f.push_back(cluster.f());
        f_total += cluster.f();
    }
    const int n = 10000;
    std::vector<double> sums(f.size(), 0.0);
    Rng rng(21);
    for (int i = 0; i < n; ++i) {
        const BBWeightDraw draw =
            draw_scaled_cluster_weights(ds, ScaledWeightMode::pseudo_posterior, rng);
        for (std::size_t q = 0; q < f.size(); ++q) {
            sums[q] += draw.weights[q];
        }
    }
    for (std::size_t q = 0; q < f.size(); ++q) {
        const double p = f[q] / f_total;
        const double sd = std::sqrt(p * (1.0 - p) / (f_total + 1.0));
        const double mc_se = sd / std::sqrt(static_cast<double>(n));
        CHECK(std::abs(sums[q] / n - p) < 3.0 * mc_se + 1e-12);
    }
}

TEST_CASE("posterior summary intervals are ordered and quantile-based") {
    PosteriorSummary s = PosteriorSummary::from_draws({3.0, 1.0, 2.0, 4.0, 5.0}, 0.5);
    CHECK(s.ci_lower <= s.ci_upper);
    CHECK(s.mean == doctest::Approx(3.0));
    CHECK(s.ci_lower == doctest::Approx(2.0)); // type-7 quantile at 0.25
    CHECK(s.ci_upper == doctest::Approx(4.0));
    CHECK_THROWS_AS(PosteriorSummary::from_draws({}, 0.95), std::invalid_argument);
}
