#include "sbb/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sbb/stats.hpp"

namespace sbb {

ScaledWeightMode parse_mode(const std::string& name) {
    if (name == "product") {
        return ScaledWeightMode::product_normalized;
    }
    if (name == "pseudo") {
        return ScaledWeightMode::pseudo_posterior;
    }
    throw SpecError("unknown weight mode '" + name + "' (expected 'product' or 'pseudo')");
}

std::string mode_name(ScaledWeightMode mode) {
    return mode == ScaledWeightMode::product_normalized ? "product" : "pseudo";
}

PosteriorSummary PosteriorSummary::from_draws(std::vector<double> draws, double level) {
    if (draws.empty()) {
        throw std::invalid_argument("PosteriorSummary: no draws");
    }
    if (!(level > 0.0 && level < 1.0)) {
        throw std::invalid_argument("PosteriorSummary: level must be in (0, 1)");
    }
    PosteriorSummary s;
    s.level = level;
    s.mean = sbb::mean(draws);
    s.sd = sample_sd(draws);
    std::vector<double> sorted = draws;
    std::sort(sorted.begin(), sorted.end());
    const double alpha = 1.0 - level;
    s.ci_lower = quantile_sorted(sorted, alpha / 2.0);
    s.ci_upper = quantile_sorted(sorted, 1.0 - alpha / 2.0);
    s.draws = std::move(draws);
    return s;
}

BBWeightDraw draw_dirichlet_flat(std::size_t k, Rng& rng, AtomKind kind) {
    if (k == 0) {
        throw std::invalid_argument("draw_dirichlet_flat: k must be >= 1");
    }
    BBWeightDraw draw;
    draw.atom_kind = kind;
    draw.weights.resize(k);
    double total = 0.0;
    for (auto& w : draw.weights) {
        w = rng.exponential();
        total += w;
    }
    for (auto& w : draw.weights) {
        w /= total;
    }
    return draw;
}

BBWeightDraw draw_scaled_cluster_weights(const SurveyDataset& dataset, ScaledWeightMode mode,
                                         Rng& rng) {
    const auto& clusters = dataset.clusters();
    if (clusters.empty()) {
        throw ValidationError("draw_scaled_cluster_weights: dataset has no clusters");
    }
    BBWeightDraw draw;
    draw.atom_kind = AtomKind::cluster;
    draw.weights.resize(clusters.size());
    double total = 0.0;
    for (std::size_t q = 0; q < clusters.size(); ++q) {
        const double f = clusters[q].f();
        if (!(f > 0.0) || !std::isfinite(f)) {
            throw ValidationError("cluster '" + clusters[q].label +
                                  "' has non-positive weighted count f_q");
        }
        const double g = mode == ScaledWeightMode::product_normalized
                             ? rng.exponential() * f
                             : rng.gamma(f);
        draw.weights[q] = g;
        total += g;
    }
    for (auto& w : draw.weights) {
        w /= total;
    }
    return draw;
}

namespace {

// Unweighted within-cluster means of one draw row.
std::vector<double> cluster_means(const SurveyDataset& dataset, const CateDraws& cate,
                                  std::size_t draw_row) {
    std::vector<double> out(dataset.n_clusters());
    const auto& clusters = dataset.clusters();
    for (std::size_t q = 0; q < clusters.size(); ++q) {
        double s = 0.0;
        for (std::size_t j : clusters[q].members) {
            s += cate.at(draw_row, j);
        }
        out[q] = s / static_cast<double>(clusters[q].members.size());
    }
    return out;
}

} // namespace

PosteriorSummary estimate_pate(const SurveyDataset& dataset, const CateDraws& cate,
                               ScaledWeightMode mode, std::size_t n_bb, Rng& rng,
                               double level) {
    if (dataset.n_obs() == 0) {
        throw ValidationError("estimate_pate: empty dataset");
    }
    if (cate.n_obs() != dataset.n_obs()) {
        throw AlignmentError("estimate_pate: CATE draws have " + std::to_string(cate.n_obs()) +
                             " columns, dataset has " + std::to_string(dataset.n_obs()) +
                             " observations");
    }
    if (n_bb == 0) {
        throw std::invalid_argument("estimate_pate: n_bb must be >= 1");
    }

    const std::size_t rows_used = std::min<std::size_t>(cate.n_draws(), n_bb);
    std::vector<std::vector<double>> means(rows_used);
    for (std::size_t d = 0; d < rows_used; ++d) {
        means[d] = cluster_means(dataset, cate, d);
    }

    std::vector<double> draws(n_bb);
    for (std::size_t t = 0; t < n_bb; ++t) {
        const std::size_t d = t % cate.n_draws();
        const BBWeightDraw pi = draw_scaled_cluster_weights(dataset, mode, rng);
        double v = 0.0;
        const auto& m = means[d];
        for (std::size_t q = 0; q < m.size(); ++q) {
            v += pi.weights[q] * m[q];
        }
        draws[t] = v;
    }
    return PosteriorSummary::from_draws(std::move(draws), level);
}

PosteriorSummary estimate_mean(const SurveyDataset& dataset, const std::string& outcome_column,
                               ScaledWeightMode mode, std::size_t n_bb, Rng& rng,
                               double level) {
    const std::vector<double>& y = dataset.analysis_column(outcome_column);
    const CateDraws values = CateDraws::from_matrix(1, y.size(), y);
    return estimate_pate(dataset, values, mode, n_bb, rng, level);
}

} // namespace sbb
