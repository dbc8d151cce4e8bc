#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sbb/data_model.hpp"
#include "sbb/rng.hpp"

namespace sbb {

enum class AtomKind { observation, cluster };

/// How cluster-level bootstrap weights absorb the survey design.
///
/// product_normalized: draw g from the flat Dirichlet over clusters and
/// return g_q * f_q renormalized to sum to one, so the estimate stays a
/// convex combination of cluster means. pseudo_posterior: draw directly
/// from Dirichlet(f_1, ..., f_l), the conjugate posterior implied by the
/// pseudo-likelihood prod_q pi_q^{f_q} under a Haldane prior.
enum class ScaledWeightMode { product_normalized, pseudo_posterior };

ScaledWeightMode parse_mode(const std::string& name); // "product" | "pseudo"
std::string mode_name(ScaledWeightMode mode);

/// One Bayesian-bootstrap weight vector over atoms.
struct BBWeightDraw {
    std::vector<double> weights; // nonnegative, sums to 1
    AtomKind atom_kind = AtomKind::observation;
};

/// Posterior draws of a scalar with equal-tailed credible interval.
struct PosteriorSummary {
    std::vector<double> draws;
    double mean = 0.0;
    double sd = 0.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    double level = 0.95;

    static PosteriorSummary from_draws(std::vector<double> draws, double level = 0.95);
};

/// Flat Dirichlet over k atoms (unit exponentials normalized by their sum).
BBWeightDraw draw_dirichlet_flat(std::size_t k, Rng& rng,
                                 AtomKind kind = AtomKind::observation);

/// Cluster-level weight draw scaled by f_q = n_q * mean weight.
BBWeightDraw draw_scaled_cluster_weights(const SurveyDataset& dataset, ScaledWeightMode mode,
                                         Rng& rng);

/// Posterior draws of the population average effect: each output draw pairs
/// one CATE draw row (cycling through rows) with a fresh independent
/// cluster-weight draw, then averages unweighted within-cluster CATE means
/// under those weights.
PosteriorSummary estimate_pate(const SurveyDataset& dataset, const CateDraws& cate,
                               ScaledWeightMode mode, std::size_t n_bb, Rng& rng,
                               double level = 0.95);

/// Same machinery with a column of observed values in place of CATE draws
/// (a degenerate 1 x m draw matrix). Empty column name means the dataset's
/// designated outcome.
PosteriorSummary estimate_mean(const SurveyDataset& dataset, const std::string& outcome_column,
                               ScaledWeightMode mode, std::size_t n_bb, Rng& rng,
                               double level = 0.95);

} // namespace sbb
