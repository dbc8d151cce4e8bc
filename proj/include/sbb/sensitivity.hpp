#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sbb/bootstrap.hpp"
#include "sbb/data_model.hpp"

namespace sbb {

/// Hypothetical binary confounder: additive shift kappa applied with the
/// given sign, prevalence swept over xi_grid.
struct ConfounderSpec {
    double kappa = 0.66;
    int sign = -1; // +1 or -1
    std::vector<double> xi_grid; // in [0, 1], strictly increasing
};

/// Bounded distribution shift of an unobserved effect modifier: the density
/// ratio z is confined to [1/Gamma, Gamma] within each covariate cell.
struct ShiftSpec {
    std::vector<double> gamma_grid;   // >= 1, strictly increasing
    std::vector<std::string> cell_of; // per observation; empty: one marginal cell
};

/// Effect values among source compliers per cell, with base weights
/// (normalized internally; uniform when omitted).
struct CellEffects {
    struct Cell {
        std::vector<double> tau;
        std::vector<double> omega; // same length as tau, or empty for uniform
    };
    std::map<std::string, Cell> cells;
};

/// Clamp to [-1, 1]: keeps modified effects on a plausible proportion scale.
double clip_h(double x);

struct ConfounderPoint {
    double xi = 0.0;
    PosteriorSummary summary;
};

struct ShiftPoint {
    double gamma = 1.0;
    PosteriorSummary lower;
    PosteriorSummary upper;
};

/// Curve of either kind, tagged.
struct SensitivityCurve {
    enum class Kind { confounder, shift };
    Kind kind = Kind::confounder;
    std::vector<ConfounderPoint> confounder;
    std::vector<ShiftPoint> shift;
};

/// For each prevalence xi, every effect entry c becomes its analytic
/// expectation over the confounder, (1 - xi) h(c) + xi h(c + sign * kappa),
/// and the estimate is rerun with the same seed at every grid point
/// (common random numbers, so the curve is smooth in xi).
SensitivityCurve pate_confounder_curve(const SurveyDataset& dataset, const CateDraws& cate,
                                       const ConfounderSpec& spec, ScaledWeightMode mode,
                                       std::size_t n_bb, std::uint64_t seed,
                                       double level = 0.95, int threads = 1);

enum class LpDirection { minimize, maximize };

struct LpBound {
    double value = 0.0;
    std::vector<double> z; // optimal density ratios
};

/// Exactly optimize sum_i omega_i z_i tau_i subject to z_i in [1/gamma,
/// gamma] and sum_i omega_i z_i = 1, via the substitution a_i = omega_i z_i
/// (box constraints plus one equality): start every a_i at its lower bound
/// and pour the remaining mass greedily along the tau order.
LpBound lp_bound_greedy(const std::vector<double>& tau, const std::vector<double>& omega,
                        double gamma, LpDirection direction);

/// Independent check: enumerate the vertices of the feasible polytope
/// (all-but-one coordinate at a box bound) and take the extreme objective.
/// Refuses n > 12.
double lp_bound_oracle(const std::vector<double>& tau, const std::vector<double>& omega,
                       double gamma, LpDirection direction);

/// Per gamma: cell-level min/max reweighted effects from the LP, aggregated
/// over the target covariate distribution with the same cluster bootstrap
/// weights as estimate_pate (cells weighted by their bootstrap-weighted
/// target share). Common random numbers across the grid keep the bounds
/// monotone draw-wise.
SensitivityCurve pate_shift_bounds(const SurveyDataset& dataset, const CateDraws& cate,
                                   const CellEffects& effects, const ShiftSpec& spec,
                                   ScaledWeightMode mode, std::size_t n_bb,
                                   std::uint64_t seed, double level = 0.95, int threads = 1);

/// 15 log-spaced points on [1, 8].
std::vector<double> default_gamma_grid();

void write_confounder_csv(const SensitivityCurve& curve, const std::string& path);
void write_shift_csv(const SensitivityCurve& curve, const std::string& path);

} // namespace sbb
