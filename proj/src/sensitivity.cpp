#include "sbb/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "sbb/csv.hpp"
#include "sbb/stats.hpp"

namespace sbb {

double clip_h(double x) { return std::max(std::min(x, 1.0), -1.0); }

namespace {

void check_increasing(const std::vector<double>& grid, double lo, const std::string& what) {
    if (grid.empty()) {
        throw SpecError(what + " grid is empty");
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i]) || grid[i] < lo) {
            throw SpecError(what + " grid values must be finite and >= " + format_double(lo));
        }
        if (i > 0 && !(grid[i] > grid[i - 1])) {
            throw SpecError(what + " grid must be strictly increasing");
        }
    }
}

} // namespace

SensitivityCurve pate_confounder_curve(const SurveyDataset& dataset, const CateDraws& cate,
                                       const ConfounderSpec& spec, ScaledWeightMode mode,
                                       std::size_t n_bb, std::uint64_t seed, double level,
                                       int threads) {
    if (!std::isfinite(spec.kappa)) {
        throw SpecError("confounder shift kappa must be finite");
    }
    if (spec.sign != 1 && spec.sign != -1) {
        throw SpecError("confounder sign must be +1 or -1");
    }
    check_increasing(spec.xi_grid, 0.0, "xi");
    if (spec.xi_grid.back() > 1.0) {
        throw SpecError("xi grid values must lie in [0, 1]");
    }

    SensitivityCurve curve;
    curve.kind = SensitivityCurve::Kind::confounder;
    curve.confounder.resize(spec.xi_grid.size());
    const double shift = spec.sign * spec.kappa;

    parallel_for(spec.xi_grid.size(), threads, [&](std::size_t g) {
        const double xi = spec.xi_grid[g];
        std::vector<double> adjusted(cate.values().size());
        for (std::size_t k = 0; k < adjusted.size(); ++k) {
            const double c = cate.values()[k];
            adjusted[k] = (1.0 - xi) * clip_h(c) + xi * clip_h(c + shift);
        }
        const CateDraws modified =
            CateDraws::from_matrix(cate.n_draws(), cate.n_obs(), std::move(adjusted));
        Rng rng(seed); // common random numbers across the grid
        curve.confounder[g].xi = xi;
        curve.confounder[g].summary = estimate_pate(dataset, modified, mode, n_bb, rng, level);
    });
    return curve;
}

LpBound lp_bound_greedy(const std::vector<double>& tau, const std::vector<double>& omega,
                        double gamma, LpDirection direction) {
    const std::size_t n = tau.size();
    if (n == 0 || omega.size() != n) {
        throw SpecError("lp_bound_greedy: tau and omega must be non-empty and aligned");
    }
    if (!(gamma >= 1.0) || !std::isfinite(gamma)) {
        throw SpecError("lp_bound_greedy: gamma must be >= 1");
    }
    double omega_sum = 0.0;
    for (double w : omega) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw SpecError("lp_bound_greedy: base weights must be nonnegative");
        }
        omega_sum += w;
    }
    if (std::abs(omega_sum - 1.0) > 1e-9) {
        throw SpecError("lp_bound_greedy: base weights must sum to 1");
    }

    // Substitute a_i = omega_i z_i: box [omega_i/gamma, omega_i*gamma] with
    // sum a_i = 1. Start at the lower bounds and pour the free mass onto the
    // most favorable units first; at most one unit ends partially filled.
    std::vector<double> a(n);
    double free_mass = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = omega[i] / gamma;
        free_mass -= a[i];
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (direction == LpDirection::maximize) {
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t l, std::size_t r) { return tau[l] > tau[r]; });
    } else {
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t l, std::size_t r) { return tau[l] < tau[r]; });
    }
    for (std::size_t i : order) {
        if (free_mass <= 0.0) {
            break;
        }
        const double capacity = omega[i] * gamma - a[i];
        const double add = std::min(capacity, free_mass);
        a[i] += add;
        free_mass -= add;
    }

    LpBound out;
    out.z.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.value += a[i] * tau[i];
        out.z[i] = omega[i] > 0.0 ? a[i] / omega[i] : 1.0;
    }
    return out;
}

double lp_bound_oracle(const std::vector<double>& tau, const std::vector<double>& omega,
                       double gamma, LpDirection direction) {
    const std::size_t n = tau.size();
    if (n > 12) {
        throw SpecError("lp_bound_oracle: vertex enumeration refused for n > 12");
    }
    if (n == 0 || omega.size() != n) {
        throw SpecError("lp_bound_oracle: tau and omega must be non-empty and aligned");
    }
    if (!(gamma >= 1.0)) {
        throw SpecError("lp_bound_oracle: gamma must be >= 1");
    }

    std::vector<double> lb(n);
    std::vector<double> ub(n);
    double omega_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(omega[i] >= 0.0) || !std::isfinite(omega[i])) {
            throw SpecError("lp_bound_oracle: base weights must be nonnegative");
        }
        lb[i] = omega[i] / gamma;
        ub[i] = omega[i] * gamma;
        omega_sum += omega[i];
    }
    if (std::abs(omega_sum - 1.0) > 1e-9) {
        throw SpecError("lp_bound_oracle: base weights must sum to 1");
    }
    // Weights normalized only to 1e-9 can leave the exact equality just
    // outside every box corner; widen feasibility by the actual defect.
    const double slack = 1e-12 + 2.0 * std::abs(omega_sum - 1.0);
    const bool maximize = direction == LpDirection::maximize;
    double best = maximize ? -std::numeric_limits<double>::infinity()
                           : std::numeric_limits<double>::infinity();
    bool found = false;
    // Every vertex pins all but one coordinate to a box bound; the equality
    // constraint determines the remaining one.
    for (std::size_t freed = 0; freed < n; ++freed) {
        const std::size_t n_fixed = n - 1;
        for (std::uint64_t mask = 0; mask < (1ULL << n_fixed); ++mask) {
            double total = 0.0;
            double objective = 0.0;
            std::size_t bit = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (i == freed) {
                    continue;
                }
                const double v = ((mask >> bit) & 1ULL) ? ub[i] : lb[i];
                total += v;
                objective += v * tau[i];
                ++bit;
            }
            const double rest = 1.0 - total;
            if (rest < lb[freed] - slack || rest > ub[freed] + slack) {
                continue;
            }
            objective += rest * tau[freed];
            best = maximize ? std::max(best, objective) : std::min(best, objective);
            found = true;
        }
    }
    if (!found) {
        throw SpecError("lp_bound_oracle: no feasible vertex (weights do not sum to 1?)");
    }
    return best;
}

std::vector<double> default_gamma_grid() {
    std::vector<double> grid(15);
    const double step = std::log(8.0) / 14.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid[i] = std::exp(step * static_cast<double>(i));
    }
    return grid;
}

SensitivityCurve pate_shift_bounds(const SurveyDataset& dataset, const CateDraws& cate,
                                   const CellEffects& effects, const ShiftSpec& spec,
                                   ScaledWeightMode mode, std::size_t n_bb, std::uint64_t seed,
                                   double level, int threads) {
    check_increasing(spec.gamma_grid, 1.0, "gamma");
    if (cate.n_obs() != dataset.n_obs()) {
        throw AlignmentError("pate_shift_bounds: CATE draws misaligned with dataset");
    }
    if (!spec.cell_of.empty() && spec.cell_of.size() != dataset.n_obs()) {
        throw AlignmentError("pate_shift_bounds: cell assignment misaligned with dataset");
    }

    // Resolve each observation's cell and check the source side covers it.
    std::vector<std::string> cell_labels;
    std::unordered_map<std::string, std::size_t> cell_index;
    std::vector<std::size_t> cell_of_obs(dataset.n_obs());
    for (std::size_t j = 0; j < dataset.n_obs(); ++j) {
        const std::string& label = spec.cell_of.empty() ? std::string("all") : spec.cell_of[j];
        auto [it, is_new] = cell_index.try_emplace(label, cell_labels.size());
        if (is_new) {
            cell_labels.push_back(label);
        }
        cell_of_obs[j] = it->second;
    }

    struct CellBounds {
        std::vector<double> lower; // per gamma grid point
        std::vector<double> upper;
    };
    std::vector<CellBounds> cell_bounds(cell_labels.size());
    for (std::size_t c = 0; c < cell_labels.size(); ++c) {
        const auto it = effects.cells.find(cell_labels[c]);
        if (it == effects.cells.end() || it->second.tau.empty()) {
            throw ValidationError("extended support violated: no source effect values for "
                                  "cell '" + cell_labels[c] + "'");
        }
        const auto& cell = it->second;
        std::vector<double> omega = cell.omega;
        if (omega.empty()) {
            omega.assign(cell.tau.size(), 1.0 / static_cast<double>(cell.tau.size()));
        } else {
            if (omega.size() != cell.tau.size()) {
                throw AlignmentError("cell '" + cell_labels[c] +
                                     "': base weights misaligned with effect values");
            }
            double total = 0.0;
            for (double w : omega) {
                if (!(w >= 0.0)) {
                    throw SpecError("cell '" + cell_labels[c] +
                                    "': base weights must be nonnegative");
                }
                total += w;
            }
            if (!(total > 0.0)) {
                throw SpecError("cell '" + cell_labels[c] + "': base weights sum to zero");
            }
            for (double& w : omega) {
                w /= total;
            }
        }
        cell_bounds[c].lower.resize(spec.gamma_grid.size());
        cell_bounds[c].upper.resize(spec.gamma_grid.size());
        for (std::size_t g = 0; g < spec.gamma_grid.size(); ++g) {
            cell_bounds[c].lower[g] =
                lp_bound_greedy(cell.tau, omega, spec.gamma_grid[g], LpDirection::minimize)
                    .value;
            cell_bounds[c].upper[g] =
                lp_bound_greedy(cell.tau, omega, spec.gamma_grid[g], LpDirection::maximize)
                    .value;
        }
    }

    const auto& clusters = dataset.clusters();
    SensitivityCurve curve;
    curve.kind = SensitivityCurve::Kind::shift;
    curve.shift.resize(spec.gamma_grid.size());

    parallel_for(spec.gamma_grid.size(), threads, [&](std::size_t g) {
        Rng rng(seed); // same weight draws at every grid point
        std::vector<double> lower_draws(n_bb);
        std::vector<double> upper_draws(n_bb);
        std::vector<double> share(cell_labels.size());
        for (std::size_t t = 0; t < n_bb; ++t) {
            const BBWeightDraw pi = draw_scaled_cluster_weights(dataset, mode, rng);
            std::fill(share.begin(), share.end(), 0.0);
            for (std::size_t j = 0; j < dataset.n_obs(); ++j) {
                const std::size_t q = dataset.cluster_of(j);
                share[cell_of_obs[j]] +=
                    pi.weights[q] / static_cast<double>(clusters[q].members.size());
            }
            double lo = 0.0;
            double hi = 0.0;
            for (std::size_t c = 0; c < share.size(); ++c) {
                lo += share[c] * cell_bounds[c].lower[g];
                hi += share[c] * cell_bounds[c].upper[g];
            }
            lower_draws[t] = lo;
            upper_draws[t] = hi;
        }
        curve.shift[g].gamma = spec.gamma_grid[g];
        curve.shift[g].lower = PosteriorSummary::from_draws(std::move(lower_draws), level);
        curve.shift[g].upper = PosteriorSummary::from_draws(std::move(upper_draws), level);
    });
    return curve;
}

void write_confounder_csv(const SensitivityCurve& curve, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& point : curve.confounder) {
        rows.push_back({format_double(point.xi), format_double(point.summary.mean),
                        format_double(point.summary.ci_lower),
                        format_double(point.summary.ci_upper)});
    }
    csv::write_file(path, {"parameter", "mean", "ci_lower", "ci_upper"}, rows);
}

void write_shift_csv(const SensitivityCurve& curve, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& point : curve.shift) {
        rows.push_back({format_double(point.gamma), format_double(point.lower.mean),
                        format_double(point.lower.ci_lower), format_double(point.lower.ci_upper),
                        format_double(point.upper.mean), format_double(point.upper.ci_lower),
                        format_double(point.upper.ci_upper)});
    }
    csv::write_file(path,
                    {"parameter", "lower_mean", "lower_ci_lower", "lower_ci_upper",
                     "upper_mean", "upper_ci_lower", "upper_ci_upper"},
                    rows);
}

} // namespace sbb
