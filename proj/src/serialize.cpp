#include "sbb/serialize.hpp"

namespace sbb {

nlohmann::json to_json(const PosteriorSummary& summary, bool keep_draws,
                       const std::string& method) {
    nlohmann::json out;
    out["method"] = method;
    out["mean"] = summary.mean;
    out["sd"] = summary.sd;
    out["ci_lower"] = summary.ci_lower;
    out["ci_upper"] = summary.ci_upper;
    out["level"] = summary.level;
    if (keep_draws) {
        out["draws"] = summary.draws;
    }
    return out;
}

nlohmann::json to_json(const PointEstimate& estimate) {
    nlohmann::json out;
    out["method"] = estimate.method;
    out["mean"] = estimate.value;
    out["sd"] = estimate.std_error;
    out["ci_lower"] = estimate.ci_lower;
    out["ci_upper"] = estimate.ci_upper;
    out["level"] = estimate.level;
    return out;
}

nlohmann::json to_json(const MetricsTable& table) {
    nlohmann::json out;
    out["truth"] = table.truth;
    out["replications"] = table.replications;
    out["failed"] = table.failed;
    out["rows"] = nlohmann::json::array();
    for (const auto& m : table.rows) {
        out["rows"].push_back({{"method", m.method},
                               {"bias", m.bias},
                               {"coverage", m.coverage},
                               {"sd", m.sd},
                               {"rmse", m.rmse}});
    }
    return out;
}

} // namespace sbb
