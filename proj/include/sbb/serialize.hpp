#pragma once

#include "json.hpp"

#include "sbb/bootstrap.hpp"
#include "sbb/estimators.hpp"
#include "sbb/simulate.hpp"

namespace sbb {

/// {mean, sd, ci_lower, ci_upper, level, method, draws?}. PointEstimate and
/// PosteriorSummary share the envelope so combined reports can mix rows;
/// draws appear only when requested.
nlohmann::json to_json(const PosteriorSummary& summary, bool keep_draws = false,
                       const std::string& method = "bb");
nlohmann::json to_json(const PointEstimate& estimate);
nlohmann::json to_json(const MetricsTable& table);

} // namespace sbb
