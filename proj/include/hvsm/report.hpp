#pragma once

#include "hvsm/experiment.hpp"

#include <json.hpp>

namespace hvsm::experiment {

nlohmann::ordered_json to_json(const ExperimentReport& report);

/// Inverse of to_json. Throws ParseError on a structurally invalid document.
ExperimentReport report_from_json(const nlohmann::ordered_json& j);

} // namespace hvsm::experiment
