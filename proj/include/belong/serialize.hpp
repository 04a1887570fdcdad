#pragma once

#include "belong/attribution.hpp"
#include "belong/inversion.hpp"
#include "belong/stats.hpp"
#include "json.hpp"

namespace belong {

void to_json(nlohmann::json& j, const InversionConfig& c);
void from_json(const nlohmann::json& j, InversionConfig& c);
void to_json(nlohmann::json& j, const InversionResult& r);
void to_json(nlohmann::json& j, const BelongingDistribution& d);
void from_json(const nlohmann::json& j, BelongingDistribution& d);
void to_json(nlohmann::json& j, const AttributionVerdict& v);

nlohmann::json input_to_json(const ModelInput& input);

}  // namespace belong
