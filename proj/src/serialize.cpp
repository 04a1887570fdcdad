#include "belong/serialize.hpp"

namespace belong {

using nlohmann::json;

void to_json(json& j, const InversionConfig& c) {
    j = {{"restarts", c.restarts},
         {"steps_per_restart", c.steps_per_restart},
         {"learning_rate", c.learning_rate},
         {"early_stop_loss", c.early_stop_loss},
         {"seed", c.seed},
         {"optimizer", {{"name", "adam"}, {"beta1", 0.9}, {"beta2", 0.999}, {"epsilon", 1e-8}}}};
}

void from_json(const json& j, InversionConfig& c) {
    c.restarts = j.at("restarts").get<std::size_t>();
    c.steps_per_restart = j.at("steps_per_restart").get<std::size_t>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.early_stop_loss = j.at("early_stop_loss").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
}

json input_to_json(const ModelInput& input) {
    json j;
    j["latent"] = std::vector<float>(input.latent.data().begin(), input.latent.data().end());
    j["class_index"] = input.class_index ? json(*input.class_index) : json(nullptr);
    return j;
}

void to_json(json& j, const InversionResult& r) {
    json trace = json::array();
    for (const auto& t : r.trace) {
        trace.push_back({{"class_index", t.class_index ? json(*t.class_index) : json(nullptr)},
                         {"restart", t.restart},
                         {"steps", t.steps},
                         {"abandoned", t.abandoned},
                         {"loss", t.abandoned ? json(nullptr) : json(t.loss)}});
    }
    j = {{"best_input", input_to_json(r.best_input)},
         {"best_loss", r.best_loss},
         {"per_restart_losses", r.per_restart_losses},
         {"restarts", trace},
         {"steps_used", r.steps_used},
         {"abandoned_restarts", r.abandoned_restarts},
         {"wall_time", r.wall_time_ms}};
}

void to_json(json& j, const BelongingDistribution& d) {
    j = {{"model_id", d.model_id},
         {"reference_id", d.reference_id},
         {"metric", to_string(d.metric)},
         {"n", d.n},
         {"mu", d.mu},
         {"sigma", d.sigma},
         {"alpha", d.alpha},
         {"inversion_config_hash", d.inversion_config_hash},
         {"calibrated", d.calibrated}};
}

void from_json(const json& j, BelongingDistribution& d) {
    d.model_id = j.at("model_id").get<std::string>();
    d.reference_id = j.at("reference_id").get<std::string>();
    d.metric = parse_metric(j.at("metric").get<std::string>());
    d.n = j.at("n").get<std::size_t>();
    d.mu = j.at("mu").get<double>();
    d.sigma = j.at("sigma").get<double>();
    d.alpha = j.at("alpha").get<double>();
    d.inversion_config_hash = j.at("inversion_config_hash").get<std::string>();
    d.calibrated = j.value("calibrated", true);
}

void to_json(json& j, const AttributionVerdict& v) {
    j = {{"examined_id", v.examined_id},
         {"model_id", v.model_id},
         {"reference_id", v.reference_id},
         {"raw_loss", v.raw_loss},
         {"reference_loss", v.reference_loss ? json(*v.reference_loss) : json(nullptr)},
         {"calibrated_loss", v.calibrated_loss},
         {"rule", to_string(v.rule)},
         {"z_statistic", v.grubbs ? json(v.grubbs->z) : json(nullptr)},
         {"threshold", v.grubbs ? json(v.grubbs->threshold) : json(nullptr)},
         {"mu", v.grubbs ? json(v.grubbs->mu) : json(nullptr)},
         {"sigma", v.grubbs ? json(v.grubbs->sigma) : json(nullptr)},
         {"decision", to_string(v.decision)},
         {"config",
          {{"metric", to_string(v.metric)}, {"inversion", v.inversion}, {"alpha", v.alpha}, {"n", v.n}}},
         {"wall_time_ms", v.wall_time_ms}};
}

}  // namespace belong
