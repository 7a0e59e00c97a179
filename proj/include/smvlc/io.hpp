#pragma once

// JSON serialization for mapping plans and precoding weights, used for
// golden-file tests and for reusing optimized weights across runs.

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "smvlc/cabm.hpp"
#include "smvlc/precode.hpp"

namespace smvlc {

inline nlohmann::json plan_to_json(const MappingPlan& plan) {
    nlohmann::json j;
    j["m"] = plan.M;
    j["k_bits"] = plan.K;
    j["p"] = plan.p;
    j["q"] = plan.q;
    j["exact_power"] = plan.exact_power;
    j["avg_power_w"] = plan.avg_power;
    j["gray_labeling"] = plan.gray_labeling;
    j["led_order"] = plan.led_order;
    j["codebook"] = plan.codebook;
    j["pam_order"] = plan.pam_order;
    j["levels_a"] = plan.levels_a;
    j["levels_b"] = plan.levels_b;
    return j;
}

inline MappingPlan plan_from_json(const nlohmann::json& j) {
    MappingPlan plan;
    plan.M = j.at("m").get<int>();
    plan.K = j.at("k_bits").get<int>();
    plan.p = j.at("p").get<int>();
    plan.q = j.at("q").get<int>();
    plan.exact_power = j.at("exact_power").get<bool>();
    plan.avg_power = j.at("avg_power_w").get<double>();
    plan.gray_labeling = j.at("gray_labeling").get<bool>();
    plan.led_order = j.at("led_order").get<std::vector<int>>();
    plan.codebook = j.at("codebook").get<std::vector<std::string>>();
    plan.pam_order = j.at("pam_order").get<std::vector<int>>();
    plan.levels_a = j.at("levels_a").get<std::vector<double>>();
    plan.levels_b = j.at("levels_b").get<std::vector<double>>();
    plan.n_high = (1 << (plan.p + 1)) - plan.M;
    plan.pos_of_led.assign(static_cast<std::size_t>(plan.M), 0);
    for (int pos = 0; pos < plan.M; ++pos)
        plan.pos_of_led[static_cast<std::size_t>(plan.led_order[static_cast<std::size_t>(pos)])] =
            pos;
    if (static_cast<int>(plan.codebook.size()) != plan.M ||
        static_cast<int>(plan.pam_order.size()) != plan.M)
        throw std::invalid_argument("plan_from_json: inconsistent field sizes");
    return plan;
}

inline nlohmann::json weights_to_json(const PrecodingWeights& w) {
    return nlohmann::json{{"w", w.w}};
}

inline PrecodingWeights weights_from_json(const nlohmann::json& j) {
    return PrecodingWeights{j.at("w").get<std::vector<double>>()};
}

} // namespace smvlc
