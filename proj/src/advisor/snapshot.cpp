#include "abba/advisor/snapshot.hpp"

#include <stdexcept>

#include <json.hpp>

namespace abba::advisor {

namespace {

using nlohmann::json;

json pair_to_json(const rl::PolicyParams& p) { return json::array({p[0], p[1]}); }

rl::PolicyParams pair_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw std::invalid_argument("expected a 2-element array");
    return {j[0].get<double>(), j[1].get<double>()};
}

json features_to_json(const rl::FeatureVector& f) { return {{"hyper", f.hyper}, {"hypo", f.hypo}}; }

rl::FeatureVector features_from_json(const json& j) { return {j.at("hyper").get<double>(), j.at("hypo").get<double>()}; }

json action_to_json(const rl::ControlAction& a) {
    return {{"p_a", a.p_a}, {"p_s", a.p_s}, {"p_d", a.p_d}, {"noise", a.noise}, {"p_e", a.p_e}, {"sigma", a.sigma}};
}

rl::ControlAction action_from_json(const json& j) {
    rl::ControlAction a;
    a.p_a = j.at("p_a");
    a.p_s = j.at("p_s");
    a.p_d = j.at("p_d");
    a.noise = j.at("noise");
    a.p_e = j.at("p_e");
    a.sigma = j.at("sigma");
    return a;
}

json config_to_json(const AdvisorConfig& c) {
    return {
        {"features",
         {{"g_low", c.features.g_low},
          {"g_high", c.features.g_high},
          {"hyper_scale", c.features.hyper_scale},
          {"hypo_scale", c.features.hypo_scale}}},
        {"fusion",
         {{"m", c.fusion.m},
          {"max_change", c.fusion.max_change},
          {"br_floor", c.fusion.br_floor},
          {"cir_floor", c.fusion.cir_floor}}},
        {"a_hyper", c.a_hyper},
        {"a_hypo", c.a_hypo},
        {"gamma", c.gamma},
        {"lambda", c.lambda},
        {"a0", c.a0},
        {"a_decay_days", c.a_decay_days},
        {"beta", c.beta},
        {"h", c.h},
        {"c_sigma", c.c_sigma},
        {"theta_base_br", pair_to_json(c.theta_base_br)},
        {"theta_base_cir", pair_to_json(c.theta_base_cir)},
        {"te_ratio_min", c.te_ratio_min},
        {"te_ratio_max", c.te_ratio_max},
        {"te_bins", c.te_bins},
        {"init_days", c.init_days},
    };
}

AdvisorConfig config_from_json(const json& j) {
    AdvisorConfig c;
    const json& f = j.at("features");
    c.features.g_low = f.at("g_low");
    c.features.g_high = f.at("g_high");
    c.features.hyper_scale = f.at("hyper_scale");
    c.features.hypo_scale = f.at("hypo_scale");
    const json& u = j.at("fusion");
    c.fusion.m = u.at("m");
    c.fusion.max_change = u.at("max_change");
    c.fusion.br_floor = u.at("br_floor");
    c.fusion.cir_floor = u.at("cir_floor");
    c.a_hyper = j.at("a_hyper");
    c.a_hypo = j.at("a_hypo");
    c.gamma = j.at("gamma");
    c.lambda = j.at("lambda");
    c.a0 = j.at("a0");
    c.a_decay_days = j.at("a_decay_days");
    c.beta = j.at("beta");
    c.h = j.at("h");
    c.c_sigma = j.at("c_sigma");
    c.theta_base_br = pair_from_json(j.at("theta_base_br"));
    c.theta_base_cir = pair_from_json(j.at("theta_base_cir"));
    c.te_ratio_min = j.at("te_ratio_min");
    c.te_ratio_max = j.at("te_ratio_max");
    c.te_bins = j.at("te_bins");
    c.init_days = j.at("init_days");
    return c;
}

json unit_to_json(const rl::ControllerUnit& u) {
    json unit = {
        {"actor",
         {{"theta", pair_to_json(u.actor.theta)},
          {"beta", u.actor.beta},
          {"h", u.actor.h},
          {"c_sigma", u.actor.c_sigma}}},
        {"critic",
         {{"w", u.critic.w},
          {"z", u.critic.z},
          {"gamma", u.critic.gamma},
          {"lambda", u.critic.lambda},
          {"a0", u.critic.schedule.initial},
          {"a_decay_steps", u.critic.schedule.decay_steps},
          {"step", u.critic.step},
          {"last_value", u.critic.last_value}}},
        {"updates", u.updates},
        {"previous", nullptr},
    };
    if (u.previous) {
        unit["previous"] = {{"features", features_to_json(u.previous->features)},
                            {"action", action_to_json(u.previous->action)}};
    }
    return unit;
}

rl::ControllerUnit unit_from_json(const json& j) {
    rl::ControllerUnit u;
    const json& a = j.at("actor");
    u.actor.theta = pair_from_json(a.at("theta"));
    u.actor.beta = a.at("beta");
    u.actor.h = a.at("h");
    u.actor.c_sigma = a.at("c_sigma");
    const json& c = j.at("critic");
    u.critic.w = c.at("w").get<std::vector<double>>();
    u.critic.z = c.at("z").get<std::vector<double>>();
    u.critic.gamma = c.at("gamma");
    u.critic.lambda = c.at("lambda");
    u.critic.schedule.initial = c.at("a0");
    u.critic.schedule.decay_steps = c.at("a_decay_steps");
    u.critic.step = c.at("step");
    u.critic.last_value = c.at("last_value");
    u.updates = j.at("updates");
    const json& prev = j.at("previous");
    if (!prev.is_null()) {
        u.previous = rl::Decision{features_from_json(prev.at("features")), action_from_json(prev.at("action"))};
    }
    if (u.critic.w.size() != rl::kBasisSize || u.critic.z.size() != rl::kBasisSize) {
        throw std::invalid_argument("critic vectors must have " + std::to_string(rl::kBasisSize) + " entries");
    }
    if (!(u.critic.gamma > 0.0 && u.critic.gamma < 1.0) || !(u.actor.h >= 0.0 && u.actor.h <= 1.0) ||
        !(u.actor.beta > 0.0) || !(u.actor.c_sigma >= 0.0)) {
        throw std::invalid_argument("controller constants out of range");
    }
    return u;
}

}  // namespace

std::string save_snapshot(const AdvisorState& state) {
    json units = json::array();
    for (const auto& u : state.units) units.push_back(unit_to_json(u));
    const json doc = {
        {"format", kSnapshotFormat},
        {"version", kSnapshotVersion},
        {"mode", to_string(state.mode)},
        {"day_index", state.day_index},
        {"seed", state.seed},
        {"transfer_entropy", state.transfer_entropy},
        {"te_ratio", state.te_ratio},
        {"br_old", state.br_old},
        {"profile",
         {{"br", state.profile.br}, {"cir", {state.profile.cir[0], state.profile.cir[1], state.profile.cir[2]}}}},
        {"config", config_to_json(state.config)},
        {"units", units},
    };
    return doc.dump(2) + "\n";
}

AdvisorState load_snapshot(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("advisor snapshot: ") + e.what());
    }
    try {
        if (doc.at("format") != kSnapshotFormat) {
            throw std::invalid_argument("not an advisor snapshot");
        }
        if (doc.at("version") != kSnapshotVersion) {
            throw std::invalid_argument("unsupported snapshot version " + doc.at("version").dump());
        }
        AdvisorState s;
        s.mode = mode_from_string(doc.at("mode").get<std::string>());
        s.day_index = doc.at("day_index");
        s.seed = doc.at("seed");
        s.transfer_entropy = doc.at("transfer_entropy");
        s.te_ratio = doc.at("te_ratio");
        s.br_old = doc.at("br_old");
        s.profile.br = doc.at("profile").at("br");
        for (std::size_t i = 0; i < kMainMeals; ++i) s.profile.cir[i] = doc.at("profile").at("cir").at(i);
        s.config = config_from_json(doc.at("config"));
        const json& units = doc.at("units");
        if (!units.is_array() || units.size() != kUnits) {
            throw std::invalid_argument("expected " + std::to_string(kUnits) + " controller units");
        }
        for (std::size_t i = 0; i < kUnits; ++i) s.units[i] = unit_from_json(units[i]);
        if (!s.profile.valid() || !(s.br_old > 0.0)) {
            throw std::invalid_argument("therapy profile must be positive");
        }
        return s;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("advisor snapshot: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string("advisor snapshot: ") + e.what());
    }
}

}  // namespace abba::advisor
