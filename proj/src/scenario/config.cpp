#include "abba/scenario/config.hpp"

#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace abba::scenario {

std::string_view to_string(ScenarioId id) {
    switch (id) {
        case ScenarioId::S1: return "S1";
        case ScenarioId::S2: return "S2";
        case ScenarioId::S3: return "S3";
        case ScenarioId::S4: return "S4";
    }
    return "?";
}

ScenarioId scenario_from_string(std::string_view text) {
    if (text == "S1") return ScenarioId::S1;
    if (text == "S2") return ScenarioId::S2;
    if (text == "S3") return ScenarioId::S3;
    if (text == "S4") return ScenarioId::S4;
    throw std::invalid_argument(fmt::format("unknown scenario '{}' (expected S1..S4)", text));
}

void ScenarioConfig::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("scenario config: " + what); };
    const bool expect_cgm = id == ScenarioId::S1;
    if ((mode == advisor::Mode::Cgm) != expect_cgm) fail("S1 runs in CGM mode and S2-S4 in SMBG mode");
    if (measurement_jitter != (id == ScenarioId::S3 || id == ScenarioId::S4)) fail("measurement jitter is on exactly in S3/S4");
    if (meal_skips != (id == ScenarioId::S4)) fail("meal skips are on exactly in S4");
    const Timeline& t = timeline;
    if (t.first_day < 2) fail("first_day must be >= 2");
    if (t.init_last_day - t.first_day + 1 != advisor.init_days) {
        fail(fmt::format("initialization phase must span {} days", advisor.init_days));
    }
    if (t.last_day < t.first_active_day()) fail("timeline ends before the control phase");
    if (t.excluded_day != t.si_last_day + 1) fail("excluded_day must follow si_last_day");
    for (const auto& m : meals) {
        if (m.time < 0.0 || m.time >= 1440.0 || m.cho < 0.0) fail("meal template out of range");
    }
    if (variability.announce_error < 0.0 || variability.announce_error >= 1.0) fail("announce_error must be in [0, 1)");
    if (variability.skips_per_week < 0 || variability.skips_per_week > 21) fail("skips_per_week must be in [0, 21]");
}

ScenarioConfig scenario_defaults(ScenarioId id) {
    ScenarioConfig cfg;
    cfg.id = id;
    cfg.mode = id == ScenarioId::S1 ? advisor::Mode::Cgm : advisor::Mode::Smbg;
    cfg.measurement_jitter = id == ScenarioId::S3 || id == ScenarioId::S4;
    cfg.meal_skips = id == ScenarioId::S4;
    return cfg;
}

ScenarioConfig RunConfig::scenario(ScenarioId id) const {
    ScenarioConfig cfg = base;
    const ScenarioConfig flags = scenario_defaults(id);
    cfg.id = id;
    cfg.mode = flags.mode;
    cfg.measurement_jitter = flags.measurement_jitter;
    cfg.meal_skips = flags.meal_skips;
    return cfg;
}

ConfigError::ConfigError(int line, const std::string& message)
    : std::runtime_error(line > 0 ? fmt::format("line {}: {}", line, message) : message), line_(line) {}

namespace {

using Field = std::function<void(const YAML::Node&)>;
using Fields = std::map<std::string, Field>;

int line_of(const YAML::Node& node) { return node.Mark().line >= 0 ? node.Mark().line + 1 : 0; }

void read_map(const YAML::Node& node, const std::string& section, const Fields& fields) {
    if (!node.IsMap()) {
        throw ConfigError(line_of(node), fmt::format("'{}' must be a mapping", section));
    }
    for (const auto& entry : node) {
        const auto key = entry.first.as<std::string>();
        const auto it = fields.find(key);
        if (it == fields.end()) {
            throw ConfigError(line_of(entry.first), fmt::format("unknown key '{}' in '{}'", key, section));
        }
        it->second(entry.second);
    }
}

template <typename T>
T scalar(const YAML::Node& node, const char* what) {
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(line_of(node), fmt::format("expected {} but found '{}'", what,
                                                     node.IsScalar() ? node.Scalar() : std::string("<non-scalar>")));
    }
}

Field number(double& out, double lo = -std::numeric_limits<double>::infinity(),
             double hi = std::numeric_limits<double>::infinity()) {
    return [&out, lo, hi](const YAML::Node& n) {
        const double v = scalar<double>(n, "a number");
        if (!(v >= lo && v <= hi)) {
            throw ConfigError(line_of(n), fmt::format("value {} outside [{}, {}]", v, lo, hi));
        }
        out = v;
    };
}

Field integer(int& out, int lo, int hi) {
    return [&out, lo, hi](const YAML::Node& n) {
        const int v = scalar<int>(n, "an integer");
        if (v < lo || v > hi) {
            throw ConfigError(line_of(n), fmt::format("value {} outside [{}, {}]", v, lo, hi));
        }
        out = v;
    };
}

Field seed(std::uint64_t& out) {
    return [&out](const YAML::Node& n) { out = scalar<std::uint64_t>(n, "a non-negative integer seed"); };
}

Field section(const std::string& name, Fields fields) {
    return [name, fields = std::move(fields)](const YAML::Node& n) { read_map(n, name, fields); };
}

Field range(sim::Range& out) {
    return [&out](const YAML::Node& n) {
        if (!n.IsSequence() || n.size() != 2) {
            throw ConfigError(line_of(n), "expected a [low, high] pair");
        }
        const double lo = scalar<double>(n[0], "a number");
        const double hi = scalar<double>(n[1], "a number");
        if (!(lo > 0.0 && lo <= hi)) {
            throw ConfigError(line_of(n), "range needs 0 < low <= high");
        }
        out = {lo, hi};
    };
}

Field meal(MealTemplate& out) {
    return section("meal", {{"time", number(out.time, 0.0, 1439.0)}, {"cho", number(out.cho, 0.0, 300.0)}});
}

Fields root_fields(RunConfig& cfg) {
    ScenarioConfig& b = cfg.base;
    advisor::AdvisorConfig& a = b.advisor;
    sim::CohortConfig& c = cfg.cohort;
    return {
        {"scenarios",
         [&cfg](const YAML::Node& n) {
             std::vector<ScenarioId> ids;
             if (n.IsScalar()) {
                 std::string text = n.Scalar();
                 std::stringstream ss(text);
                 std::string item;
                 while (std::getline(ss, item, ',')) {
                     try {
                         ids.push_back(scenario_from_string(item));
                     } catch (const std::invalid_argument& e) {
                         throw ConfigError(line_of(n), e.what());
                     }
                 }
             } else if (n.IsSequence()) {
                 for (const auto& item : n) {
                     try {
                         ids.push_back(scenario_from_string(scalar<std::string>(item, "a scenario id")));
                     } catch (const std::invalid_argument& e) {
                         throw ConfigError(line_of(item), e.what());
                     }
                 }
             }
             if (ids.empty()) throw ConfigError(line_of(n), "at least one scenario is required");
             cfg.scenarios = ids;
         }},
        {"patients", integer(cfg.patients, 1, 100000)},
        {"seeds", section("seeds", {{"cohort", seed(cfg.cohort_seed)}, {"scenario", seed(b.scenario_seed)}})},
        {"timeline", section("timeline", {{"first_day", integer(b.timeline.first_day, 2, 10000)},
                                          {"init_last_day", integer(b.timeline.init_last_day, 2, 10000)},
                                          {"last_day", integer(b.timeline.last_day, 2, 10000)},
                                          {"si_variability_last_day", integer(b.timeline.si_last_day, 1, 10000)},
                                          {"excluded_day", integer(b.timeline.excluded_day, 1, 10000)}})},
        {"meals", section("meals", {{"breakfast", meal(b.meals[0])},
                                    {"lunch", meal(b.meals[1])},
                                    {"dinner", meal(b.meals[2])},
                                    {"snack", meal(b.meals[3])}})},
        {"variability",
         section("variability", {{"meal_time_min", number(b.variability.time_jitter, 0.0, 120.0)},
                                 {"main_cho_g", number(b.variability.main_cho_jitter, 0.0, 100.0)},
                                 {"snack_cho_g", number(b.variability.snack_cho_jitter, 0.0, 100.0)},
                                 {"announce_error", number(b.variability.announce_error, 0.0, 0.99)},
                                 {"skips_per_week", integer(b.variability.skips_per_week, 0, 21)}})},
        {"measurements", section("measurements", {{"lead_min", number(b.measurements.lead, 0.0, 120.0)},
                                                  {"bedtime_min", number(b.measurements.bedtime, 0.0, 1439.0)},
                                                  {"jitter_min", number(b.measurements.jitter, 0.0, 60.0)}})},
        {"insulin_sensitivity",
         section("insulin_sensitivity", {{"inter_day", number(b.si.inter_day, 0.0, 0.9)},
                                         {"dawn_start_min", number(b.si.dawn_start, 0.0, 1439.0)},
                                         {"dawn_end_min", number(b.si.dawn_end, 0.0, 1439.0)},
                                         {"dawn_factor", number(b.si.dawn_factor, 0.01, 2.0)},
                                         {"ramp_min", number(b.si.ramp, 1.0, 240.0)}})},
        {"sensors", section("sensors", {{"cgm_cv", number(b.sensors.cgm_cv, 0.0, 0.5)},
                                        {"smbg_cv", number(b.sensors.smbg_cv, 0.0, 0.5)}})},
        {"advisor",
         section("advisor", {{"gamma", number(a.gamma, 1e-9, 1.0 - 1e-9)},
                             {"lambda", number(a.lambda, 0.0, 1.0)},
                             {"a0", number(a.a0, 1e-12, 10.0)},
                             {"a_decay_days", number(a.a_decay_days, 1e-9, 1e9)},
                             {"beta", number(a.beta, 1e-12, 100.0)},
                             {"h", number(a.h, 0.0, 1.0)},
                             {"c_sigma", number(a.c_sigma, 0.0, 10.0)},
                             {"fusion_m", number(a.fusion.m, 0.0, 1.0)},
                             {"max_change", number(a.fusion.max_change, 1e-9, 1.0)},
                             {"a_hyper", number(a.a_hyper, 0.0, 1000.0)},
                             {"a_hypo", number(a.a_hypo, 0.0, 1000.0)}})},
        {"cohort", section("cohort", {{"si", range(c.si)},
                                      {"egp", range(c.egp)},
                                      {"glucose_effectiveness", range(c.glucose_effectiveness)},
                                      {"basal_glucose", range(c.basal_glucose)},
                                      {"cir_factor", range(c.cir_factor)}})},
    };
}

}  // namespace

RunConfig parse_run_config(const std::string& yaml_text) {
    RunConfig cfg;
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(e.mark.line + 1, e.msg);
    }
    if (root.IsNull()) return cfg;
    const Fields fields = root_fields(cfg);
    read_map(root, "config", fields);
    try {
        for (ScenarioId id : cfg.scenarios) cfg.scenario(id).validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(0, e.what());
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(0, fmt::format("cannot read config file '{}'", path));
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_run_config(buffer.str());
}

std::string dump_run_config(const RunConfig& cfg) {
    const ScenarioConfig& b = cfg.base;
    const advisor::AdvisorConfig& a = b.advisor;
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "scenarios" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (ScenarioId id : cfg.scenarios) out << std::string(to_string(id));
    out << YAML::EndSeq;
    out << YAML::Key << "patients" << YAML::Value << cfg.patients;
    out << YAML::Key << "seeds" << YAML::Value << YAML::BeginMap << YAML::Key << "cohort" << YAML::Value
        << cfg.cohort_seed << YAML::Key << "scenario" << YAML::Value << b.scenario_seed << YAML::EndMap;
    out << YAML::Key << "timeline" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "first_day" << YAML::Value << b.timeline.first_day;
    out << YAML::Key << "init_last_day" << YAML::Value << b.timeline.init_last_day;
    out << YAML::Key << "last_day" << YAML::Value << b.timeline.last_day;
    out << YAML::Key << "si_variability_last_day" << YAML::Value << b.timeline.si_last_day;
    out << YAML::Key << "excluded_day" << YAML::Value << b.timeline.excluded_day;
    out << YAML::EndMap;
    static constexpr const char* kMealNames[] = {"breakfast", "lunch", "dinner", "snack"};
    out << YAML::Key << "meals" << YAML::Value << YAML::BeginMap;
    for (std::size_t i = 0; i < b.meals.size(); ++i) {
        out << YAML::Key << kMealNames[i] << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "time"
            << YAML::Value << b.meals[i].time << YAML::Key << "cho" << YAML::Value << b.meals[i].cho << YAML::EndMap;
    }
    out << YAML::EndMap;
    out << YAML::Key << "variability" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "meal_time_min" << YAML::Value << b.variability.time_jitter;
    out << YAML::Key << "main_cho_g" << YAML::Value << b.variability.main_cho_jitter;
    out << YAML::Key << "snack_cho_g" << YAML::Value << b.variability.snack_cho_jitter;
    out << YAML::Key << "announce_error" << YAML::Value << b.variability.announce_error;
    out << YAML::Key << "skips_per_week" << YAML::Value << b.variability.skips_per_week;
    out << YAML::EndMap;
    out << YAML::Key << "measurements" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "lead_min" << YAML::Value << b.measurements.lead;
    out << YAML::Key << "bedtime_min" << YAML::Value << b.measurements.bedtime;
    out << YAML::Key << "jitter_min" << YAML::Value << b.measurements.jitter;
    out << YAML::EndMap;
    out << YAML::Key << "insulin_sensitivity" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "inter_day" << YAML::Value << b.si.inter_day;
    out << YAML::Key << "dawn_start_min" << YAML::Value << b.si.dawn_start;
    out << YAML::Key << "dawn_end_min" << YAML::Value << b.si.dawn_end;
    out << YAML::Key << "dawn_factor" << YAML::Value << b.si.dawn_factor;
    out << YAML::Key << "ramp_min" << YAML::Value << b.si.ramp;
    out << YAML::EndMap;
    out << YAML::Key << "sensors" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "cgm_cv" << YAML::Value << b.sensors.cgm_cv;
    out << YAML::Key << "smbg_cv" << YAML::Value << b.sensors.smbg_cv;
    out << YAML::EndMap;
    out << YAML::Key << "advisor" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "gamma" << YAML::Value << a.gamma;
    out << YAML::Key << "lambda" << YAML::Value << a.lambda;
    out << YAML::Key << "a0" << YAML::Value << a.a0;
    out << YAML::Key << "a_decay_days" << YAML::Value << a.a_decay_days;
    out << YAML::Key << "beta" << YAML::Value << a.beta;
    out << YAML::Key << "h" << YAML::Value << a.h;
    out << YAML::Key << "c_sigma" << YAML::Value << a.c_sigma;
    out << YAML::Key << "fusion_m" << YAML::Value << a.fusion.m;
    out << YAML::Key << "max_change" << YAML::Value << a.fusion.max_change;
    out << YAML::Key << "a_hyper" << YAML::Value << a.a_hyper;
    out << YAML::Key << "a_hypo" << YAML::Value << a.a_hypo;
    out << YAML::EndMap;
    const sim::CohortConfig& c = cfg.cohort;
    auto range_out = [&out](const char* key, sim::Range r) {
        out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq << r.lo << r.hi << YAML::EndSeq;
    };
    out << YAML::Key << "cohort" << YAML::Value << YAML::BeginMap;
    range_out("si", c.si);
    range_out("egp", c.egp);
    range_out("glucose_effectiveness", c.glucose_effectiveness);
    range_out("basal_glucose", c.basal_glucose);
    range_out("cir_factor", c.cir_factor);
    out << YAML::EndMap;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace abba::scenario
