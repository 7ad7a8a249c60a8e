#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "abba/advisor/advisor.hpp"
#include "abba/sim/cohort.hpp"
#include "abba/sim/sensors.hpp"

namespace abba::scenario {

enum class ScenarioId { S1, S2, S3, S4 };

std::string_view to_string(ScenarioId id);
ScenarioId scenario_from_string(std::string_view text);

struct MealTemplate {
    int meal_index = 1;  // 1..3 main meals, 0 snack
    double time = 0.0;   // minutes since midnight
    double cho = 0.0;    // g
};

struct MealVariability {
    double time_jitter = 15.0;     // +/- min, uniform
    double main_cho_jitter = 10.0; // +/- g
    double snack_cho_jitter = 5.0; // +/- g
    double announce_error = 0.5;   // announced = actual * U(1 - e, 1 + e)
    int skips_per_week = 2;        // main meals, only when skips are enabled
};

struct MeasurementSchedule {
    double lead = 20.0;       // pre-meal reading this many minutes before the meal
    double bedtime = 1380.0;  // 23:00
    double jitter = 10.0;     // +/- min, only when jitter is enabled
};

/// Protocol timeline in day labels. Day 1 is not simulated.
struct Timeline {
    int first_day = 2;
    int init_last_day = 8;
    int last_day = 98;
    int si_last_day = 90;   // inter-day variability and dawn phenomenon through this day
    int excluded_day = 91;  // transition day, never evaluated

    int first_active_day() const { return init_last_day + 1; }
    bool si_enabled(int day) const { return day <= si_last_day; }
};

struct InsulinSensitivityConfig {
    double inter_day = 0.25;
    double dawn_start = 240.0;
    double dawn_end = 480.0;
    double dawn_factor = 0.5;
    double ramp = 30.0;
};

struct ScenarioConfig {
    ScenarioId id = ScenarioId::S1;
    advisor::Mode mode = advisor::Mode::Cgm;
    bool measurement_jitter = false;
    bool meal_skips = false;
    std::array<MealTemplate, 4> meals{{{1, 420.0, 50.0}, {2, 720.0, 60.0}, {3, 1110.0, 80.0}, {0, 1380.0, 15.0}}};
    MealVariability variability;
    MeasurementSchedule measurements;
    Timeline timeline;
    InsulinSensitivityConfig si;
    sim::SensorConfig sensors;
    advisor::AdvisorConfig advisor;
    std::uint64_t scenario_seed = 1;

    /// Throws std::invalid_argument if the scenario flags or numbers are inconsistent.
    void validate() const;
};

/// Protocol defaults for one scenario: S1 CGM; S2 SMBG; S3 adds
/// measurement-time jitter; S4 adds two skipped main meals per week.
ScenarioConfig scenario_defaults(ScenarioId id);

/// A batch run: several scenarios over one cohort.
struct RunConfig {
    std::vector<ScenarioId> scenarios{ScenarioId::S1, ScenarioId::S2};
    int patients = 100;
    std::uint64_t cohort_seed = 1;
    ScenarioConfig base;  // protocol shared by every scenario; flags come from the id
    sim::CohortConfig cohort;

    ScenarioConfig scenario(ScenarioId id) const;
};

/// Config error carrying the 1-based line of the offending node (0 if unknown).
class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string& message);
    int line() const { return line_; }

private:
    int line_;
};

/// Parse a YAML run config. Every key is optional and defaults to the
/// protocol value; unknown keys and invalid values raise ConfigError.
RunConfig parse_run_config(const std::string& yaml_text);
RunConfig load_run_config(const std::string& path);

/// Fully resolved config as YAML (stable key order).
std::string dump_run_config(const RunConfig& cfg);

}  // namespace abba::scenario
