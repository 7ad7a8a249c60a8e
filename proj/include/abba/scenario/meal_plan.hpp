#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "abba/scenario/config.hpp"

namespace abba::scenario {

struct MealEvent {
    int meal_index = 1;  // 1..3 main, 0 snack
    double time = 0.0;   // actual minutes since midnight
    double cho = 0.0;    // actual g
    double announced_cho = 0.0;
    bool skipped = false;

    bool main() const { return meal_index != advisor::kSnackIndex; }
};

/// One day's meals in template order: breakfast, lunch, dinner, snack.
struct MealPlan {
    int day = 0;
    std::array<MealEvent, 4> events{};

    int skipped_main_meals() const;
};

/// Main meals (day offset 0..6, meal 1..3) skipped in the 7-day block that
/// contains `day`. Blocks start at the first control day; no skips before it.
std::vector<std::pair<int, int>> skipped_slots(const ScenarioConfig& cfg, std::uint64_t patient, int day);

/// Meal times, sizes and announcement errors drawn from the patient's "meals"
/// stream for that day; skips from the week's "skips" stream (S4 only).
MealPlan build_day_plan(const ScenarioConfig& cfg, std::uint64_t patient, int day);

/// SMBG reading times: 20 min before each main meal's actual time (skipped or
/// not) and at bedtime, each jittered in S3/S4. Throws std::logic_error in CGM mode.
std::vector<double> schedule_measurements(const ScenarioConfig& cfg, const MealPlan& plan, std::uint64_t patient);

}  // namespace abba::scenario
