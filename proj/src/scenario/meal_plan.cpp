#include "abba/scenario/meal_plan.hpp"

#include <algorithm>
#include <stdexcept>

#include "abba/rng.hpp"

namespace abba::scenario {

int MealPlan::skipped_main_meals() const {
    return static_cast<int>(std::count_if(events.begin(), events.end(), [](const MealEvent& e) { return e.skipped; }));
}

std::vector<std::pair<int, int>> skipped_slots(const ScenarioConfig& cfg, std::uint64_t patient, int day) {
    const int first = cfg.timeline.first_active_day();
    if (!cfg.meal_skips || day < first) return {};
    const int block = (day - first) / 7;
    Rng rng(derive_seed(cfg.scenario_seed, patient, block, "skips"));
    // partial Fisher-Yates over the block's 21 main-meal slots
    std::array<int, 21> slots{};
    for (int i = 0; i < 21; ++i) slots[i] = i;
    const int k = std::min(cfg.variability.skips_per_week, 21);
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < k; ++i) {
        const auto j = static_cast<int>(i + rng.below(static_cast<std::uint64_t>(21 - i)));
        std::swap(slots[i], slots[j]);
        out.emplace_back(slots[i] / 3, slots[i] % 3 + 1);
    }
    std::sort(out.begin(), out.end());
    return out;
}

MealPlan build_day_plan(const ScenarioConfig& cfg, std::uint64_t patient, int day) {
    MealPlan plan;
    plan.day = day;
    Rng rng(derive_seed(cfg.scenario_seed, patient, day, "meals"));
    const MealVariability& v = cfg.variability;
    for (std::size_t i = 0; i < cfg.meals.size(); ++i) {
        const MealTemplate& tpl = cfg.meals[i];
        MealEvent& e = plan.events[i];
        e.meal_index = tpl.meal_index;
        // fixed draw order keeps the stream aligned whatever the magnitudes
        const double dt = rng.uniform(-1.0, 1.0);
        const double dc = rng.uniform(-1.0, 1.0);
        const double ann = rng.uniform(-1.0, 1.0);
        e.time = std::clamp(tpl.time + v.time_jitter * dt, 0.0, 1439.0);
        const double cho_jitter = e.main() ? v.main_cho_jitter : v.snack_cho_jitter;
        e.cho = std::max(0.0, tpl.cho + cho_jitter * dc);
        e.announced_cho = e.cho * (1.0 + v.announce_error * ann);
    }
    const int offset = (day - cfg.timeline.first_active_day()) % 7;
    for (const auto& [slot_day, meal] : skipped_slots(cfg, patient, day)) {
        if (slot_day == offset) {
            plan.events[static_cast<std::size_t>(meal - 1)].skipped = true;
        }
    }
    return plan;
}

std::vector<double> schedule_measurements(const ScenarioConfig& cfg, const MealPlan& plan, std::uint64_t patient) {
    if (cfg.mode != advisor::Mode::Smbg) {
        throw std::logic_error("schedule_measurements: SMBG readings are only scheduled in SMBG mode");
    }
    Rng rng(derive_seed(cfg.scenario_seed, patient, plan.day, "jitter"));
    std::vector<double> times;
    for (const auto& e : plan.events) {
        if (e.main()) times.push_back(e.time - cfg.measurements.lead);
    }
    times.push_back(cfg.measurements.bedtime);
    for (double& t : times) {
        const double u = rng.uniform(-1.0, 1.0);
        if (cfg.measurement_jitter) t += cfg.measurements.jitter * u;
        t = std::clamp(t, 0.0, 1439.0);
    }
    std::sort(times.begin(), times.end());
    return times;
}

}  // namespace abba::scenario
