#include "abba/advisor/advisor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "abba/rng.hpp"

namespace abba::advisor {

namespace {

constexpr std::size_t kSlotsPerDay = 288;
constexpr double kSlotMinutes = 5.0;

/// CGM readings of one day laid on the 5-min grid; empty slots repeat the
/// last reading (or the first reading of the day for leading gaps).
std::vector<double> aligned_glucose(const GlucoseDayRecord& day) {
    const auto samples = day_samples(day);
    if (samples.empty()) {
        throw std::invalid_argument("initialization day without CGM readings");
    }
    std::vector<double> slots(kSlotsPerDay, std::nan(""));
    for (const auto& s : samples) {
        const auto slot = static_cast<std::size_t>(std::floor(s.t / kSlotMinutes));
        if (slot < kSlotsPerDay) slots[slot] = s.mgdl;
    }
    double last = samples.front().mgdl;
    for (auto& v : slots) {
        if (std::isnan(v)) {
            v = last;
        } else {
            last = v;
        }
    }
    return slots;
}

rl::ControllerUnit make_unit(const AdvisorConfig& cfg, rl::PolicyParams theta) {
    rl::ControllerUnit unit;
    unit.actor.theta = theta;
    unit.actor.beta = cfg.beta;
    unit.actor.h = cfg.h;
    unit.actor.c_sigma = cfg.c_sigma;
    unit.critic.gamma = cfg.gamma;
    unit.critic.lambda = cfg.lambda;
    unit.critic.schedule = {cfg.a0, cfg.a_decay_days};
    return unit;
}

UnitReport run_unit(AdvisorState& state, std::size_t unit, const DailyFeatures& features) {
    UnitReport report;
    const bool no_data = unit == kBasalUnit ? features.no_data : features.cir_no_data[unit - 1];
    report.features = unit == kBasalUnit ? features.br : features.cir[unit - 1];
    if (no_data) {
        return report;
    }
    const double cost = local_cost(report.features, state.config.a_hyper, state.config.a_hypo);
    const double p_s = supervisory_action(state.mode, unit, features);
    Rng rng(derive_seed(state.seed, unit, state.day_index, "explore"));
    report.step = rl::advance(state.units[unit], report.features, cost, p_s, rng);
    report.updated = true;
    return report;
}

}  // namespace

TeEstimate initialization_transfer_entropy(std::span<const GlucoseDayRecord> days, std::span<const double> insulin,
                                           int bins) {
    std::vector<double> glucose;
    glucose.reserve(days.size() * kSlotsPerDay);
    for (const auto& day : days) {
        if (day.mode != Mode::Cgm) {
            throw std::invalid_argument("initialization requires CGM records");
        }
        const auto slots = aligned_glucose(day);
        glucose.insert(glucose.end(), slots.begin(), slots.end());
    }
    if (insulin.size() != glucose.size()) {
        throw std::invalid_argument("initialization: expected " + std::to_string(glucose.size()) +
                                    " insulin slots, got " + std::to_string(insulin.size()));
    }
    return estimate_transfer_entropy(active_insulin(insulin), glucose, bins);
}

AdvisorState initialize_policy(std::span<const GlucoseDayRecord> days, std::span<const double> insulin,
                               const TherapyProfile& standard_treatment, Mode mode, std::uint64_t seed,
                               const AdvisorConfig& config) {
    if (static_cast<int>(days.size()) != config.init_days) {
        throw std::invalid_argument("initialize_policy: need exactly " + std::to_string(config.init_days) +
                                    " days of CGM data, got " + std::to_string(days.size()));
    }
    if (!standard_treatment.valid()) {
        throw std::invalid_argument("initialize_policy: standard treatment must be positive");
    }
    AdvisorState state;
    state.config = config;
    state.mode = mode;
    state.profile = standard_treatment;
    state.br_old = standard_treatment.br;
    state.seed = seed;

    const TeEstimate te = initialization_transfer_entropy(days, insulin, config.te_bins);
    state.transfer_entropy = te.effective;
    state.te_ratio = std::clamp(te.effective / reference_transfer_entropy(), config.te_ratio_min, config.te_ratio_max);

    auto scaled = [&](rl::PolicyParams base) {
        return rl::PolicyParams{base[0] * state.te_ratio, base[1] * state.te_ratio};
    };
    state.units[kBasalUnit] = make_unit(config, scaled(config.theta_base_br));
    for (std::size_t u = 1; u < kUnits; ++u) {
        state.units[u] = make_unit(config, scaled(config.theta_base_cir));
    }
    return state;
}

double supervisory_action(Mode mode, std::size_t unit, const DailyFeatures& features) {
    if (mode == Mode::Cgm) {
        return unit == kBasalUnit ? supervisory_cgm(features.br, Target::Basal)
                                  : supervisory_cgm(features.cir[unit - 1], Target::Cir);
    }
    return unit == kBasalUnit ? supervisory_br_smbg(features.br_counts, features.br)
                              : supervisory_cir_smbg(features.cir[unit - 1]);
}

UnitReport update_basal_rate(AdvisorState& state, const GlucoseDayRecord& yesterday) {
    if (yesterday.mode != state.mode) {
        throw std::invalid_argument("update_basal_rate: record mode does not match the advisor");
    }
    const DailyFeatures features = extract_features(yesterday, state.config.features);
    UnitReport report = run_unit(state, kBasalUnit, features);
    state.br_old = state.profile.br;
    if (report.updated) {
        report.quantity = update_basal(state.profile.br, report.step.action.p_e, state.config.fusion);
        state.profile.br = report.quantity.value;
    } else {
        report.quantity.fused = report.quantity.value = state.profile.br;
    }
    ++state.day_index;
    return report;
}

UnitReport update_meal_ratio(AdvisorState& state, int meal, const GlucoseDayRecord& yesterday) {
    if (meal < 1 || meal > kMainMeals) {
        throw std::invalid_argument("update_meal_ratio: meal index must be 1..3");
    }
    if (yesterday.mode != state.mode) {
        throw std::invalid_argument("update_meal_ratio: record mode does not match the advisor");
    }
    const DailyFeatures features = extract_features(yesterday, state.config.features);
    const auto unit = static_cast<std::size_t>(meal);
    UnitReport report = run_unit(state, unit, features);
    double& cir = state.profile.cir[meal - 1];
    if (report.updated) {
        report.quantity = update_cir(cir, report.step.action.p_e, state.profile.br, state.br_old, state.config.fusion);
        cir = report.quantity.value;
    } else {
        report.quantity.fused = report.quantity.value = cir;
    }
    return report;
}

DailyReport daily_update(AdvisorState& state, const GlucoseDayRecord& yesterday) {
    DailyReport report;
    report.features = extract_features(yesterday, state.config.features);
    report.units[kBasalUnit] = update_basal_rate(state, yesterday);
    for (int meal = 1; meal <= kMainMeals; ++meal) {
        report.units[static_cast<std::size_t>(meal)] = update_meal_ratio(state, meal, yesterday);
    }
    report.profile = state.profile;
    return report;
}

}  // namespace abba::advisor
