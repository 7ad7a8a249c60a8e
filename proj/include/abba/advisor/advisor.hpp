#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "abba/advisor/features.hpp"
#include "abba/advisor/fusion.hpp"
#include "abba/advisor/supervisory.hpp"
#include "abba/advisor/transfer_entropy.hpp"
#include "abba/rl/actor_critic.hpp"

namespace abba::advisor {

/// Controller unit slots: the basal rate, then one CIR per main meal.
inline constexpr std::size_t kBasalUnit = 0;
inline constexpr std::size_t kUnits = 4;

struct AdvisorConfig {
    FeatureConfig features;
    FusionConfig fusion;
    double a_hyper = 1.0;
    double a_hypo = 10.0;
    // critic
    double gamma = 0.9;
    double lambda = 0.5;
    double a0 = 0.1;
    double a_decay_days = 50.0;
    // actor
    double beta = 0.5;
    double h = 0.5;
    double c_sigma = 0.05;
    // policy initialization
    rl::PolicyParams theta_base_br{0.01, -0.05};
    rl::PolicyParams theta_base_cir{-0.01, 0.05};
    double te_ratio_min = 0.1;
    double te_ratio_max = 10.0;
    int te_bins = 6;
    int init_days = 7;
};

struct AdvisorState {
    AdvisorConfig config;
    Mode mode = Mode::Cgm;
    std::array<rl::ControllerUnit, kUnits> units{};
    TherapyProfile profile;
    /// Basal rate of the previous day; the CIR guard compares against it.
    double br_old = 1.0;
    int day_index = 0;
    std::uint64_t seed = 0;
    double transfer_entropy = 0.0;
    double te_ratio = 1.0;
};

/// What one controller did on one update.
struct UnitReport {
    bool updated = false;  // false on a no-data day for this unit
    rl::FeatureVector features;
    rl::UnitStep step;
    QuantityUpdate quantity;
};

struct DailyReport {
    DailyFeatures features;
    std::array<UnitReport, kUnits> units{};
    TherapyProfile profile;
};

/// Effective TE(active insulin -> glucose) of seven days of CGM readings and 5-min
/// insulin deliveries (288 per day, units delivered in each slot).
TeEstimate initialization_transfer_entropy(std::span<const GlucoseDayRecord> days, std::span<const double> insulin,
                                           int bins = 6);

/// Build the control-phase state from the one-week initialization data. Each
/// unit starts at theta_base scaled by TE / TE_ref (clipped); critics start at
/// zero. Throws std::invalid_argument unless exactly `init_days` CGM days are given.
AdvisorState initialize_policy(std::span<const GlucoseDayRecord> days, std::span<const double> insulin,
                               const TherapyProfile& standard_treatment, Mode mode, std::uint64_t seed,
                               const AdvisorConfig& config = {});

/// Supervisory action for unit `unit` under the state's mode.
double supervisory_action(Mode mode, std::size_t unit, const DailyFeatures& features);

/// Basal update at the day trigger from yesterday's record. Advances day_index.
UnitReport update_basal_rate(AdvisorState& state, const GlucoseDayRecord& yesterday);

/// CIR update for main meal `meal` (1..3) at its announcement, from yesterday's
/// record extended with this morning's readings.
UnitReport update_meal_ratio(AdvisorState& state, int meal, const GlucoseDayRecord& yesterday);

/// Basal update followed by all three CIR updates from one complete record.
DailyReport daily_update(AdvisorState& state, const GlucoseDayRecord& yesterday);

}  // namespace abba::advisor
