#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "abba/advisor/advisor.hpp"
#include "abba/metrics/weekly.hpp"
#include "abba/scenario/config.hpp"
#include "abba/scenario/meal_plan.hpp"
#include "abba/sim/patient.hpp"

namespace abba::scenario {

/// One bolus actually given.
struct BolusLog {
    int meal_index = 1;
    double t = 0.0;
    double announced_cho = 0.0;
    double cir = 0.0;
    double units = 0.0;
};

/// An advisor decision inside the trial: which quantity, when, and what happened.
struct UpdateLog {
    int day = 0;
    double t = 0.0;
    std::size_t unit = 0;  // 0 basal, 1..3 CIR
    advisor::UnitReport report;
};

struct DayLog {
    int day = 0;
    bool active = false;      // control phase
    bool si_enabled = true;
    double si_multiplier = 1.0;
    MealPlan plan;
    std::vector<double> truth;  // plasma glucose on the 5-min grid, 288 values
    std::vector<advisor::GlucoseSample> cgm;
    std::vector<advisor::GlucoseSample> smbg;
    metrics::DayDeliveries deliveries;
    std::vector<BolusLog> boluses;
    advisor::TherapyProfile profile_end;
};

struct Week {
    std::string label;
    int first_day = 0;
    int last_day = 0;
};

/// Evaluation windows inside the simulated span: consecutive weeks W1.. from
/// the first day up to the last day before the transition day, then W13 (the
/// seven days ending on si_last_day) and W14 (the seven days after the
/// excluded day).
std::vector<Week> evaluation_weeks(const Timeline& timeline);

struct TrialOptions {
    /// Skip every advisor update so therapy stays at the standard treatment.
    bool freeze_therapy = false;
};

struct TrialResult {
    std::string patient;
    std::uint64_t patient_index = 0;
    ScenarioId scenario = ScenarioId::S1;
    Timeline timeline;
    std::vector<DayLog> days;
    std::vector<UpdateLog> updates;
    std::optional<advisor::AdvisorState> advisor;
    double transfer_entropy = 0.0;
    std::vector<metrics::PatientWeekMetrics> weeks;  // parallel to evaluation_weeks()
    std::vector<Week> week_defs;
    std::optional<std::string> failure;

    const DayLog& day(int label) const;
};

/// Simulate the whole protocol for one patient. A simulator failure is
/// captured in `failure` with patient and day context; the days before it are kept.
TrialResult run_trial(const sim::PatientParams& patient, std::uint64_t patient_index, const ScenarioConfig& cfg,
                      const TrialOptions& options = {});

/// Metrics of one patient over one week. Throws std::invalid_argument if the
/// week overlaps the excluded day or falls outside the simulated span.
metrics::PatientWeekMetrics patient_week(const TrialResult& trial, const Week& week);

/// Cohort summary of one week across trials.
metrics::WeeklySummary weekly_summary(const std::vector<TrialResult>& trials, const Week& week);

/// Protocol invariants of a finished trial; empty when all hold.
std::vector<std::string> check_trial_invariants(const TrialResult& trial, const ScenarioConfig& cfg);

}  // namespace abba::scenario
