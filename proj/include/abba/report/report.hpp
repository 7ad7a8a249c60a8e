#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "abba/scenario/config.hpp"
#include "abba/scenario/trial.hpp"
#include "abba/sim/patient.hpp"

namespace abba::report {

inline constexpr const char* kVersion = "1.0.0";

/// One (scenario, patient) job and its result.
struct TrialJob {
    scenario::ScenarioId scenario = scenario::ScenarioId::S1;
    std::size_t patient_index = 0;
};

struct RunResults {
    std::vector<sim::PatientParams> cohort;
    std::vector<TrialJob> jobs;                    // scenario-major, patient-minor
    std::vector<scenario::TrialResult> trials;     // parallel to jobs
    std::vector<std::string> invariant_issues;     // "<scenario> <patient>: <issue>"

    std::size_t failures() const;
    /// Trials of one scenario in patient order.
    std::vector<scenario::TrialResult> scenario_trials(scenario::ScenarioId id) const;
};

/// Generate the cohort and run every (scenario, patient) trial on `threads`
/// workers. Results are stored by job index, so the outcome does not depend
/// on the thread count or scheduling.
RunResults run_all(const scenario::RunConfig& cfg, int threads);

/// Stable hash of the resolved config text, 16 lowercase hex digits.
std::string config_hash(const scenario::RunConfig& cfg);

/// Write the full output tree under `out` (created if missing):
///   config.yaml, cohort.json, manifest.json, summary.json,
///   metrics_patient_week.csv, plot_weekly.csv,
///   trials/<scenario>/<patient>/{glucose,daily}.csv
/// Throws std::runtime_error if a file cannot be written.
void write_outputs(const std::filesystem::path& out, const scenario::RunConfig& cfg, const RunResults& results);

/// CSV headers; pinned by tests and documented in docs/output-files.md.
extern const char* const kPatientWeekHeader;
extern const char* const kPlotWeeklyHeader;
extern const char* const kGlucoseHeader;
extern const char* const kDailyHeader;

std::string patient_week_csv(const scenario::RunConfig& cfg, const RunResults& results);
std::string plot_weekly_csv(const scenario::RunConfig& cfg, const RunResults& results);
std::string glucose_csv(const scenario::TrialResult& trial);
std::string daily_csv(const scenario::TrialResult& trial);
std::string summary_json(const scenario::RunConfig& cfg, const RunResults& results);

}  // namespace abba::report
