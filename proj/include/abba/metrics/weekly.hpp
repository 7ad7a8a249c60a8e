#pragma once

#include <span>
#include <string>
#include <vector>

#include "abba/metrics/glycaemic.hpp"

namespace abba::metrics {

/// Outcome metrics of one patient over one evaluation window.
struct PatientWeekMetrics {
    std::string patient;
    BandReport bands;
    RiskIndices risk;
    MageResult mage;
    double tdi = 0.0;  // mean daily total insulin, U
};

/// Metrics over a week's concatenated 5-min trace and its daily deliveries.
PatientWeekMetrics week_metrics(std::string patient, std::span<const double> trace,
                                std::span<const DayDeliveries> days, std::size_t samples_per_day = 288);

struct FieldStats {
    double mean = 0.0;
    double sd = 0.0;  // sample SD; 0 for a single patient
    double median = 0.0;
};

FieldStats field_stats(std::vector<double> values);

struct WeeklySummary {
    std::string week;
    std::vector<PatientWeekMetrics> patients;  // sorted by patient id
    FieldStats target, hypo, severe_hypo, hyper, severe_hyper;
    FieldStats lbgi, hbgi, mage, tdi;
};

/// Cohort aggregation. Patients are sorted by id first, so the result does
/// not depend on the input order.
WeeklySummary summarize_week(std::string week, std::vector<PatientWeekMetrics> patients);

}  // namespace abba::metrics
