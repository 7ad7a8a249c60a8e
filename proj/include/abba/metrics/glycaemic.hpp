#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace abba::metrics {

/// Percent of samples per glucose band. Boundaries: 50 is hypo, 70 and 180
/// are target, 300 is hyper.
struct BandReport {
    double target = 0.0;        // [70, 180]
    double hypo = 0.0;          // [50, 70)
    double severe_hypo = 0.0;   // < 50
    double hyper = 0.0;         // (180, 300]
    double severe_hyper = 0.0;  // > 300

    double below_70() const { return hypo + severe_hypo; }
    double outside_target() const { return hypo + severe_hypo + hyper + severe_hyper; }
};

/// Throws std::invalid_argument on an empty trace.
BandReport band_percentages(std::span<const double> trace);

/// Symmetrized glucose scale f(g) = 1.509 ((ln g)^1.084 - 5.381).
double risk_transform(double mgdl);

struct RiskIndices {
    double lbgi = 0.0;
    double hbgi = 0.0;
};

/// Throws std::invalid_argument on an empty trace or a non-positive sample.
RiskIndices bg_risk_indices(std::span<const double> trace);

struct MageResult {
    double value = 0.0;
    std::size_t excursions = 0;
    bool no_excursion = false;  // nothing exceeded one SD; value is 0
};

/// Mean amplitude of glycaemic excursions. Each day (`samples_per_day`
/// consecutive samples; a shorter tail counts as its own day) is scanned
/// separately against its own SD: turning points are reduced by repeatedly
/// removing the adjacent pair with the smallest swing while that swing is
/// below one SD, and the surviving alternating peak/nadir swings are averaged
/// across all days.
MageResult mage(std::span<const double> trace, std::size_t samples_per_day = 288);

struct Bolus {
    double t = 0.0;  // minutes since midnight
    double units = 0.0;
};

/// Insulin delivered during one day: the basal rate in force at midnight,
/// later rate changes, and boluses.
struct DayDeliveries {
    double initial_rate = 0.0;  // U/h
    std::vector<std::pair<double, double>> rate_changes;  // (minute, U/h), increasing minutes
    std::vector<Bolus> boluses;

    double basal_units() const;
    double bolus_units() const;
};

/// Total daily insulin: 24 h basal integral plus boluses, in U.
double tdi(const DayDeliveries& day);

}  // namespace abba::metrics
