#pragma once

#include <stdexcept>
#include <string>

#include "abba/advisor/records.hpp"

namespace abba::sim {

inline constexpr double kGlucoseVolumePerKg = 1.9;  // dL/kg
inline constexpr double kInsulinVolumePerKg = 120.0;  // mL/kg
inline constexpr double kGlucoseFloor = 20.0;
inline constexpr double kGlucoseCeiling = 600.0;

/// Virtual T1D patient. Minimal-model glucose kinetics with a remote insulin
/// action compartment, a two-compartment gut and a two-compartment
/// subcutaneous insulin depot.
struct PatientParams {
    std::string id;
    double body_mass = 70.0;        // kg
    double egp = 1.6;               // endogenous glucose production, mg/dL/min
    double glucose_effectiveness = 0.006;  // 1/min
    double si = 5e-4;               // insulin sensitivity, 1/min per uU/mL
    double insulin_action_rate = 0.02;  // remote action, 1/min
    double insulin_clearance = 0.14;    // 1/min
    double k_sc1 = 0.02;            // depot 1 -> depot 2, 1/min
    double k_sc2 = 0.02;            // depot 2 -> plasma, 1/min
    double k_gut1 = 0.035;          // stomach -> gut, 1/min
    double k_gut2 = 0.035;          // gut -> plasma, 1/min
    double bioavailability = 0.9;
    double basal_glucose = 120.0;   // equilibrium target of the standard basal, mg/dL
    double basal_need = 1.0;        // U/h that holds basal_glucose at nominal SI
    advisor::TherapyProfile standard_treatment;

    double glucose_volume() const { return kGlucoseVolumePerKg * body_mass; }
    double insulin_volume() const { return kInsulinVolumePerKg * body_mass; }

    /// Throws std::invalid_argument on a non-positive rate or bioavailability outside (0, 1].
    void validate() const;
};

struct PatientState {
    double glucose = 120.0;         // mg/dL
    double insulin_action = 0.0;    // 1/min
    double plasma_insulin = 0.0;    // uU/mL
    double gut1 = 0.0;              // g
    double gut2 = 0.0;              // g
    double depot1 = 0.0;            // U
    double depot2 = 0.0;            // U
    double absorbed = 0.0;          // cumulative CHO leaving the gut, g
    double clock = 0.0;             // minutes since midnight
    int day = 0;
};

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Advance by `dt` minutes (1 or 5) with fixed-step RK4 at 1-min substeps.
/// `si` is the effective insulin sensitivity, `insulin_rate` the pump basal in U/h.
PatientState step(const PatientParams& p, PatientState s, double si, double insulin_rate, double dt);

/// Meal ingestion and bolus are impulses into the first gut / depot compartment.
void ingest(PatientState& s, double cho_grams);
void inject(PatientState& s, double units);

/// Steady state under a constant basal rate with no meals.
PatientState basal_equilibrium(const PatientParams& p, double si, double insulin_rate);

/// Basal rate (U/h) whose steady state sits at `glucose`; NaN if unreachable.
double basal_rate_for(const PatientParams& p, double si, double glucose);

}  // namespace abba::sim
