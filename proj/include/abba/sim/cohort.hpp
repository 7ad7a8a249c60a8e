#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "abba/sim/patient.hpp"

namespace abba::sim {

struct Range {
    double lo;
    double hi;
};

/// Draw bounds of the virtual population. Rates are drawn log-uniformly,
/// everything else uniformly.
struct CohortConfig {
    Range body_mass{55.0, 95.0};
    Range egp{1.3, 2.0};
    Range glucose_effectiveness{0.004, 0.008};
    Range si{3e-4, 9e-4};
    Range insulin_action_rate{0.02, 0.04};
    Range insulin_clearance{0.1, 0.2};
    Range k_sc{0.018, 0.03};
    Range k_gut{0.015, 0.03};
    Range bioavailability{0.8, 0.95};
    Range basal_glucose{90.0, 125.0};
    /// Standard-treatment CIR relative to the bolus-neutral ratio; < 1 means more insulin.
    Range cir_factor{0.45, 0.75};
    Range basal_need_bounds{0.3, 3.0};
    Range cir_bounds{3.0, 40.0};
    double probe_meal = 60.0;        // g
    double probe_horizon = 360.0;    // min
    int max_retries = 100;
};

/// Carbohydrate ratio at which a `meal` g meal with a simultaneous bolus
/// brings glucose back to its basal equilibrium `horizon` minutes later
/// (nominal SI, no dawn effect). NaN if no bolus in [0, 60] U achieves it.
double neutral_cir(const PatientParams& p, double meal, double horizon);

/// Seeded virtual cohort. Each patient draws from its own stream, keyed by
/// (master seed, index); draws failing the equilibrium screen are redrawn.
std::vector<PatientParams> generate_cohort(int n, std::uint64_t master_seed, const CohortConfig& cfg = {});

/// Simulated glucose after 24 h at the standard basal with no meals,
/// starting from the analytic equilibrium.
double equilibrium_glucose(const PatientParams& p);

std::string cohort_to_json(const std::vector<PatientParams>& cohort, std::uint64_t master_seed);
std::vector<PatientParams> cohort_from_json(const std::string& text);

}  // namespace abba::sim
