#pragma once

#include <array>

#include "abba/advisor/records.hpp"
#include "abba/rl/actor_critic.hpp"

namespace abba::advisor {

struct FusionConfig {
    double m = 0.5;            // weight of the old value in the fusion
    double max_change = 0.05;  // largest relative change per update
    double br_floor = 0.05;    // U/h
    double cir_floor = 1.0;    // g/U
};

/// m * old + (1 - m) * (old + p_e * old).
double fuse(double old_value, double p_e, double m = 0.5);

/// Clamp `value` into [old (1 - max_change), old (1 + max_change)].
double clamp_change(double value, double old_value, double max_change);

/// Switch l: true when the CIR would move insulin in the same direction as the basal rate
/// (basal up with CIR down, or basal down with CIR up).
bool opposition_guard(double br_final, double br_old, double cir_candidate, double cir_old);

struct QuantityUpdate {
    double fused = 0.0;
    double value = 0.0;
    bool clamped = false;
    bool guarded = false;
    bool floored = false;
};

QuantityUpdate update_basal(double br_old, double p_e, const FusionConfig& cfg = {});

/// The guard compares the 5%-clamped candidate with cir_old.
QuantityUpdate update_cir(double cir_old, double p_e, double br_final, double br_old,
                          const FusionConfig& cfg = {});

struct GuardedProfile {
    TherapyProfile profile;
    QuantityUpdate br;
    std::array<QuantityUpdate, kMainMeals> cir{};
};

/// All four quantities from one set of final actions, ordered (BR, CIR1, CIR2, CIR3).
GuardedProfile fuse_and_guard(const TherapyProfile& old_profile, const std::array<rl::ControlAction, 4>& actions,
                              const FusionConfig& cfg = {});

}  // namespace abba::advisor
