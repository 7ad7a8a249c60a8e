#include "abba/advisor/fusion.hpp"

#include <algorithm>

namespace abba::advisor {

double fuse(double old_value, double p_e, double m) {
    const double candidate = old_value + p_e * old_value;
    return m * old_value + (1.0 - m) * candidate;
}

double clamp_change(double value, double old_value, double max_change) {
    const double lo = old_value * (1.0 - max_change);
    const double hi = old_value * (1.0 + max_change);
    return std::clamp(value, std::min(lo, hi), std::max(lo, hi));
}

bool opposition_guard(double br_final, double br_old, double cir_candidate, double cir_old) {
    return (br_final > br_old && cir_candidate < cir_old) || (br_final < br_old && cir_candidate > cir_old);
}

namespace {

QuantityUpdate fuse_clamp_floor(double old_value, double p_e, double floor, const FusionConfig& cfg) {
    QuantityUpdate u;
    u.fused = fuse(old_value, p_e, cfg.m);
    u.value = clamp_change(u.fused, old_value, cfg.max_change);
    u.clamped = u.value != u.fused;
    if (!(u.value >= floor)) {
        u.value = floor;
        u.floored = true;
    }
    return u;
}

}  // namespace

QuantityUpdate update_basal(double br_old, double p_e, const FusionConfig& cfg) {
    return fuse_clamp_floor(br_old, p_e, cfg.br_floor, cfg);
}

QuantityUpdate update_cir(double cir_old, double p_e, double br_final, double br_old, const FusionConfig& cfg) {
    QuantityUpdate u = fuse_clamp_floor(cir_old, p_e, cfg.cir_floor, cfg);
    if (opposition_guard(br_final, br_old, u.value, cir_old)) {
        u.value = cir_old;
        u.guarded = true;
    }
    return u;
}

GuardedProfile fuse_and_guard(const TherapyProfile& old_profile, const std::array<rl::ControlAction, 4>& actions,
                              const FusionConfig& cfg) {
    GuardedProfile out;
    out.br = update_basal(old_profile.br, actions[0].p_e, cfg);
    out.profile.br = out.br.value;
    for (int i = 0; i < kMainMeals; ++i) {
        out.cir[i] = update_cir(old_profile.cir[i], actions[i + 1].p_e, out.br.value, old_profile.br, cfg);
        out.profile.cir[i] = out.cir[i].value;
    }
    return out;
}

}  // namespace abba::advisor
