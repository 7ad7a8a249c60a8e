#include "abba/sim/sensors.hpp"

#include <algorithm>

namespace abba::sim {

SiSchedule draw_si_schedule(Rng& rng, double spread, bool enabled) {
    SiSchedule s;
    s.enabled = enabled;
    s.daily_multiplier = enabled ? rng.uniform(1.0 - spread, 1.0 + spread) : 1.0;
    return s;
}

double dawn_factor(const SiSchedule& s, double t) {
    const double ramp_in = s.dawn_start - s.ramp;
    const double ramp_out = s.dawn_end + s.ramp;
    if (t < ramp_in || t > ramp_out) return 1.0;
    if (t < s.dawn_start) return 1.0 + (s.dawn_factor - 1.0) * (t - ramp_in) / s.ramp;
    if (t <= s.dawn_end) return s.dawn_factor;
    return s.dawn_factor + (1.0 - s.dawn_factor) * (t - s.dawn_end) / s.ramp;
}

double effective_si(const SiSchedule& s, double nominal_si, double t) {
    if (!s.enabled) return nominal_si;
    return nominal_si * s.daily_multiplier * dawn_factor(s, t);
}

namespace {

advisor::GlucoseSample noisy(double g, double t, Rng& rng, double cv, double lo, double hi) {
    const double value = cv > 0.0 ? g * (1.0 + cv * rng.normal()) : g;
    return {t, std::clamp(value, lo, hi)};
}

}  // namespace

advisor::GlucoseSample cgm_sample(double plasma_glucose, double t, Rng& rng, const SensorConfig& cfg) {
    return noisy(plasma_glucose, t, rng, cfg.cgm_cv, cfg.cgm_min, cfg.cgm_max);
}

advisor::GlucoseSample smbg_sample(double plasma_glucose, double t, Rng& rng, const SensorConfig& cfg) {
    return noisy(plasma_glucose, t, rng, cfg.smbg_cv, cfg.smbg_min, cfg.smbg_max);
}

}  // namespace abba::sim
