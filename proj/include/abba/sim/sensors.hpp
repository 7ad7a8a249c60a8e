#pragma once

#include "abba/advisor/records.hpp"
#include "abba/rng.hpp"

namespace abba::sim {

/// Insulin-sensitivity modulation for one day: an inter-day multiplier and a
/// dawn-phenomenon plateau with linear ramps just outside it.
struct SiSchedule {
    double daily_multiplier = 1.0;
    double dawn_start = 240.0;  // 04:00
    double dawn_end = 480.0;    // 08:00
    double dawn_factor = 0.5;
    double ramp = 30.0;
    bool enabled = true;
};

/// Draw a day's multiplier uniformly in [1 - spread, 1 + spread].
SiSchedule draw_si_schedule(Rng& rng, double spread, bool enabled);

double dawn_factor(const SiSchedule& schedule, double t);

/// nominal * daily multiplier * dawn factor; nominal alone when disabled.
double effective_si(const SiSchedule& schedule, double nominal_si, double t);

struct SensorConfig {
    double cgm_cv = 0.05;
    double smbg_cv = 0.05;
    double cgm_min = 40.0;
    double cgm_max = 400.0;
    double smbg_min = 20.0;
    double smbg_max = 600.0;
    double cgm_period = 5.0;
};

/// Plasma glucose with multiplicative Gaussian noise, clipped to the device range.
advisor::GlucoseSample cgm_sample(double plasma_glucose, double t, Rng& rng, const SensorConfig& cfg = {});
advisor::GlucoseSample smbg_sample(double plasma_glucose, double t, Rng& rng, const SensorConfig& cfg = {});

}  // namespace abba::sim
