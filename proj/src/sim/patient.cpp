#include "abba/sim/patient.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace abba::sim {

namespace {

constexpr std::size_t kStates = 8;
using Vec = std::array<double, kStates>;

enum Index : std::size_t { G, X, I, Q1, Q2, S1, S2, A };

Vec pack(const PatientState& s) {
    return {s.glucose, s.insulin_action, s.plasma_insulin, s.gut1, s.gut2, s.depot1, s.depot2, s.absorbed};
}

void unpack(const Vec& v, PatientState& s) {
    s.glucose = v[G];
    s.insulin_action = v[X];
    s.plasma_insulin = v[I];
    s.gut1 = v[Q1];
    s.gut2 = v[Q2];
    s.depot1 = v[S1];
    s.depot2 = v[S2];
    s.absorbed = v[A];
}

Vec derivative(const PatientParams& p, const Vec& v, double si, double insulin_per_min) {
    Vec d{};
    const double gut_out = p.k_gut2 * v[Q2];                         // g/min
    const double ra = 1000.0 * p.bioavailability * gut_out / p.glucose_volume();  // mg/dL/min
    d[G] = p.egp - (p.glucose_effectiveness + v[X]) * v[G] + ra;
    d[X] = p.insulin_action_rate * (si * v[I] - v[X]);
    d[I] = p.k_sc2 * v[S2] * 1e6 / p.insulin_volume() - p.insulin_clearance * v[I];
    d[Q1] = -p.k_gut1 * v[Q1];
    d[Q2] = p.k_gut1 * v[Q1] - gut_out;
    d[S1] = insulin_per_min - p.k_sc1 * v[S1];
    d[S2] = p.k_sc1 * v[S1] - p.k_sc2 * v[S2];
    d[A] = gut_out;
    return d;
}

Vec axpy(const Vec& v, double h, const Vec& k) {
    Vec out;
    for (std::size_t i = 0; i < kStates; ++i) out[i] = v[i] + h * k[i];
    return out;
}

}  // namespace

void PatientParams::validate() const {
    const double rates[] = {body_mass,   egp,    glucose_effectiveness, si,     insulin_action_rate,
                            insulin_clearance, k_sc1, k_sc2, k_gut1, k_gut2, basal_need};
    for (double r : rates) {
        if (!(r > 0.0) || !std::isfinite(r)) {
            throw std::invalid_argument("patient " + id + ": rates and volumes must be positive");
        }
    }
    if (!(bioavailability > 0.0 && bioavailability <= 1.0)) {
        throw std::invalid_argument("patient " + id + ": bioavailability must lie in (0, 1]");
    }
}

PatientState step(const PatientParams& p, PatientState s, double si, double insulin_rate, double dt) {
    if (dt != 1.0 && dt != 5.0) {
        throw std::invalid_argument("step: dt must be 1 or 5 minutes");
    }
    if (!std::isfinite(si) || !std::isfinite(insulin_rate) || insulin_rate < 0.0) {
        throw std::invalid_argument("step: non-finite insulin sensitivity or rate");
    }
    const double u = insulin_rate / 60.0;
    Vec v = pack(s);
    const int substeps = static_cast<int>(dt);
    for (int n = 0; n < substeps; ++n) {
        const Vec k1 = derivative(p, v, si, u);
        const Vec k2 = derivative(p, axpy(v, 0.5, k1), si, u);
        const Vec k3 = derivative(p, axpy(v, 0.5, k2), si, u);
        const Vec k4 = derivative(p, axpy(v, 1.0, k3), si, u);
        for (std::size_t i = 0; i < kStates; ++i) {
            v[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
        }
        v[G] = std::clamp(v[G], kGlucoseFloor, kGlucoseCeiling);
        for (double x : v) {
            if (!std::isfinite(x)) {
                throw SimulationError("patient " + p.id + ": non-finite state on day " + std::to_string(s.day) +
                                      " at minute " + std::to_string(s.clock + n));
            }
        }
    }
    unpack(v, s);
    s.clock += dt;
    while (s.clock >= advisor::kMinutesPerDay) {
        s.clock -= advisor::kMinutesPerDay;
        ++s.day;
    }
    return s;
}

void ingest(PatientState& s, double cho_grams) { s.gut1 += cho_grams; }

void inject(PatientState& s, double units) { s.depot1 += units; }

PatientState basal_equilibrium(const PatientParams& p, double si, double insulin_rate) {
    const double u = insulin_rate / 60.0;
    PatientState s;
    s.depot1 = u / p.k_sc1;
    s.depot2 = u / p.k_sc2;
    s.plasma_insulin = u * 1e6 / (p.insulin_volume() * p.insulin_clearance);
    s.insulin_action = si * s.plasma_insulin;
    s.glucose = std::clamp(p.egp / (p.glucose_effectiveness + s.insulin_action), kGlucoseFloor, kGlucoseCeiling);
    return s;
}

double basal_rate_for(const PatientParams& p, double si, double glucose) {
    const double action = p.egp / glucose - p.glucose_effectiveness;
    if (!(action > 0.0)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const double insulin = action / si;
    return insulin * p.insulin_volume() * p.insulin_clearance / 1e6 * 60.0;
}

}  // namespace abba::sim
