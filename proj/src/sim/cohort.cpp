#include "abba/sim/cohort.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "abba/rng.hpp"

namespace abba::sim {

namespace {

using nlohmann::json;

double draw_uniform(Rng& rng, Range r) { return rng.uniform(r.lo, r.hi); }

double draw_log_uniform(Rng& rng, Range r) { return std::exp(rng.uniform(std::log(r.lo), std::log(r.hi))); }

double glucose_after_meal(const PatientParams& p, double meal, double bolus, double horizon) {
    PatientState s = basal_equilibrium(p, p.si, p.basal_need);
    ingest(s, meal);
    inject(s, bolus);
    for (double t = 0.0; t < horizon; t += 5.0) {
        s = step(p, s, p.si, p.basal_need, 5.0);
    }
    return s.glucose;
}

}  // namespace

double neutral_cir(const PatientParams& p, double meal, double horizon) {
    const double target = basal_equilibrium(p, p.si, p.basal_need).glucose;
    double lo = 0.0;
    double hi = 60.0;
    if (glucose_after_meal(p, meal, hi, horizon) > target || glucose_after_meal(p, meal, lo, horizon) < target) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (glucose_after_meal(p, meal, mid, horizon) > target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return meal / (0.5 * (lo + hi));
}

double equilibrium_glucose(const PatientParams& p) {
    PatientState s = basal_equilibrium(p, p.si, p.standard_treatment.br);
    for (int m = 0; m < 1440; m += 5) {
        s = step(p, s, p.si, p.standard_treatment.br, 5.0);
    }
    return s.glucose;
}

std::vector<PatientParams> generate_cohort(int n, std::uint64_t master_seed, const CohortConfig& cfg) {
    if (n < 1) {
        throw std::invalid_argument("generate_cohort: n must be >= 1");
    }
    std::vector<PatientParams> cohort;
    cohort.reserve(static_cast<std::size_t>(n));
    for (int idx = 0; idx < n; ++idx) {
        Rng rng(derive_seed(master_seed, static_cast<std::uint64_t>(idx), 0, "cohort"));
        bool accepted = false;
        for (int attempt = 0; attempt < cfg.max_retries && !accepted; ++attempt) {
            PatientParams p;
            p.id = fmt::format("p{:03d}", idx);
            p.body_mass = draw_uniform(rng, cfg.body_mass);
            p.egp = draw_uniform(rng, cfg.egp);
            p.glucose_effectiveness = draw_log_uniform(rng, cfg.glucose_effectiveness);
            p.si = draw_log_uniform(rng, cfg.si);
            p.insulin_action_rate = draw_log_uniform(rng, cfg.insulin_action_rate);
            p.insulin_clearance = draw_log_uniform(rng, cfg.insulin_clearance);
            p.k_sc1 = draw_log_uniform(rng, cfg.k_sc);
            p.k_sc2 = draw_log_uniform(rng, cfg.k_sc);
            p.k_gut1 = draw_log_uniform(rng, cfg.k_gut);
            p.k_gut2 = draw_log_uniform(rng, cfg.k_gut);
            p.bioavailability = draw_uniform(rng, cfg.bioavailability);
            p.basal_glucose = draw_uniform(rng, cfg.basal_glucose);
            const double cir_factor = draw_uniform(rng, cfg.cir_factor);

            p.basal_need = basal_rate_for(p, p.si, p.basal_glucose);
            if (!(p.basal_need >= cfg.basal_need_bounds.lo && p.basal_need <= cfg.basal_need_bounds.hi)) {
                continue;
            }
            const double cir = neutral_cir(p, cfg.probe_meal, cfg.probe_horizon) * cir_factor;
            if (!(cir >= cfg.cir_bounds.lo && cir <= cfg.cir_bounds.hi)) {
                continue;
            }
            p.standard_treatment.br = p.basal_need;
            p.standard_treatment.cir = {cir, cir, cir};
            const double g = equilibrium_glucose(p);
            if (!(g >= 90.0 && g <= 180.0)) {
                continue;
            }
            p.validate();
            cohort.push_back(std::move(p));
            accepted = true;
        }
        if (!accepted) {
            throw std::runtime_error(fmt::format("generate_cohort: patient {} failed the screen {} times", idx,
                                                 cfg.max_retries));
        }
    }
    return cohort;
}

std::string cohort_to_json(const std::vector<PatientParams>& cohort, std::uint64_t master_seed) {
    json patients = json::object();
    for (const auto& p : cohort) {
        patients[p.id] = {
            {"body_mass_kg", p.body_mass},
            {"egp_mgdl_min", p.egp},
            {"glucose_effectiveness", p.glucose_effectiveness},
            {"si", p.si},
            {"insulin_action_rate", p.insulin_action_rate},
            {"insulin_clearance", p.insulin_clearance},
            {"k_sc", {p.k_sc1, p.k_sc2}},
            {"k_gut", {p.k_gut1, p.k_gut2}},
            {"bioavailability", p.bioavailability},
            {"basal_glucose", p.basal_glucose},
            {"basal_need_uh", p.basal_need},
            {"standard_treatment",
             {{"br", p.standard_treatment.br},
              {"cir", {p.standard_treatment.cir[0], p.standard_treatment.cir[1], p.standard_treatment.cir[2]}}}},
        };
    }
    json doc = {{"format", "abba-cohort"}, {"version", 1}, {"master_seed", master_seed}, {"patients", patients}};
    return doc.dump(2) + "\n";
}

std::vector<PatientParams> cohort_from_json(const std::string& text) {
    const json doc = json::parse(text);
    if (doc.at("format") != "abba-cohort" || doc.at("version") != 1) {
        throw std::invalid_argument("cohort file: unsupported format or version");
    }
    std::vector<PatientParams> cohort;
    for (const auto& [id, j] : doc.at("patients").items()) {
        PatientParams p;
        p.id = id;
        p.body_mass = j.at("body_mass_kg");
        p.egp = j.at("egp_mgdl_min");
        p.glucose_effectiveness = j.at("glucose_effectiveness");
        p.si = j.at("si");
        p.insulin_action_rate = j.at("insulin_action_rate");
        p.insulin_clearance = j.at("insulin_clearance");
        p.k_sc1 = j.at("k_sc").at(0);
        p.k_sc2 = j.at("k_sc").at(1);
        p.k_gut1 = j.at("k_gut").at(0);
        p.k_gut2 = j.at("k_gut").at(1);
        p.bioavailability = j.at("bioavailability");
        p.basal_glucose = j.at("basal_glucose");
        p.basal_need = j.at("basal_need_uh");
        p.standard_treatment.br = j.at("standard_treatment").at("br");
        for (int i = 0; i < 3; ++i) {
            p.standard_treatment.cir[i] = j.at("standard_treatment").at("cir").at(i);
        }
        p.validate();
        cohort.push_back(std::move(p));
    }
    return cohort;
}

}  // namespace abba::sim
