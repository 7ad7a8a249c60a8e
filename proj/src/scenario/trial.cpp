#include "abba/scenario/trial.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <fmt/format.h>

#include "abba/rng.hpp"
#include "abba/sim/sensors.hpp"

namespace abba::scenario {

namespace {

using advisor::GlucoseDayRecord;
using advisor::GlucoseSample;
using advisor::MealAnnouncement;

constexpr int kSamplesPerDay = 288;

enum class EventKind { DayTrigger = 0, Measurement = 1, Meal = 2 };

struct Event {
    int minute = 0;
    EventKind kind = EventKind::Meal;
    std::size_t index = 0;  // meal slot or measurement ordinal
};

int to_minute(double t) { return std::clamp(static_cast<int>(std::lround(t)), 0, 1439); }

std::vector<MealAnnouncement> announcements(const MealPlan& plan, int up_to_minute) {
    std::vector<MealAnnouncement> out;
    for (const auto& e : plan.events) {
        const int m = to_minute(e.time);
        if (!e.skipped && m <= up_to_minute) {
            out.push_back({static_cast<double>(m), e.announced_cho, e.meal_index});
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
    return out;
}

/// Yesterday's record followed by today's readings and announcements so far.
GlucoseDayRecord extended_record(advisor::Mode mode, const DayLog& yesterday, const DayLog& today,
                                 int minute) {
    GlucoseDayRecord rec;
    rec.mode = mode;
    const auto& prev = mode == advisor::Mode::Cgm ? yesterday.cgm : yesterday.smbg;
    const auto& now = mode == advisor::Mode::Cgm ? today.cgm : today.smbg;
    rec.samples = prev;
    for (const auto& s : now) {
        if (s.t < minute) rec.samples.push_back({s.t + advisor::kMinutesPerDay, s.mgdl});
    }
    rec.meals = announcements(yesterday.plan, 1439);
    for (auto m : announcements(today.plan, minute)) {
        m.t += advisor::kMinutesPerDay;
        rec.meals.push_back(m);
    }
    return rec;
}

GlucoseDayRecord day_record(advisor::Mode mode, const DayLog& day, int up_to_minute) {
    GlucoseDayRecord rec;
    rec.mode = mode;
    for (const auto& s : mode == advisor::Mode::Cgm ? day.cgm : day.smbg) {
        if (s.t <= up_to_minute) rec.samples.push_back(s);
    }
    rec.meals = announcements(day.plan, up_to_minute);
    return rec;
}

void set_rate(metrics::DayDeliveries& deliveries, int minute, double rate) {
    if (minute == 0 && deliveries.rate_changes.empty()) {
        deliveries.initial_rate = rate;
    } else {
        deliveries.rate_changes.emplace_back(static_cast<double>(minute), rate);
    }
}

}  // namespace

const DayLog& TrialResult::day(int label) const {
    const auto it = std::find_if(days.begin(), days.end(), [label](const DayLog& d) { return d.day == label; });
    if (it == days.end()) {
        throw std::out_of_range(fmt::format("trial {}: day D{} was not simulated", patient, label));
    }
    return *it;
}

std::vector<Week> evaluation_weeks(const Timeline& t) {
    std::vector<Week> weeks;
    const int consecutive_end = std::min(t.last_day, t.excluded_day - 1);
    for (int first = t.first_day; first + 6 <= consecutive_end; first += 7) {
        weeks.push_back({fmt::format("W{}", weeks.size() + 1), first, first + 6});
    }
    const Week with_si{"", t.si_last_day - 6, t.si_last_day};
    if (with_si.last_day <= t.last_day && with_si.first_day >= t.first_day &&
        (weeks.empty() || weeks.back().first_day != with_si.first_day)) {
        weeks.push_back({fmt::format("W{}", weeks.size() + 1), with_si.first_day, with_si.last_day});
    }
    const Week fixed_si{"", t.excluded_day + 1, t.excluded_day + 7};
    if (fixed_si.last_day <= t.last_day) {
        weeks.push_back({fmt::format("W{}", weeks.size() + 1), fixed_si.first_day, fixed_si.last_day});
    }
    return weeks;
}

TrialResult run_trial(const sim::PatientParams& patient, std::uint64_t patient_index, const ScenarioConfig& cfg,
                      const TrialOptions& options) {
    cfg.validate();
    patient.validate();
    const Timeline& tl = cfg.timeline;
    const advisor::Mode mode = cfg.mode;
    const int first_active = tl.first_active_day();
    const std::uint64_t seed = cfg.scenario_seed;

    TrialResult r;
    r.patient = patient.id;
    r.patient_index = patient_index;
    r.scenario = cfg.id;
    r.timeline = tl;

    const advisor::TherapyProfile standard = patient.standard_treatment;
    sim::PatientState state = sim::basal_equilibrium(patient, patient.si, standard.br);
    double br = standard.br;
    std::optional<advisor::AdvisorState> adv;
    std::vector<GlucoseDayRecord> init_days;
    std::vector<double> init_insulin;

    auto record_update = [&](int day, int minute, std::size_t unit, const advisor::UnitReport& rep) {
        r.updates.push_back({day, static_cast<double>(minute), unit, rep});
    };

    for (int d = tl.first_day; d <= tl.last_day; ++d) {
        DayLog log;
        log.day = d;
        log.active = d >= first_active;
        log.si_enabled = tl.si_enabled(d);
        log.plan = build_day_plan(cfg, patient_index, d);
        const std::vector<double> readings =
            mode == advisor::Mode::Smbg ? schedule_measurements(cfg, log.plan, patient_index) : std::vector<double>{};

        Rng si_rng(derive_seed(seed, patient_index, d, "si"));
        sim::SiSchedule si = sim::draw_si_schedule(si_rng, cfg.si.inter_day, log.si_enabled);
        si.dawn_start = cfg.si.dawn_start;
        si.dawn_end = cfg.si.dawn_end;
        si.dawn_factor = cfg.si.dawn_factor;
        si.ramp = cfg.si.ramp;
        log.si_multiplier = si.daily_multiplier;
        Rng cgm_rng(derive_seed(seed, patient_index, d, "cgm"));
        Rng smbg_rng(derive_seed(seed, patient_index, d, "smbg"));

        std::vector<Event> events;
        if (log.active && (mode == advisor::Mode::Cgm || d == first_active)) {
            events.push_back({0, EventKind::DayTrigger, 0});
        }
        for (std::size_t i = 0; i < readings.size(); ++i) {
            events.push_back({to_minute(readings[i]), EventKind::Measurement, i});
        }
        for (std::size_t i = 0; i < log.plan.events.size(); ++i) {
            if (!log.plan.events[i].skipped) {
                events.push_back({to_minute(log.plan.events[i].time), EventKind::Meal, i});
            }
        }
        std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
            return a.minute != b.minute ? a.minute < b.minute : a.kind < b.kind;
        });

        log.deliveries.initial_rate = br;
        std::vector<double> slot_units(kSamplesPerDay, 0.0);
        log.truth.reserve(kSamplesPerDay);
        log.cgm.reserve(kSamplesPerDay);
        const DayLog* yesterday = r.days.empty() ? nullptr : &r.days.back();

        try {
            std::size_t next = 0;
            for (int m = 0; m < 1440; ++m) {
                for (; next < events.size() && events[next].minute == m; ++next) {
                    const Event& ev = events[next];
                    switch (ev.kind) {
                        case EventKind::DayTrigger: {
                            if (d == first_active) {
                                adv = advisor::initialize_policy(init_days, init_insulin, standard, mode,
                                                                 derive_seed(seed, patient_index, 0, "advisor"),
                                                                 cfg.advisor);
                                r.transfer_entropy = adv->transfer_entropy;
                            }
                            if (!options.freeze_therapy && yesterday != nullptr) {
                                const auto rep = advisor::update_basal_rate(*adv, day_record(mode, *yesterday, 1439));
                                record_update(d, m, advisor::kBasalUnit, rep);
                                if (adv->profile.br != br) {
                                    br = adv->profile.br;
                                    set_rate(log.deliveries, m, br);
                                }
                            }
                            break;
                        }
                        case EventKind::Measurement: {
                            log.smbg.push_back(sim::smbg_sample(state.glucose, m, smbg_rng, cfg.sensors));
                            const bool bedtime = ev.index + 1 == readings.size();
                            if (bedtime && log.active && d < tl.last_day && adv && !options.freeze_therapy) {
                                const auto rep = advisor::update_basal_rate(*adv, day_record(mode, log, m));
                                record_update(d, m, advisor::kBasalUnit, rep);
                                if (adv->profile.br != br) {
                                    br = adv->profile.br;
                                    set_rate(log.deliveries, m, br);
                                }
                            }
                            break;
                        }
                        case EventKind::Meal: {
                            const MealEvent& meal = log.plan.events[ev.index];
                            sim::ingest(state, meal.cho);
                            if (!meal.main()) break;
                            double cir = standard.cir[static_cast<std::size_t>(meal.meal_index - 1)];
                            if (log.active && adv) {
                                if (!options.freeze_therapy && yesterday != nullptr) {
                                    const auto rep = advisor::update_meal_ratio(
                                        *adv, meal.meal_index, extended_record(mode, *yesterday, log, m));
                                    record_update(d, m, static_cast<std::size_t>(meal.meal_index), rep);
                                }
                                cir = adv->profile.cir[static_cast<std::size_t>(meal.meal_index - 1)];
                            }
                            const double units = meal.announced_cho / cir;
                            sim::inject(state, units);
                            log.boluses.push_back({meal.meal_index, static_cast<double>(m), meal.announced_cho, cir, units});
                            log.deliveries.boluses.push_back({static_cast<double>(m), units});
                            slot_units[static_cast<std::size_t>(m / 5)] += units;
                            break;
                        }
                    }
                }
                if (m % 5 == 0) {
                    log.truth.push_back(state.glucose);
                    log.cgm.push_back(sim::cgm_sample(state.glucose, m, cgm_rng, cfg.sensors));
                }
                state = sim::step(patient, state, sim::effective_si(si, patient.si, m), br, 1.0);
                slot_units[static_cast<std::size_t>(m / 5)] += br / 60.0;
            }
        } catch (const sim::SimulationError& e) {
            r.failure = fmt::format("{} {} day D{}: {}", to_string(cfg.id), patient.id, d, e.what());
            break;
        }

        if (d <= tl.init_last_day) {
            GlucoseDayRecord rec;
            rec.mode = advisor::Mode::Cgm;
            rec.samples = log.cgm;
            rec.meals = announcements(log.plan, 1439);
            init_days.push_back(std::move(rec));
            init_insulin.insert(init_insulin.end(), slot_units.begin(), slot_units.end());
        }
        log.profile_end = adv ? adv->profile : standard;
        r.days.push_back(std::move(log));
    }

    r.advisor = adv;
    if (!r.failure) {
        r.week_defs = evaluation_weeks(tl);
        for (const Week& w : r.week_defs) {
            r.weeks.push_back(patient_week(r, w));
        }
    }
    return r;
}

metrics::PatientWeekMetrics patient_week(const TrialResult& trial, const Week& week) {
    const Timeline& tl = trial.timeline;
    if (week.first_day <= tl.excluded_day && tl.excluded_day <= week.last_day) {
        throw std::invalid_argument(fmt::format("week {} overlaps excluded day D{}", week.label, tl.excluded_day));
    }
    if (week.first_day < tl.first_day || week.last_day > tl.last_day || week.first_day > week.last_day) {
        throw std::invalid_argument(fmt::format("week {} (D{}-D{}) is outside the simulated span D{}-D{}", week.label,
                                                week.first_day, week.last_day, tl.first_day, tl.last_day));
    }
    std::vector<double> trace;
    std::vector<metrics::DayDeliveries> deliveries;
    for (int d = week.first_day; d <= week.last_day; ++d) {
        const DayLog& log = trial.day(d);
        trace.insert(trace.end(), log.truth.begin(), log.truth.end());
        deliveries.push_back(log.deliveries);
    }
    return metrics::week_metrics(trial.patient, trace, deliveries);
}

metrics::WeeklySummary weekly_summary(const std::vector<TrialResult>& trials, const Week& week) {
    std::vector<metrics::PatientWeekMetrics> per_patient;
    per_patient.reserve(trials.size());
    for (const auto& t : trials) {
        if (t.failure) continue;
        per_patient.push_back(patient_week(t, week));
    }
    return metrics::summarize_week(week.label, std::move(per_patient));
}

std::vector<std::string> check_trial_invariants(const TrialResult& trial, const ScenarioConfig& cfg) {
    std::vector<std::string> issues;
    const Timeline& tl = trial.timeline;
    int expected = tl.first_day;
    for (const DayLog& log : trial.days) {
        if (log.day != expected) issues.push_back(fmt::format("day sequence broken at D{}", log.day));
        expected = log.day + 1;
        if (log.si_enabled != tl.si_enabled(log.day)) issues.push_back(fmt::format("SI flag wrong on D{}", log.day));
        if (log.active != (log.day >= tl.first_active_day())) {
            issues.push_back(fmt::format("phase flag wrong on D{}", log.day));
        }
        if (log.truth.size() != static_cast<std::size_t>(kSamplesPerDay)) {
            issues.push_back(fmt::format("D{} has {} truth samples", log.day, log.truth.size()));
        }
        std::size_t next_bolus = 0;
        for (const MealEvent& e : log.plan.events) {
            if (!e.main() || e.skipped) continue;
            if (next_bolus >= log.boluses.size() || log.boluses[next_bolus].meal_index != e.meal_index) {
                issues.push_back(fmt::format("D{} meal {} has no bolus", log.day, e.meal_index));
                continue;
            }
            const BolusLog& b = log.boluses[next_bolus++];
            if (std::abs(b.units - e.announced_cho / b.cir) > 1e-12 * std::max(1.0, b.units)) {
                issues.push_back(fmt::format("D{} meal {} bolus mismatch", log.day, e.meal_index));
            }
        }
        if (next_bolus != log.boluses.size()) issues.push_back(fmt::format("D{} has extra boluses", log.day));
        if (cfg.mode == advisor::Mode::Smbg && log.smbg.size() != 4) {
            issues.push_back(fmt::format("D{} has {} SMBG readings", log.day, log.smbg.size()));
        }
    }
    std::map<std::pair<int, std::size_t>, int> per_day;
    for (const UpdateLog& u : trial.updates) {
        if (u.day < tl.first_active_day()) issues.push_back(fmt::format("advisor update in init phase on D{}", u.day));
        // in SMBG mode the first control day also carries the initial midnight basal update
        const bool initial_smbg = cfg.mode == advisor::Mode::Smbg && u.day == tl.first_active_day() &&
                                  u.unit == advisor::kBasalUnit;
        if (++per_day[{u.day, u.unit}] > (initial_smbg ? 2 : 1)) {
            issues.push_back(fmt::format("unit {} updated too often on D{}", u.unit, u.day));
        }
    }
    for (const Week& w : trial.week_defs) {
        if (w.last_day - w.first_day != 6) issues.push_back(w.label + " is not 7 days long");
        if (w.first_day <= tl.excluded_day && tl.excluded_day <= w.last_day) {
            issues.push_back(w.label + " includes the excluded day");
        }
    }
    return issues;
}

}  // namespace abba::scenario
