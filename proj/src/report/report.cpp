#include "abba/report/report.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "abba/rng.hpp"
#include "abba/sim/cohort.hpp"

namespace abba::report {

using scenario::RunConfig;
using scenario::ScenarioId;
using scenario::TrialResult;
using nlohmann::ordered_json;

const char* const kPatientWeekHeader =
    "scenario,patient,week,first_day,last_day,pct_target,pct_hypo,pct_severe_hypo,pct_hyper,pct_severe_hyper,"
    "lbgi,hbgi,mage,mage_excursions,tdi";
const char* const kPlotWeeklyHeader =
    "scenario,week,first_day,last_day,patients,lbgi_mean,lbgi_sd,lbgi_median,hbgi_mean,hbgi_sd,hbgi_median,"
    "mage_mean,mage_sd,mage_median,tdi_mean,tdi_sd,tdi_median";
const char* const kGlucoseHeader = "timestamp_min,day,minute,value_mgdl";
const char* const kDailyHeader =
    "day,phase,si_enabled,si_multiplier,br_uh,cir_breakfast,cir_lunch,cir_dinner,basal_u,bolus_u,tdi_u,"
    "skipped_meals,smbg_readings";

namespace {

std::string num(double v) { return fmt::format("{:.10g}", v); }

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    out << text;
    if (!out.flush()) throw std::runtime_error(fmt::format("write failed: {}", path.string()));
}

ordered_json stats_json(const metrics::FieldStats& s) {
    return ordered_json{{"mean", s.mean}, {"sd", s.sd}, {"median", s.median}};
}

std::vector<scenario::Week> weeks_of(const RunConfig& cfg) { return scenario::evaluation_weeks(cfg.base.timeline); }

}  // namespace

std::size_t RunResults::failures() const {
    return static_cast<std::size_t>(
        std::count_if(trials.begin(), trials.end(), [](const TrialResult& t) { return t.failure.has_value(); }));
}

std::vector<TrialResult> RunResults::scenario_trials(ScenarioId id) const {
    std::vector<TrialResult> out;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (jobs[i].scenario == id) out.push_back(trials[i]);
    }
    return out;
}

RunResults run_all(const RunConfig& cfg, int threads) {
    RunResults r;
    r.cohort = sim::generate_cohort(cfg.patients, cfg.cohort_seed, cfg.cohort);
    std::vector<scenario::ScenarioConfig> scenarios;
    for (ScenarioId id : cfg.scenarios) {
        scenarios.push_back(cfg.scenario(id));
        scenarios.back().validate();
        for (std::size_t p = 0; p < r.cohort.size(); ++p) r.jobs.push_back({id, p});
    }
    r.trials.resize(r.jobs.size());
    std::vector<std::vector<std::string>> issues(r.jobs.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next.fetch_add(1); j < r.jobs.size(); j = next.fetch_add(1)) {
            const TrialJob& job = r.jobs[j];
            const auto s = static_cast<std::size_t>(
                std::find(cfg.scenarios.begin(), cfg.scenarios.end(), job.scenario) - cfg.scenarios.begin());
            r.trials[j] = scenario::run_trial(r.cohort[job.patient_index], job.patient_index, scenarios[s]);
            for (auto& issue : scenario::check_trial_invariants(r.trials[j], scenarios[s])) {
                issues[j].push_back(
                    fmt::format("{} {}: {}", scenario::to_string(job.scenario), r.trials[j].patient, issue));
            }
        }
    };
    const int n = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(r.jobs.size(), 1)));
    std::vector<std::jthread> pool;
    for (int i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    pool.clear();

    for (auto& list : issues) {
        r.invariant_issues.insert(r.invariant_issues.end(), list.begin(), list.end());
    }
    return r;
}

std::string config_hash(const RunConfig& cfg) {
    return fmt::format("{:016x}", fnv1a(scenario::dump_run_config(cfg)));
}

std::string patient_week_csv(const RunConfig&, const RunResults& results) {
    std::string out = std::string(kPatientWeekHeader) + "\n";
    for (std::size_t j = 0; j < results.jobs.size(); ++j) {
        const TrialResult& t = results.trials[j];
        if (t.failure) continue;
        for (std::size_t w = 0; w < t.week_defs.size(); ++w) {
            const auto& def = t.week_defs[w];
            const auto& m = t.weeks[w];
            out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", scenario::to_string(t.scenario),
                               t.patient, def.label, def.first_day, def.last_day, num(m.bands.target),
                               num(m.bands.hypo), num(m.bands.severe_hypo), num(m.bands.hyper),
                               num(m.bands.severe_hyper), num(m.risk.lbgi), num(m.risk.hbgi), num(m.mage.value),
                               m.mage.excursions, num(m.tdi));
        }
    }
    return out;
}

std::string plot_weekly_csv(const RunConfig& cfg, const RunResults& results) {
    std::string out = std::string(kPlotWeeklyHeader) + "\n";
    for (ScenarioId id : cfg.scenarios) {
        const auto trials = results.scenario_trials(id);
        for (const auto& week : weeks_of(cfg)) {
            const auto s = scenario::weekly_summary(trials, week);
            if (s.patients.empty()) continue;
            out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", scenario::to_string(id),
                               week.label, week.first_day, week.last_day, s.patients.size(), num(s.lbgi.mean),
                               num(s.lbgi.sd), num(s.lbgi.median), num(s.hbgi.mean), num(s.hbgi.sd),
                               num(s.hbgi.median), num(s.mage.mean), num(s.mage.sd), num(s.mage.median),
                               num(s.tdi.mean), num(s.tdi.sd), num(s.tdi.median));
        }
    }
    return out;
}

std::string glucose_csv(const TrialResult& trial) {
    std::string out = std::string(kGlucoseHeader) + "\n";
    for (const auto& day : trial.days) {
        for (std::size_t i = 0; i < day.truth.size(); ++i) {
            const int minute = static_cast<int>(i) * 5;
            out += fmt::format("{},{},{},{}\n", (day.day - 1) * 1440 + minute, day.day, minute, num(day.truth[i]));
        }
    }
    return out;
}

std::string daily_csv(const TrialResult& trial) {
    std::string out = std::string(kDailyHeader) + "\n";
    for (const auto& day : trial.days) {
        const auto& p = day.profile_end;
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", day.day, day.active ? "control" : "init",
                           day.si_enabled ? 1 : 0, num(day.si_multiplier), num(p.br), num(p.cir[0]), num(p.cir[1]),
                           num(p.cir[2]), num(day.deliveries.basal_units()), num(day.deliveries.bolus_units()),
                           num(metrics::tdi(day.deliveries)), day.plan.skipped_main_meals(), day.smbg.size());
    }
    return out;
}

std::string summary_json(const RunConfig& cfg, const RunResults& results) {
    ordered_json doc;
    doc["format"] = "abba-run-summary";
    doc["version"] = 1;
    doc["patients"] = cfg.patients;
    ordered_json scenarios = ordered_json::object();
    for (ScenarioId id : cfg.scenarios) {
        const auto trials = results.scenario_trials(id);
        ordered_json weeks = ordered_json::array();
        for (const auto& week : weeks_of(cfg)) {
            const auto s = scenario::weekly_summary(trials, week);
            if (s.patients.empty()) continue;
            ordered_json w;
            w["week"] = week.label;
            w["first_day"] = week.first_day;
            w["last_day"] = week.last_day;
            w["patients"] = s.patients.size();
            w["pct_target"] = stats_json(s.target);
            w["pct_hypo"] = stats_json(s.hypo);
            w["pct_severe_hypo"] = stats_json(s.severe_hypo);
            w["pct_hyper"] = stats_json(s.hyper);
            w["pct_severe_hyper"] = stats_json(s.severe_hyper);
            w["lbgi"] = stats_json(s.lbgi);
            w["hbgi"] = stats_json(s.hbgi);
            w["mage"] = stats_json(s.mage);
            w["tdi"] = stats_json(s.tdi);
            weeks.push_back(std::move(w));
        }
        ordered_json failures = ordered_json::array();
        for (const auto& t : trials) {
            if (t.failure) failures.push_back(*t.failure);
        }
        scenarios[std::string(scenario::to_string(id))] = {{"weeks", weeks}, {"failures", failures}};
    }
    doc["scenarios"] = scenarios;
    doc["invariant_issues"] = results.invariant_issues;
    return doc.dump(2) + "\n";
}

void write_outputs(const std::filesystem::path& out, const RunConfig& cfg, const RunResults& results) {
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw std::runtime_error(fmt::format("cannot create {}: {}", out.string(), ec.message()));

    std::map<std::string, std::string> files;
    files["config.yaml"] = scenario::dump_run_config(cfg);
    files["cohort.json"] = sim::cohort_to_json(results.cohort, cfg.cohort_seed);
    files["summary.json"] = summary_json(cfg, results);
    files["metrics_patient_week.csv"] = patient_week_csv(cfg, results);
    files["plot_weekly.csv"] = plot_weekly_csv(cfg, results);
    for (const auto& t : results.trials) {
        const std::string dir = fmt::format("trials/{}/{}/", scenario::to_string(t.scenario), t.patient);
        files[dir + "glucose.csv"] = glucose_csv(t);
        files[dir + "daily.csv"] = daily_csv(t);
    }

    ordered_json manifest;
    manifest["format"] = "abba-run-manifest";
    manifest["version"] = 1;
    manifest["tool_version"] = kVersion;
    manifest["config_hash"] = config_hash(cfg);
    manifest["seeds"] = {{"cohort", cfg.cohort_seed}, {"scenario", cfg.base.scenario_seed}};
    manifest["patients"] = cfg.patients;
    ordered_json ids = ordered_json::array();
    for (ScenarioId id : cfg.scenarios) ids.push_back(std::string(scenario::to_string(id)));
    manifest["scenarios"] = ids;
    manifest["last_day"] = cfg.base.timeline.last_day;
    manifest["failed_trials"] = results.failures();
    ordered_json listing = ordered_json::object();
    for (const auto& [name, text] : files) {
        listing[name] = {{"bytes", text.size()}, {"fnv1a", fmt::format("{:016x}", fnv1a(text))}};
    }
    manifest["files"] = listing;
    files["manifest.json"] = manifest.dump(2) + "\n";

    for (const auto& [name, text] : files) {
        const auto path = out / name;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw std::runtime_error(fmt::format("cannot create {}: {}", path.parent_path().string(), ec.message()));
        write_file(path, text);
    }
}

}  // namespace abba::report
