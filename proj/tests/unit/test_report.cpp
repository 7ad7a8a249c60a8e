#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unistd.h>

#include <json.hpp>

#include "abba/report/report.hpp"

using namespace abba;
using namespace abba::report;
namespace fs = std::filesystem;

namespace {

scenario::RunConfig small_config() {
    auto cfg = scenario::parse_run_config("scenarios: [S1, S2]\npatients: 3\ntimeline: {last_day: 20}\n");
    return cfg;
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

std::map<std::string, std::string> read_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        files[fs::relative(e.path(), root).string()] = ss.str();
    }
    return files;
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("abba-report-" + std::to_string(::getpid()) + "-" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("CSV headers are pinned") {
    CHECK(std::string(kPatientWeekHeader) ==
          "scenario,patient,week,first_day,last_day,pct_target,pct_hypo,pct_severe_hypo,pct_hyper,"
          "pct_severe_hyper,lbgi,hbgi,mage,mage_excursions,tdi");
    CHECK(std::string(kPlotWeeklyHeader) ==
          "scenario,week,first_day,last_day,patients,lbgi_mean,lbgi_sd,lbgi_median,hbgi_mean,hbgi_sd,"
          "hbgi_median,mage_mean,mage_sd,mage_median,tdi_mean,tdi_sd,tdi_median");
    CHECK(std::string(kGlucoseHeader) == "timestamp_min,day,minute,value_mgdl");
    CHECK(std::string(kDailyHeader) ==
          "day,phase,si_enabled,si_multiplier,br_uh,cir_breakfast,cir_lunch,cir_dinner,basal_u,bolus_u,tdi_u,"
          "skipped_meals,smbg_readings");
}

TEST_CASE("tables have the expected shape") {
    const auto cfg = small_config();
    const auto results = run_all(cfg, 1);
    CHECK(results.failures() == 0);
    CHECK(results.invariant_issues.empty());
    REQUIRE(results.jobs.size() == 6);
    CHECK(results.jobs[0].scenario == scenario::ScenarioId::S1);
    CHECK(results.jobs[3].scenario == scenario::ScenarioId::S2);
    CHECK(results.jobs[4].patient_index == 1);

    const auto pw = patient_week_csv(cfg, results);
    CHECK(first_line(pw) == kPatientWeekHeader);
    // 2 scenarios x 3 patients x 2 complete weeks
    CHECK(std::count(pw.begin(), pw.end(), '\n') == 1 + 12);

    const auto plot = plot_weekly_csv(cfg, results);
    CHECK(first_line(plot) == kPlotWeeklyHeader);
    CHECK(std::count(plot.begin(), plot.end(), '\n') == 1 + 4);

    const auto& t = results.trials[0];
    const auto glucose = glucose_csv(t);
    CHECK(first_line(glucose) == kGlucoseHeader);
    CHECK(std::count(glucose.begin(), glucose.end(), '\n') == 1 + 19 * 288);
    CHECK(glucose.find("\n1440,2,0,") != std::string::npos);
    const auto daily = daily_csv(t);
    CHECK(first_line(daily) == kDailyHeader);
    CHECK(std::count(daily.begin(), daily.end(), '\n') == 1 + 19);

    const auto summary = nlohmann::json::parse(summary_json(cfg, results));
    CHECK(summary["format"] == "abba-run-summary");
    CHECK(summary.contains("scenarios"));
}

TEST_CASE("config hash follows the resolved config") {
    const auto a = small_config();
    auto b = a;
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    b.base.advisor.beta = 0.4;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("output tree is identical for one and several threads") {
    const auto cfg = small_config();
    const auto one = scratch("one");
    const auto many = scratch("many");
    write_outputs(one, cfg, run_all(cfg, 1));
    write_outputs(many, cfg, run_all(cfg, 4));
    const auto a = read_tree(one);
    const auto b = read_tree(many);
    CHECK(a.size() == b.size());
    CHECK(a == b);
    for (const char* f : {"config.yaml", "cohort.json", "manifest.json", "summary.json", "metrics_patient_week.csv",
                          "plot_weekly.csv"}) {
        CHECK(a.count(f) == 1);
    }
    CHECK(a.count("trials/S2/" + run_all(cfg, 1).cohort[0].id + "/glucose.csv") == 1);

    // the manifest lists every other file and carries no wall-clock data
    const auto manifest = nlohmann::json::parse(a.at("manifest.json"));
    CHECK(manifest["format"] == "abba-run-manifest");
    CHECK(manifest["tool_version"] == kVersion);
    CHECK(manifest["config_hash"] == config_hash(cfg));
    CHECK(manifest["files"].size() == a.size() - 1);
    for (const auto& [name, entry] : manifest["files"].items()) {
        REQUIRE(a.count(name) == 1);
        CHECK(entry["bytes"] == a.at(name).size());
    }
    const std::string text = a.at("manifest.json");
    for (const char* word : {"time", "date", "host", "duration"}) {
        CHECK(text.find(word) == std::string::npos);
    }
    fs::remove_all(one);
    fs::remove_all(many);
}

TEST_CASE("an unwritable destination is reported") {
    const auto cfg = small_config();
    const auto blocker = scratch("blocker");
    { std::ofstream(blocker) << "not a directory"; }
    CHECK_THROWS(write_outputs(blocker / "out", cfg, run_all(cfg, 1)));
    fs::remove_all(blocker);
}
