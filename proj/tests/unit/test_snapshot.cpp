#include <doctest.h>

#include <json.hpp>
#include <stdexcept>

#include "abba/advisor/snapshot.hpp"
#include "generators.hpp"

using namespace abba;
using namespace abba::advisor;

namespace {

AdvisorState trained(Mode mode, int days) {
    AdvisorState s;
    s.mode = mode;
    s.profile = {1.1, {9.0, 11.0, 13.0}};
    s.br_old = 1.1;
    s.seed = 17;
    s.te_ratio = 2.5;
    s.transfer_entropy = 0.07;
    s.units[0].actor.theta = s.config.theta_base_br;
    for (std::size_t u = 1; u < kUnits; ++u) s.units[u].actor.theta = s.config.theta_base_cir;
    Rng rng(5);
    for (int d = 0; d < days; ++d) daily_update(s, gen::day_record(rng, mode));
    return s;
}

bool same_state(const AdvisorState& a, const AdvisorState& b) {
    if (a.profile != b.profile || a.br_old != b.br_old || a.day_index != b.day_index || a.seed != b.seed) return false;
    for (std::size_t i = 0; i < kUnits; ++i) {
        const auto& x = a.units[i];
        const auto& y = b.units[i];
        if (x.actor.theta != y.actor.theta || x.critic.w != y.critic.w || x.critic.z != y.critic.z ||
            x.critic.step != y.critic.step || x.critic.last_value != y.critic.last_value || x.updates != y.updates ||
            x.previous.has_value() != y.previous.has_value())
            return false;
        if (x.previous && (x.previous->features != y.previous->features || x.previous->action.p_e != y.previous->action.p_e))
            return false;
    }
    return true;
}

}  // namespace

TEST_SUITE("advisor snapshot") {

TEST_CASE("round trip is exact") {
    for (Mode mode : {Mode::Cgm, Mode::Smbg}) {
        const AdvisorState s = trained(mode, 12);
        const std::string text = save_snapshot(s);
        const AdvisorState back = load_snapshot(text);
        CHECK(same_state(s, back));
        CHECK(save_snapshot(back) == text);
    }
}

TEST_CASE("a resumed advisor continues identically") {
    AdvisorState original = trained(Mode::Cgm, 8);
    AdvisorState resumed = load_snapshot(save_snapshot(original));
    Rng a(9), b(9);
    for (int d = 0; d < 10; ++d) {
        daily_update(original, gen::day_record(a, Mode::Cgm));
        daily_update(resumed, gen::day_record(b, Mode::Cgm));
    }
    CHECK(same_state(original, resumed));
}

TEST_CASE("fresh state has null pending decisions") {
    AdvisorState s;
    const auto doc = nlohmann::json::parse(save_snapshot(s));
    CHECK(doc["format"] == kSnapshotFormat);
    CHECK(doc["version"] == kSnapshotVersion);
    CHECK(doc["units"].size() == kUnits);
    CHECK(doc["units"][0]["previous"].is_null());
}

TEST_CASE("invalid snapshots are rejected") {
    const auto good = nlohmann::json::parse(save_snapshot(trained(Mode::Smbg, 3)));
    auto broken = [&](auto edit) {
        auto doc = good;
        edit(doc);
        return doc.dump();
    };
    CHECK_THROWS_AS(load_snapshot("not json"), std::invalid_argument);
    CHECK_THROWS_AS(load_snapshot(broken([](auto& d) { d["format"] = "other"; })), std::invalid_argument);
    CHECK_THROWS_AS(load_snapshot(broken([](auto& d) { d["version"] = 2; })), std::invalid_argument);
    CHECK_THROWS_AS(load_snapshot(broken([](auto& d) { d.erase("profile"); })), std::invalid_argument);
    CHECK_THROWS_AS(load_snapshot(broken([](auto& d) { d["profile"]["br"] = -1.0; })), std::invalid_argument);
    CHECK_THROWS_AS(load_snapshot(broken([](auto& d) { d["mode"] = "XYZ"; })), std::invalid_argument);
    CHECK_THROWS_AS(load_snapshot(broken([](auto& d) { d["units"].erase(0); })), std::invalid_argument);
    CHECK_THROWS_AS(load_snapshot(broken([](auto& d) { d["units"][1]["critic"]["gamma"] = 1.0; })),
                    std::invalid_argument);
    CHECK_THROWS_AS(load_snapshot(broken([](auto& d) { d["units"][2]["critic"]["w"] = {1.0}; })),
                    std::invalid_argument);
    try {
        load_snapshot(broken([](auto& d) { d["version"] = 7; }));
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("advisor snapshot") == 0);
    }
}

}
