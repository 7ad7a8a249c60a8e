#include "abba/link/demo.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <memory>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "abba/advisor/advisor.hpp"
#include "abba/link/codec.hpp"
#include "abba/link/transport.hpp"
#include "abba/scenario/trial.hpp"
#include "abba/sim/cohort.hpp"

namespace abba::link {

namespace {

using namespace std::chrono_literals;

constexpr std::int64_t kMsPerMinute = 60'000;

struct ScriptItem {
    double minute = 0.0;
    Payload payload;
};

struct DemoDay {
    advisor::AdvisorState advisor;
    std::vector<ScriptItem> script;
};

/// One simulated SMBG patient up to the first control day; that day becomes the pump script.
DemoDay prepare_day() {
    scenario::RunConfig rc;
    const auto patients = sim::generate_cohort(1, rc.cohort_seed, rc.cohort);
    scenario::ScenarioConfig cfg = rc.scenario(scenario::ScenarioId::S2);
    cfg.timeline.last_day = cfg.timeline.first_active_day();
    const scenario::TrialResult trial = scenario::run_trial(patients.front(), 0, cfg);
    if (trial.failure || !trial.advisor) throw std::runtime_error("demo: patient simulation failed");
    const scenario::DayLog& day = trial.days.back();

    DemoDay out{*trial.advisor, {}};
    out.script.push_back({0.0, BasalProfileChanged{day.deliveries.initial_rate}});
    for (const auto& s : day.smbg) out.script.push_back({s.t, SmbgMeasured{s.mgdl}});
    for (const auto& e : day.plan.events) {
        if (!e.main() || e.skipped) continue;
        out.script.push_back({std::round(e.time), MealAnnounced{e.announced_cho, e.meal_index}});
    }
    for (const auto& b : day.boluses) out.script.push_back({b.t, BolusInfused{b.units, b.meal_index}});
    std::stable_sort(out.script.begin(), out.script.end(),
                     [](const ScriptItem& a, const ScriptItem& b) { return a.minute < b.minute; });
    return out;
}

advisor::GlucoseDayRecord record_from(const std::vector<Message>& history) {
    advisor::GlucoseDayRecord rec;
    rec.mode = advisor::Mode::Smbg;
    for (const Message& m : history) {
        const double t = static_cast<double>(m.sent_at) / kMsPerMinute;
        if (const auto* s = std::get_if<SmbgMeasured>(&m.payload)) {
            rec.samples.push_back({t, s->mgdl});
        } else if (const auto* meal = std::get_if<MealAnnounced>(&m.payload)) {
            rec.meals.push_back({t, meal->cho, meal->meal_index});
        }
    }
    auto by_time = [](const auto& a, const auto& b) { return a.t < b.t; };
    std::stable_sort(rec.samples.begin(), rec.samples.end(), by_time);
    std::stable_sort(rec.meals.begin(), rec.meals.end(), by_time);
    return rec;
}

std::vector<Message> sorted_history(const SyncState& s) {
    std::vector<Message> h = s.history;
    std::sort(h.begin(), h.end(),
              [](const Message& a, const Message& b) { return std::tie(a.sender, a.seq) < std::tie(b.sender, b.seq); });
    return h;
}

}  // namespace

std::string describe(const Message& msg) {
    const auto body = nlohmann::json::parse(encode_body(msg)).at("body").dump();
    return fmt::format("{} #{} {} {}", msg.sender, msg.seq, kind_name(msg.payload), body);
}

DemoResult run_pump_link_demo(const DemoOptions& options) {
    if (!(options.drop_rate >= 0.0 && options.drop_rate < 1.0)) {
        throw std::invalid_argument("drop rate must lie in [0, 1)");
    }
    DemoDay day = prepare_day();

    std::unique_ptr<Channel> pump_raw;
    std::unique_ptr<Channel> advisor_raw;
    std::thread acceptor;
    if (options.address.empty()) {
        std::tie(pump_raw, advisor_raw) = memory_pair();
    } else {
        std::exception_ptr accept_error;
        acceptor = std::thread([&] {
            try {
                advisor_raw = accept_unix(options.address, 5000ms);
            } catch (...) {
                accept_error = std::current_exception();
            }
        });
        try {
            pump_raw = connect_unix(options.address, 5000ms);
        } catch (...) {
            acceptor.join();
            throw;
        }
        acceptor.join();
        if (accept_error) std::rethrow_exception(accept_error);
    }
    FaultyChannel pump_channel(std::move(pump_raw),
                               FaultInjector(options.drop_rate, 0.0, derive_seed(options.seed, 0, 0, "link-pump")));
    FaultyChannel advisor_channel(std::move(advisor_raw),
                                  FaultInjector(options.drop_rate, 0.0, derive_seed(options.seed, 1, 0, "link-advisor")));

    std::atomic<std::int64_t> pump_time{0};
    std::atomic<std::int64_t> advisor_time{0};
    LinkPeer pump(Endpoint("pump", "advisor", [&] { return pump_time.load(); }), pump_channel);
    LinkPeer adv(Endpoint("advisor", "pump", [&] { return advisor_time.load(); }), advisor_channel);

    std::atomic<bool> therapy_sent{false};
    adv.on_message = [&](LinkPeer& self, const Message& m, const Receipt& receipt) {
        advisor_time = std::max(advisor_time.load(), m.sent_at);
        if (therapy_sent) return;
        if (std::holds_alternative<SyncRequest>(m.payload)) {
            // pull the whole day before advising
            self.request_sync();
        } else if (receipt.outcome == Receipt::Outcome::SyncApplied) {
            advisor::AdvisorState state = day.advisor;
            advisor::daily_update(state, record_from(self.endpoint().state().history));
            self.post(TherapyUpdate{state.profile.br, state.profile.cir});
            therapy_sent = true;
        }
    };

    std::exception_ptr advisor_error;
    std::thread advisor_thread([&] {
        try {
            while (!adv.closed()) adv.poll(20ms);
        } catch (const LinkError&) {
            // the pump hung up while we were replying
        } catch (...) {
            advisor_error = std::current_exception();
        }
    });

    DemoResult result;
    try {
        for (const ScriptItem& item : day.script) {
            pump_time = static_cast<std::int64_t>(item.minute * kMsPerMinute);
            pump.post(item.payload);
            pump.poll(0ms);
        }
        pump_time = 1439 * kMsPerMinute;
        while (result.rounds < options.max_rounds) {
            ++result.rounds;
            const std::size_t before = pump.syncs_applied();
            pump.request_sync();
            const auto deadline = std::chrono::steady_clock::now() + 500ms;
            while (pump.syncs_applied() == before && std::chrono::steady_clock::now() < deadline) {
                pump.poll(20ms);
            }
            if (pump.syncs_applied() == before) continue;  // request or response lost
            // let pushed messages land and their acks come back
            for (int i = 0; i < 5; ++i) pump.poll(10ms);
            const auto& last = pump.last_response();
            const auto& history = pump.endpoint().state().history;
            const bool advised = std::any_of(history.begin(), history.end(), [](const Message& m) {
                return std::holds_alternative<TherapyUpdate>(m.payload);
            });
            if (advised && last && last->missing.empty() &&
                last->last_seen + 1 == pump.endpoint().state().next_seq) {
                result.converged = true;
                break;
            }
        }
    } catch (...) {
        pump_channel.close();
        advisor_thread.join();
        throw;
    }
    pump_channel.close();
    advisor_thread.join();
    if (advisor_error) std::rethrow_exception(advisor_error);

    result.pump_history = sorted_history(pump.endpoint().state());
    result.advisor_history = sorted_history(adv.endpoint().state());
    result.converged = result.converged && same_history(pump.endpoint().state(), adv.endpoint().state());
    result.dropped = pump_channel.dropped() + advisor_channel.dropped();
    result.corrupt = pump.diagnostics().size() + adv.diagnostics().size();
    return result;
}

}  // namespace abba::link
