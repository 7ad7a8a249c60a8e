#include "abba/link/message.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace abba::link {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

bool in_range(double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; }

}  // namespace

std::string_view kind_name(const Payload& payload) {
    return std::visit(overloaded{
                          [](const BasalProfileChanged&) { return std::string_view("BasalProfileChanged"); },
                          [](const BolusInfused&) { return std::string_view("BolusInfused"); },
                          [](const SmbgMeasured&) { return std::string_view("SmbgMeasured"); },
                          [](const MealAnnounced&) { return std::string_view("MealAnnounced"); },
                          [](const TherapyUpdate&) { return std::string_view("TherapyUpdate"); },
                          [](const SyncRequest&) { return std::string_view("SyncRequest"); },
                          [](const SyncResponse&) { return std::string_view("SyncResponse"); },
                          [](const Ack&) { return std::string_view("Ack"); },
                      },
                      payload);
}

bool is_data(const Payload& payload) {
    return !std::holds_alternative<SyncRequest>(payload) && !std::holds_alternative<SyncResponse>(payload) &&
           !std::holds_alternative<Ack>(payload);
}

void validate(const Message& msg) {
    require(!msg.sender.empty(), "sender must not be empty");
    require(msg.sent_at >= 0, "sent_at must be non-negative");
    if (is_data(msg.payload)) {
        require(msg.seq >= 1, "data messages need seq >= 1");
    } else {
        require(msg.seq == 0, "control messages carry seq 0");
    }
    std::visit(overloaded{
                   [](const BasalProfileChanged& m) { require(in_range(m.rate, 0.0, 50.0), "rate out of range"); },
                   [](const BolusInfused& m) {
                       require(in_range(m.units, 0.0, 100.0) && m.units > 0.0, "units out of range");
                       require(m.meal_index >= 1 && m.meal_index <= 3, "meal_index out of range");
                   },
                   [](const SmbgMeasured& m) { require(in_range(m.mgdl, 20.0, 600.0), "mgdl out of range"); },
                   [](const MealAnnounced& m) {
                       require(in_range(m.cho, 0.0, 500.0), "cho out of range");
                       require(m.meal_index >= 0 && m.meal_index <= 3, "meal_index out of range");
                   },
                   [](const TherapyUpdate& m) {
                       require(in_range(m.br, 0.0, 50.0) && m.br > 0.0, "br out of range");
                       for (double c : m.cir) require(in_range(c, 0.0, 500.0) && c > 0.0, "cir out of range");
                   },
                   [](const SyncRequest&) {},
                   [&msg](const SyncResponse& m) {
                       for (const Message& inner : m.missing) {
                           require(is_data(inner.payload), "sync responses carry data messages only");
                           require(inner.sender == msg.sender, "sync responses carry the responder's messages only");
                           validate(inner);
                       }
                   },
                   [](const Ack& m) { require(m.seq >= 1, "ack of seq 0"); },
               },
               msg.payload);
}

}  // namespace abba::link
