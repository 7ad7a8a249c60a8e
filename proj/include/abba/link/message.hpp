#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace abba::link {

struct Message;

struct BasalProfileChanged {
    double rate = 0.0;  // U/h
    friend bool operator==(const BasalProfileChanged&, const BasalProfileChanged&) = default;
};

struct BolusInfused {
    double units = 0.0;
    int meal_index = 1;
    friend bool operator==(const BolusInfused&, const BolusInfused&) = default;
};

struct SmbgMeasured {
    double mgdl = 0.0;
    friend bool operator==(const SmbgMeasured&, const SmbgMeasured&) = default;
};

struct MealAnnounced {
    double cho = 0.0;  // g
    int meal_index = 1;  // 0 = bedtime snack
    friend bool operator==(const MealAnnounced&, const MealAnnounced&) = default;
};

struct TherapyUpdate {
    double br = 0.0;
    std::array<double, 3> cir{};
    friend bool operator==(const TherapyUpdate&, const TherapyUpdate&) = default;
};

struct SyncRequest {
    std::uint64_t last_seen = 0;  // highest contiguous seq received from the peer
    friend bool operator==(const SyncRequest&, const SyncRequest&) = default;
};

/// Reply to a SyncRequest: the responder's own messages after the requested
/// seq, and the responder's view of the requester's stream.
struct SyncResponse {
    std::uint64_t last_seen = 0;
    std::vector<Message> missing;
    friend bool operator==(const SyncResponse&, const SyncResponse&);
};

struct Ack {
    std::uint64_t seq = 0;
    friend bool operator==(const Ack&, const Ack&) = default;
};

using Payload = std::variant<BasalProfileChanged, BolusInfused, SmbgMeasured, MealAnnounced, TherapyUpdate,
                             SyncRequest, SyncResponse, Ack>;

/// Data messages carry a per-sender seq starting at 1 and go into the history;
/// control messages (SyncRequest, SyncResponse, Ack) carry seq 0 and do not.
struct Message {
    std::string sender;
    std::uint64_t seq = 0;
    std::int64_t sent_at = 0;  // ms on the sender's clock
    Payload payload;

    friend bool operator==(const Message&, const Message&) = default;
};

inline bool operator==(const SyncResponse& a, const SyncResponse& b) {
    return a.last_seen == b.last_seen && a.missing == b.missing;
}

std::string_view kind_name(const Payload& payload);
bool is_data(const Payload& payload);

/// Throws std::invalid_argument naming the offending field when a value is out
/// of range or the seq does not match the kind.
void validate(const Message& msg);

}  // namespace abba::link
