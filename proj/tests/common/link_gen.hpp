#pragma once

#include <string>

#include "abba/link/message.hpp"
#include "abba/rng.hpp"

namespace gen {

// A valid data payload of a random kind.
inline abba::link::Payload data_payload(abba::Rng& rng) {
    using namespace abba::link;
    switch (rng.below(5)) {
        case 0: return BasalProfileChanged{rng.uniform(0.0, 5.0)};
        case 1: return BolusInfused{rng.uniform(0.1, 20.0), static_cast<int>(1 + rng.below(3))};
        case 2: return SmbgMeasured{rng.uniform(20.0, 600.0)};
        case 3: return MealAnnounced{rng.uniform(0.0, 150.0), static_cast<int>(rng.below(4))};
        default: return TherapyUpdate{rng.uniform(0.1, 5.0), {rng.uniform(1, 40), rng.uniform(1, 40), rng.uniform(1, 40)}};
    }
}

// A valid message of any kind.
inline abba::link::Message message(abba::Rng& rng) {
    using namespace abba::link;
    Message m;
    m.sender = rng.below(2) == 0 ? "pump" : "advisor";
    m.sent_at = static_cast<std::int64_t>(rng.below(1'000'000'000));
    switch (rng.below(4)) {
        case 0: m.payload = SyncRequest{rng.below(1000)}; break;
        case 1: m.payload = Ack{1 + rng.below(1000)}; break;
        case 2: {
            SyncResponse r;
            r.last_seen = rng.below(100);
            for (std::uint64_t i = 0, n = rng.below(4); i < n; ++i) {
                r.missing.push_back(Message{m.sender, 1 + i, static_cast<std::int64_t>(i), data_payload(rng)});
            }
            m.payload = std::move(r);
            break;
        }
        default:
            m.payload = data_payload(rng);
            m.seq = 1 + rng.below(100000);
            return m;
    }
    m.seq = 0;
    return m;
}

}  // namespace gen
