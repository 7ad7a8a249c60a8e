#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "abba/link/message.hpp"

namespace abba::link {

/// Durable per-endpoint protocol state.
struct SyncState {
    std::string self;
    std::uint64_t next_seq = 1;
    std::map<std::string, std::uint64_t> last_seen;  // per peer, highest contiguous seq received
    std::vector<Message> outbox;                     // own data messages not yet acknowledged
    std::vector<Message> history;                    // own and received data messages, arrival order

    std::string to_json() const;
    static SyncState from_json(const std::string& text);

    friend bool operator==(const SyncState&, const SyncState&) = default;
};

/// What the endpoint made of one incoming message.
struct Receipt {
    enum class Outcome { Appended, Duplicate, Gap, Acked, SyncAnswered, SyncApplied, SyncRejected, Ignored };
    Outcome outcome = Outcome::Ignored;
    std::vector<Message> replies;  // to transmit to the sender, in order
    std::size_t appended = 0;      // history entries added
};

/// Protocol state machine for one side of a two-party link. Transport-free:
/// callers move the returned messages over whatever channel they use.
class Endpoint {
public:
    using Clock = std::function<std::int64_t()>;

    Endpoint(std::string self, std::string peer, Clock clock = {});
    Endpoint(SyncState restored, std::string peer, Clock clock = {});

    /// New data message from this endpoint; recorded in history and outbox.
    Message emit(Payload payload);

    /// Handle one message from the peer and return the replies it calls for.
    Receipt receive(const Message& msg);

    /// Ask the peer for everything after the last contiguous seq received from it.
    Message sync_request();

    /// Own messages the peer has not acknowledged.
    const std::vector<Message>& unacknowledged() const { return state_.outbox; }

    const SyncState& state() const { return state_; }
    const std::string& peer() const { return peer_; }
    std::uint64_t last_seen() const;

    /// Own history messages with seq above `after`, in seq order.
    std::vector<Message> own_since(std::uint64_t after) const;

private:
    Message control(Payload payload);
    void prune_outbox(std::uint64_t through);

    SyncState state_;
    std::string peer_;
    Clock clock_;
    std::int64_t logical_ = 0;
};

/// Histories compared as multisets of encoded records.
bool same_history(const SyncState& a, const SyncState& b);

/// Per-sender seqs in a history form 1..n without gaps or repeats.
bool gap_free(const SyncState& s);

}  // namespace abba::link
