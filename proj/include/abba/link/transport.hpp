#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "abba/link/codec.hpp"
#include "abba/link/endpoint.hpp"
#include "abba/rng.hpp"

namespace abba::link {

class LinkError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ReadResult {
    enum class Status { Data, Timeout, Closed };
    Status status = Status::Timeout;
    std::string bytes;
};

/// One end of a bidirectional byte stream.
class Channel {
public:
    virtual ~Channel() = default;
    /// Throws LinkError once the channel is closed.
    virtual void write(std::string_view bytes) = 0;
    /// Whatever bytes are available, waiting at most `timeout`.
    virtual ReadResult read(std::chrono::milliseconds timeout) = 0;
    virtual void close() = 0;
};

using ChannelPair = std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>>;

/// In-process loopback; safe to use from two threads.
ChannelPair memory_pair();

/// Connected AF_UNIX stream sockets.
ChannelPair socket_pair();

/// Listen on a filesystem AF_UNIX address and accept one connection.
std::unique_ptr<Channel> accept_unix(const std::string& path, std::chrono::milliseconds timeout);

/// Connect to a listening AF_UNIX address, retrying until `timeout`.
std::unique_ptr<Channel> connect_unix(const std::string& path, std::chrono::milliseconds timeout);

/// Seeded per-write fault decisions.
class FaultInjector {
public:
    enum class Action { Deliver, Drop, Duplicate };

    FaultInjector(double drop_rate, double duplicate_rate, std::uint64_t seed);
    Action next();

    /// A fixed script; once exhausted every write is delivered.
    static FaultInjector scripted(std::vector<Action> script);

private:
    double drop_ = 0.0;
    double duplicate_ = 0.0;
    Rng rng_;
    std::vector<Action> script_;
    std::size_t cursor_ = 0;
    bool scripted_ = false;
};

/// Applies a FaultInjector to every write of the wrapped channel. Writes are
/// whole records, so faults drop or repeat whole messages.
class FaultyChannel : public Channel {
public:
    FaultyChannel(std::unique_ptr<Channel> inner, FaultInjector faults);
    void write(std::string_view bytes) override;
    ReadResult read(std::chrono::milliseconds timeout) override;
    void close() override;

    std::size_t dropped() const { return dropped_; }
    std::size_t duplicated() const { return duplicated_; }

private:
    std::unique_ptr<Channel> inner_;
    FaultInjector faults_;
    std::size_t dropped_ = 0;
    std::size_t duplicated_ = 0;
};

/// An Endpoint bound to a Channel: encodes outgoing messages, decodes the
/// incoming stream, and answers protocol messages automatically.
class LinkPeer {
public:
    LinkPeer(Endpoint endpoint, Channel& channel);

    Message post(Payload payload);
    void transmit(const Message& msg);
    void request_sync();

    /// Read for at most `timeout` and process every complete record. Returns
    /// the decoded messages in arrival order; an empty result with
    /// `closed()` set means the peer hung up.
    std::vector<Message> poll(std::chrono::milliseconds timeout);

    /// Called for each decoded message after the protocol has handled it and
    /// its replies have been sent.
    std::function<void(LinkPeer&, const Message&, const Receipt&)> on_message;

    Endpoint& endpoint() { return endpoint_; }
    const Endpoint& endpoint() const { return endpoint_; }
    const std::vector<std::string>& diagnostics() const { return diagnostics_; }
    bool closed() const { return closed_; }
    /// SyncResponse messages applied so far, and the latest of them.
    std::size_t syncs_applied() const { return syncs_applied_; }
    const std::optional<SyncResponse>& last_response() const { return last_response_; }

private:
    Endpoint endpoint_;
    Channel& channel_;
    Decoder decoder_;
    std::vector<std::string> diagnostics_;
    bool closed_ = false;
    std::size_t syncs_applied_ = 0;
    std::optional<SyncResponse> last_response_;
};

/// Deliver everything in flight between two peers on non-blocking channels
/// until both directions are quiet.
void settle(LinkPeer& a, LinkPeer& b, std::size_t max_iterations = 10000);

}  // namespace abba::link
