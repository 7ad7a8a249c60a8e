#include "abba/link/endpoint.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

#include "abba/link/codec.hpp"

namespace abba::link {

namespace {

using nlohmann::json;

json stored(const Message& m) { return json::parse(encode_body(m)); }

Message restored(const json& j) { return decode_body(j.dump()); }

}  // namespace

std::string SyncState::to_json() const {
    json outbox_json = json::array();
    for (const auto& m : outbox) outbox_json.push_back(stored(m));
    json history_json = json::array();
    for (const auto& m : history) history_json.push_back(stored(m));
    const json doc = {{"format", "abba-link-state"}, {"version", 1},      {"self", self},
                      {"next_seq", next_seq},         {"last_seen", last_seen}, {"outbox", outbox_json},
                      {"history", history_json}};
    return doc.dump(2) + "\n";
}

SyncState SyncState::from_json(const std::string& text) {
    try {
        const json doc = json::parse(text);
        if (doc.at("format") != "abba-link-state" || doc.at("version") != 1) {
            throw std::invalid_argument("unsupported format or version");
        }
        SyncState s;
        s.self = doc.at("self").get<std::string>();
        s.next_seq = doc.at("next_seq").get<std::uint64_t>();
        s.last_seen = doc.at("last_seen").get<std::map<std::string, std::uint64_t>>();
        for (const json& m : doc.at("outbox")) s.outbox.push_back(restored(m));
        for (const json& m : doc.at("history")) s.history.push_back(restored(m));
        if (s.self.empty() || s.next_seq < 1) throw std::invalid_argument("bad identity or seq");
        return s;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("link state: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string("link state: ") + e.what());
    }
}

Endpoint::Endpoint(std::string self, std::string peer, Clock clock) : peer_(std::move(peer)), clock_(std::move(clock)) {
    if (self.empty() || peer_.empty() || self == peer_) {
        throw std::invalid_argument("endpoint: names must be distinct and non-empty");
    }
    state_.self = std::move(self);
    state_.last_seen[peer_] = 0;
}

Endpoint::Endpoint(SyncState restored_state, std::string peer, Clock clock)
    : state_(std::move(restored_state)), peer_(std::move(peer)), clock_(std::move(clock)) {
    if (state_.self.empty() || peer_.empty() || state_.self == peer_) {
        throw std::invalid_argument("endpoint: names must be distinct and non-empty");
    }
    state_.last_seen.try_emplace(peer_, 0);
    logical_ = 0;
    for (const auto& m : state_.history) logical_ = std::max(logical_, m.sent_at);
}

std::uint64_t Endpoint::last_seen() const { return state_.last_seen.at(peer_); }

Message Endpoint::emit(Payload payload) {
    if (!is_data(payload)) {
        throw std::invalid_argument("emit: control messages are produced by the protocol");
    }
    Message m;
    m.sender = state_.self;
    m.seq = state_.next_seq;
    m.sent_at = clock_ ? clock_() : ++logical_;
    m.payload = std::move(payload);
    validate(m);
    ++state_.next_seq;
    state_.history.push_back(m);
    state_.outbox.push_back(m);
    return m;
}

Message Endpoint::control(Payload payload) {
    Message m;
    m.sender = state_.self;
    m.seq = 0;
    m.sent_at = clock_ ? clock_() : ++logical_;
    m.payload = std::move(payload);
    return m;
}

Message Endpoint::sync_request() { return control(SyncRequest{last_seen()}); }

void Endpoint::prune_outbox(std::uint64_t through) {
    std::erase_if(state_.outbox, [through](const Message& m) { return m.seq <= through; });
}

std::vector<Message> Endpoint::own_since(std::uint64_t after) const {
    std::vector<Message> out;
    for (const auto& m : state_.history) {
        if (m.sender == state_.self && m.seq > after) out.push_back(m);
    }
    std::sort(out.begin(), out.end(), [](const Message& a, const Message& b) { return a.seq < b.seq; });
    return out;
}

Receipt Endpoint::receive(const Message& msg) {
    Receipt r;
    if (msg.sender != peer_) {
        return r;  // not our peer
    }
    std::uint64_t& seen = state_.last_seen[peer_];
    if (is_data(msg.payload)) {
        if (msg.seq == seen + 1) {
            state_.history.push_back(msg);
            seen = msg.seq;
            r.outcome = Receipt::Outcome::Appended;
            r.appended = 1;
            r.replies.push_back(control(Ack{msg.seq}));
        } else if (msg.seq <= seen) {
            r.outcome = Receipt::Outcome::Duplicate;
            r.replies.push_back(control(Ack{msg.seq}));
        } else {
            r.outcome = Receipt::Outcome::Gap;  // recovered by the next sync
        }
        return r;
    }
    if (const auto* ack = std::get_if<Ack>(&msg.payload)) {
        prune_outbox(ack->seq);
        r.outcome = Receipt::Outcome::Acked;
        return r;
    }
    if (const auto* req = std::get_if<SyncRequest>(&msg.payload)) {
        prune_outbox(req->last_seen);
        SyncResponse resp;
        resp.last_seen = seen;
        resp.missing = own_since(req->last_seen);
        r.outcome = Receipt::Outcome::SyncAnswered;
        r.replies.push_back(control(std::move(resp)));
        return r;
    }
    const auto& resp = std::get<SyncResponse>(msg.payload);
    // all-or-nothing: the new part must continue our contiguous range
    std::vector<const Message*> fresh;
    std::uint64_t expect = seen + 1;
    for (const Message& m : resp.missing) {
        if (m.seq < expect) continue;
        if (m.seq != expect) {
            r.outcome = Receipt::Outcome::SyncRejected;
            return r;
        }
        fresh.push_back(&m);
        ++expect;
    }
    for (const Message* m : fresh) state_.history.push_back(*m);
    seen = expect - 1;
    r.appended = fresh.size();
    prune_outbox(resp.last_seen);
    r.outcome = Receipt::Outcome::SyncApplied;
    // push what the peer is missing from us
    for (Message& m : own_since(resp.last_seen)) r.replies.push_back(std::move(m));
    return r;
}

bool same_history(const SyncState& a, const SyncState& b) {
    auto records = [](const SyncState& s) {
        std::vector<std::string> out;
        out.reserve(s.history.size());
        for (const auto& m : s.history) out.push_back(encode_body(m));
        std::sort(out.begin(), out.end());
        return out;
    };
    return records(a) == records(b);
}

bool gap_free(const SyncState& s) {
    std::map<std::string, std::vector<std::uint64_t>> seqs;
    for (const auto& m : s.history) seqs[m.sender].push_back(m.seq);
    for (auto& [sender, v] : seqs) {
        std::sort(v.begin(), v.end());
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i] != i + 1) return false;
        }
    }
    return true;
}

}  // namespace abba::link
