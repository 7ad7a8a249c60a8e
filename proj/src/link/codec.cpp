#include "abba/link/codec.hpp"

#include <charconv>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>
#include <zlib.h>

namespace abba::link {

namespace {

using nlohmann::json;

constexpr std::size_t kMaxLenDigits = 7;
constexpr std::size_t kCrcDigits = 8;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::uint32_t crc_of(std::string_view body) {
    return static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size())));
}

json to_json(const Message& msg) {
    json body = std::visit(
        overloaded{
            [](const BasalProfileChanged& m) { return json{{"rate_uh", m.rate}}; },
            [](const BolusInfused& m) { return json{{"units", m.units}, {"meal_index", m.meal_index}}; },
            [](const SmbgMeasured& m) { return json{{"mgdl", m.mgdl}}; },
            [](const MealAnnounced& m) { return json{{"cho_g", m.cho}, {"meal_index", m.meal_index}}; },
            [](const TherapyUpdate& m) { return json{{"br_uh", m.br}, {"cir", {m.cir[0], m.cir[1], m.cir[2]}}}; },
            [](const SyncRequest& m) { return json{{"last_seen", m.last_seen}}; },
            [](const SyncResponse& m) {
                json missing = json::array();
                for (const Message& inner : m.missing) missing.push_back(to_json(inner));
                return json{{"last_seen", m.last_seen}, {"missing", missing}};
            },
            [](const Ack& m) { return json{{"seq", m.seq}}; },
        },
        msg.payload);
    return {{"kind", kind_name(msg.payload)},
            {"sender", msg.sender},
            {"seq", msg.seq},
            {"sent_at", msg.sent_at},
            {"body", std::move(body)}};
}

void require_keys(const json& j, std::initializer_list<const char*> keys, const char* what) {
    if (!j.is_object() || j.size() != keys.size()) {
        throw std::invalid_argument(fmt::format("{}: unexpected field set", what));
    }
    for (const char* k : keys) {
        if (!j.contains(k)) throw std::invalid_argument(fmt::format("{}: missing field '{}'", what, k));
    }
}

double number(const json& j, const char* key) {
    const json& v = j.at(key);
    if (!v.is_number()) throw std::invalid_argument(fmt::format("field '{}' must be a number", key));
    return v.get<double>();
}

std::uint64_t unsigned_field(const json& j, const char* key) {
    const json& v = j.at(key);
    if (!v.is_number_unsigned()) throw std::invalid_argument(fmt::format("field '{}' must be a non-negative integer", key));
    return v.get<std::uint64_t>();
}

int int_field(const json& j, const char* key) {
    const json& v = j.at(key);
    if (!v.is_number_integer()) throw std::invalid_argument(fmt::format("field '{}' must be an integer", key));
    return v.get<int>();
}

Message from_json(const json& j) {
    require_keys(j, {"body", "kind", "sender", "sent_at", "seq"}, "envelope");
    if (!j.at("kind").is_string() || !j.at("sender").is_string()) {
        throw std::invalid_argument("kind and sender must be strings");
    }
    Message msg;
    msg.sender = j.at("sender").get<std::string>();
    msg.seq = unsigned_field(j, "seq");
    if (!j.at("sent_at").is_number_integer()) throw std::invalid_argument("field 'sent_at' must be an integer");
    msg.sent_at = j.at("sent_at").get<std::int64_t>();
    const std::string kind = j.at("kind").get<std::string>();
    const json& b = j.at("body");
    if (kind == "BasalProfileChanged") {
        require_keys(b, {"rate_uh"}, "BasalProfileChanged");
        msg.payload = BasalProfileChanged{number(b, "rate_uh")};
    } else if (kind == "BolusInfused") {
        require_keys(b, {"units", "meal_index"}, "BolusInfused");
        msg.payload = BolusInfused{number(b, "units"), int_field(b, "meal_index")};
    } else if (kind == "SmbgMeasured") {
        require_keys(b, {"mgdl"}, "SmbgMeasured");
        msg.payload = SmbgMeasured{number(b, "mgdl")};
    } else if (kind == "MealAnnounced") {
        require_keys(b, {"cho_g", "meal_index"}, "MealAnnounced");
        msg.payload = MealAnnounced{number(b, "cho_g"), int_field(b, "meal_index")};
    } else if (kind == "TherapyUpdate") {
        require_keys(b, {"br_uh", "cir"}, "TherapyUpdate");
        const json& cir = b.at("cir");
        if (!cir.is_array() || cir.size() != 3) throw std::invalid_argument("field 'cir' must hold 3 numbers");
        TherapyUpdate t;
        t.br = number(b, "br_uh");
        for (std::size_t i = 0; i < 3; ++i) {
            if (!cir[i].is_number()) throw std::invalid_argument("field 'cir' must hold 3 numbers");
            t.cir[i] = cir[i].get<double>();
        }
        msg.payload = t;
    } else if (kind == "SyncRequest") {
        require_keys(b, {"last_seen"}, "SyncRequest");
        msg.payload = SyncRequest{unsigned_field(b, "last_seen")};
    } else if (kind == "SyncResponse") {
        require_keys(b, {"last_seen", "missing"}, "SyncResponse");
        SyncResponse r;
        r.last_seen = unsigned_field(b, "last_seen");
        if (!b.at("missing").is_array()) throw std::invalid_argument("field 'missing' must be an array");
        for (const json& inner : b.at("missing")) r.missing.push_back(from_json(inner));
        msg.payload = std::move(r);
    } else if (kind == "Ack") {
        require_keys(b, {"seq"}, "Ack");
        msg.payload = Ack{unsigned_field(b, "seq")};
    } else {
        throw std::invalid_argument(fmt::format("unknown kind '{}'", kind));
    }
    return msg;
}

DecodeResult corrupt(std::size_t consumed, std::string why) {
    DecodeResult r;
    r.status = DecodeStatus::Corrupt;
    r.consumed = consumed;
    r.diagnostic = std::move(why);
    return r;
}

bool is_lower_hex(char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); }

}  // namespace

std::string encode_body(const Message& msg) {
    validate(msg);
    return to_json(msg).dump();
}

Message decode_body(std::string_view body) {
    try {
        Message msg = from_json(json::parse(body));
        validate(msg);
        return msg;
    } catch (const json::exception& e) {
        throw std::invalid_argument(fmt::format("bad body: {}", e.what()));
    }
}

std::string encode(const Message& msg) {
    const std::string body = encode_body(msg);
    if (body.size() > kMaxBodyBytes) {
        throw std::invalid_argument("encode: message body exceeds the record limit");
    }
    return fmt::format("{} {:08x} {}\n", body.size(), crc_of(body), body);
}

DecodeResult decode(std::string_view bytes) {
    const std::size_t nl = bytes.find('\n');
    if (nl == std::string_view::npos) {
        return {};
    }
    const std::size_t consumed = nl + 1;
    const std::string_view line = bytes.substr(0, nl);

    const std::size_t sp1 = line.find(' ');
    if (sp1 == std::string_view::npos || sp1 == 0 || sp1 > kMaxLenDigits) {
        return corrupt(consumed, "malformed length prefix");
    }
    const std::string_view len_text = line.substr(0, sp1);
    if (len_text.size() > 1 && len_text[0] == '0') {
        return corrupt(consumed, "length prefix has leading zeros");
    }
    std::size_t len = 0;
    const auto [end, ec] = std::from_chars(len_text.data(), len_text.data() + len_text.size(), len);
    if (ec != std::errc{} || end != len_text.data() + len_text.size()) {
        return corrupt(consumed, "malformed length prefix");
    }
    if (len > kMaxBodyBytes) {
        return corrupt(consumed, "length prefix exceeds the record limit");
    }
    if (line.size() < sp1 + 1 + kCrcDigits + 1 || line[sp1 + 1 + kCrcDigits] != ' ') {
        return corrupt(consumed, "malformed checksum field");
    }
    const std::string_view crc_text = line.substr(sp1 + 1, kCrcDigits);
    for (char c : crc_text) {
        if (!is_lower_hex(c)) return corrupt(consumed, "malformed checksum field");
    }
    const std::string_view body = line.substr(sp1 + 1 + kCrcDigits + 1);
    if (body.size() != len) {
        return corrupt(consumed, fmt::format("length prefix says {} bytes, record has {}", len, body.size()));
    }
    std::uint32_t crc = 0;
    std::from_chars(crc_text.data(), crc_text.data() + crc_text.size(), crc, 16);
    if (crc != crc_of(body)) {
        return corrupt(consumed, "checksum mismatch");
    }
    try {
        DecodeResult r;
        r.status = DecodeStatus::Ok;
        r.consumed = consumed;
        r.message = decode_body(body);
        return r;
    } catch (const std::invalid_argument& e) {
        return corrupt(consumed, fmt::format("rejected: {}", e.what()));
    }
}

void Decoder::feed(std::string_view bytes) { buffer_.append(bytes); }

DecodeResult Decoder::next() {
    DecodeResult r = decode(buffer_);
    if (r.status == DecodeStatus::NeedMore) {
        constexpr std::size_t kMaxRecord = kMaxLenDigits + 1 + kCrcDigits + 1 + kMaxBodyBytes + 1;
        if (buffer_.size() > kMaxRecord) {
            // no newline within the longest legal record: drop what we have
            r = corrupt(buffer_.size(), "record exceeds the size limit");
        } else {
            return r;
        }
    }
    buffer_.erase(0, r.consumed);
    return r;
}

}  // namespace abba::link
