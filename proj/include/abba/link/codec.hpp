#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "abba/link/message.hpp"

namespace abba::link {

/// Largest JSON body accepted in one record.
inline constexpr std::size_t kMaxBodyBytes = 1'000'000;

/// One record: "<len> <crc32> <json>\n". See docs/pump-link-wire-format.md.
std::string encode(const Message& msg);

/// The canonical JSON body alone, and its validating inverse (throws
/// std::invalid_argument on anything decode() would call corrupt).
std::string encode_body(const Message& msg);
Message decode_body(std::string_view body);

enum class DecodeStatus { Ok, NeedMore, Corrupt };

struct DecodeResult {
    DecodeStatus status = DecodeStatus::NeedMore;
    std::optional<Message> message;
    std::string diagnostic;     // set when Corrupt
    std::size_t consumed = 0;   // bytes of input used, including the newline
};

/// Decode the first record of `bytes`. NeedMore when no newline has arrived
/// yet; Corrupt (with the record consumed) when the record is malformed.
DecodeResult decode(std::string_view bytes);

/// Incremental decoder for a byte stream. Corrupt records are skipped and the
/// stream resynchronizes at the next newline.
class Decoder {
public:
    void feed(std::string_view bytes);
    DecodeResult next();
    std::size_t buffered() const { return buffer_.size(); }

private:
    std::string buffer_;
};

}  // namespace abba::link
