#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <string_view>

#include "poqm/util.hpp"

namespace poqm::wire {

using json = nlohmann::ordered_json;

// Frame layout: 4-byte big-endian payload length, 1 type byte, UTF-8 JSON
// object payload.
enum FrameType : std::uint8_t {
    kHello = 0x01,
    kInitMsg = 0x02,
    kPhaseDone = 0x03,
    kChallenge = 0x04,  // theta or ch
    kAnswer = 0x05,     // x' or ans
    kVerdict = 0x06,
    kQStateEnvelope = 0x10,  // simulation-only quantum handoff
    kError = 0x7F,
};

inline constexpr std::size_t kHeaderSize = 5;
inline constexpr std::size_t kMaxPayload = 1 << 20;  // 1 MiB

inline bool known_type(std::uint8_t t) {
    switch (t) {
        case kHello:
        case kInitMsg:
        case kPhaseDone:
        case kChallenge:
        case kAnswer:
        case kVerdict:
        case kQStateEnvelope:
        case kError:
            return true;
        default:
            return false;
    }
}

inline const char* type_name(std::uint8_t t) {
    switch (t) {
        case kHello: return "HELLO";
        case kInitMsg: return "INIT_MSG";
        case kPhaseDone: return "PHASE_DONE";
        case kChallenge: return "CHALLENGE";
        case kAnswer: return "ANSWER";
        case kVerdict: return "VERDICT";
        case kQStateEnvelope: return "QSTATE_ENVELOPE";
        case kError: return "ERROR";
        default: return "UNKNOWN";
    }
}

struct Frame {
    std::uint8_t type = 0;
    json payload;
};

inline std::string encode_frame(std::uint8_t type, const json& payload) {
    if (!payload.is_object())
        throw std::invalid_argument("frame payload must be a JSON object");
    std::string body = payload.dump();
    if (body.size() > kMaxPayload) throw DecodeError("payload exceeds 1 MiB");
    std::string out;
    out.reserve(kHeaderSize + body.size());
    std::uint32_t len = static_cast<std::uint32_t>(body.size());
    for (int s = 24; s >= 0; s -= 8)
        out.push_back(static_cast<char>((len >> s) & 0xff));
    out.push_back(static_cast<char>(type));
    out += body;
    return out;
}

/// Parses exactly one frame occupying the whole buffer. Truncation, length
/// mismatch, oversize, unknown type, or a payload that is not a UTF-8 JSON
/// object all raise DecodeError.
inline Frame decode_frame(std::string_view bytes) {
    if (bytes.size() < kHeaderSize) throw DecodeError("truncated frame header");
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i)
        len = len << 8 | static_cast<unsigned char>(bytes[static_cast<std::size_t>(i)]);
    if (len > kMaxPayload) throw DecodeError("payload exceeds 1 MiB");
    if (bytes.size() != kHeaderSize + len)
        throw DecodeError("length field does not match frame size");
    std::uint8_t type = static_cast<std::uint8_t>(bytes[4]);
    if (!known_type(type))
        throw DecodeError("unknown frame type 0x" + to_hex({bytes.data() + 4, 1}));
    Frame f;
    f.type = type;
    try {
        f.payload = json::parse(bytes.substr(kHeaderSize));
    } catch (const json::parse_error& e) {
        throw DecodeError(std::string("payload is not valid JSON: ") + e.what());
    }
    if (!f.payload.is_object())
        throw DecodeError("payload is not a JSON object");
    return f;
}

}  // namespace poqm::wire
