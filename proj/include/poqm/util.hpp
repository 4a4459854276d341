#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace poqm {

// Register or matrix size outside what the simulator supports.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed interaction (wrong message count/order, timeout, closed channel).
// Folded into a rejecting verdict by the protocol runner.
struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A bug in the experiment setup itself (budget violation, game-shape
// violation). Never converted into a prover loss.
struct HarnessError : std::logic_error {
    using std::logic_error::logic_error;
};

// Wire-format decode failure.
struct DecodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string to_hex(std::string_view bytes) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (unsigned char c : bytes) {
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 0xf]);
    }
    return out;
}

inline std::string from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) throw DecodeError("odd-length hex string");
    auto nib = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw DecodeError("bad hex digit");
    };
    std::string out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2)
        out.push_back(static_cast<char>(nib(hex[i]) << 4 | nib(hex[i + 1])));
    return out;
}

inline bool is_bitstring(std::string_view s) {
    for (char c : s)
        if (c != '0' && c != '1') return false;
    return true;
}

inline void require_bitstring(std::string_view s, std::string_view what) {
    if (!is_bitstring(s))
        throw std::invalid_argument(std::string(what) + ": not a 0/1 string");
}

}  // namespace poqm
