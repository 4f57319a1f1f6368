#pragma once

#include <cstdint>
#include <cstring>
#include <string>

namespace mstatic {

/// FNV-1a 64-bit running hash, used for scenario and channel digests.
class Fnv1a64 {
public:
    void update(const void* data, std::size_t bytes) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < bytes; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001B3ULL;
        }
    }

    void update(double v) { update(&v, sizeof(v)); }

    void update(const std::string& s) { update(s.data(), s.size()); }

    std::uint64_t value() const { return state_; }

    std::string hex() const {
        static const char* digits = "0123456789abcdef";
        std::string out(16, '0');
        std::uint64_t v = state_;
        for (int i = 15; i >= 0; --i) {
            out[static_cast<std::size_t>(i)] = digits[v & 0xF];
            v >>= 4;
        }
        return out;
    }

private:
    std::uint64_t state_ = 0xCBF29CE484222325ULL;
};

inline std::string fnv1a64_hex(const std::string& s) {
    Fnv1a64 h;
    h.update(s);
    return h.hex();
}

}  // namespace mstatic
