#pragma once

#include "brc/rng.hpp"
#include "brc/time_series.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <string_view>

namespace brc {

/// FNV-1a 64-bit content digest, rendered as 16 hex digits. Doubles are hashed
/// through their IEEE-754 bit pattern so the digest is platform independent.
class Digest {
public:
    Digest& update(std::string_view bytes) {
        state_ = fnv1a64(bytes, state_);
        return *this;
    }
    Digest& update(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            state_ ^= (v >> (8 * i)) & 0xFFu;
            state_ *= 0x100000001B3ull;
        }
        return *this;
    }
    Digest& update(double v) { return update(std::bit_cast<std::uint64_t>(v)); }

    Digest& update(const TimeSeries& s) {
        update(s.dt()).update(s.t0());
        update(static_cast<std::uint64_t>(s.dimension())).update(static_cast<std::uint64_t>(s.size()));
        const auto& m = s.samples();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            for (Eigen::Index i = 0; i < m.rows(); ++i) update(m(i, j));
        return *this;
    }

    std::uint64_t value() const noexcept { return state_; }

    std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
        return buf;
    }

private:
    std::uint64_t state_ = 0xCBF29CE484222325ull;
};

inline std::string digest_of(std::span<const TimeSeries> series) {
    Digest d;
    d.update(static_cast<std::uint64_t>(series.size()));
    for (const auto& s : series) d.update(s);
    return d.hex();
}

}  // namespace brc
