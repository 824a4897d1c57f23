#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace tiltprice {

//! Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//! A pure function of (counter, key): streams need no shared state.
class Philox4x32 {
public:
    using counter_type = std::array<std::uint32_t, 4>;
    using key_type = std::array<std::uint32_t, 2>;

    static constexpr counter_type apply(counter_type ctr, key_type key)
    {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kW0;
                key[1] += kW1;
            }
            ctr = single_round(ctr, key);
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kM0 = 0xD2511F53u;
    static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kW0 = 0x9E3779B9u;
    static constexpr std::uint32_t kW1 = 0xBB67AE85u;

    static constexpr counter_type single_round(counter_type const& c,
                                               key_type const& k)
    {
        std::uint64_t p0 = std::uint64_t{kM0} * c[0];
        std::uint64_t p1 = std::uint64_t{kM1} * c[2];
        auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        auto lo0 = static_cast<std::uint32_t>(p0);
        auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        auto lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

//! Uniform on (0, 1) from 53 bits of two 32-bit words; never 0 or 1.
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo)
{
    std::uint64_t bits = (std::uint64_t{hi} << 21) ^ (std::uint64_t{lo} >> 11);
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

/*!
 * Standard normal stream for one simulation path.
 *
 * Block j of the stream is Philox(counter = {j, path_lo, path_hi, 0},
 * key = {seed_lo, seed_hi}); each block yields two normals by Box-Muller.
 * Draw k of path p therefore depends only on (seed, p, k).
 */
class PathNormalStream {
public:
    PathNormalStream(std::uint64_t seed, std::uint64_t path)
        : key_{static_cast<std::uint32_t>(seed),
               static_cast<std::uint32_t>(seed >> 32)}
        , path_lo_(static_cast<std::uint32_t>(path))
        , path_hi_(static_cast<std::uint32_t>(path >> 32))
    {
    }

    double next()
    {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        auto r = Philox4x32::apply({block_++, path_lo_, path_hi_, 0u}, key_);
        double u1 = to_open_unit(r[0], r[1]);
        double u2 = to_open_unit(r[2], r[3]);
        double radius = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(theta);
        have_spare_ = true;
        return radius * std::cos(theta);
    }

private:
    Philox4x32::key_type key_;
    std::uint32_t path_lo_;
    std::uint32_t path_hi_;
    std::uint32_t block_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace tiltprice
