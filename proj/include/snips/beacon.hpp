#pragma once

#include <cstdint>

#include "snips/types.hpp"

namespace snips {

/// Blocks between proof rounds: one day of 12-second blocks.
inline constexpr std::uint64_t kDefaultBlockInterval = 7200;

/// Deterministic stand-in for a blockchain randomness source. Round r maps to
/// the first 8 bytes of SHA-256(r as 8-byte big-endian).
Nonce beacon_nonce(std::uint64_t round);

struct Beacon {
    std::uint64_t block_interval = kDefaultBlockInterval;

    [[nodiscard]] Nonce derive(std::uint64_t round) const { return beacon_nonce(round); }
    [[nodiscard]] bool triggers(std::uint64_t block) const noexcept { return block % block_interval == 0; }
    [[nodiscard]] std::uint64_t round_of_block(std::uint64_t block) const noexcept { return block / block_interval; }

    /// Blocks per period, e.g. 86400 s at 12 s blocks gives 7200.
    static constexpr std::uint64_t interval_for(std::uint64_t period_seconds, std::uint64_t block_seconds) noexcept {
        return period_seconds / block_seconds;
    }
};

}  // namespace snips
