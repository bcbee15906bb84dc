#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "snips/types.hpp"

namespace snips {

class MphfError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The input contained the same digest more than once.
class DuplicateKeyError : public MphfError {
public:
    using MphfError::MphfError;
};

/// The level cascade left more keys unplaced than the fallback table accepts.
class ConstructionError : public MphfError {
public:
    using MphfError::MphfError;
};

struct MphfBuildOptions {
    double gamma = 2.0;
    /// Worker threads for the parallel build; 0 uses the OpenMP default.
    int threads = 0;
};

/// Minimal perfect hash function over a static set of 32-byte digests.
///
/// Keys are placed by a cascade of bit arrays. At level i every unplaced key
/// hashes (seeded with level_seed(i)) into an array of ceil(gamma * remaining)
/// bits; a key that lands alone claims its bit, keys that share a bit move on
/// to level i+1. After kMaxLevels levels the stragglers go into an explicit
/// sorted fallback table. A key's index is 1 + the rank of its claimed bit
/// over the concatenated levels (fallback entries follow all level bits).
///
/// find() returns the build-time index in [1, n] for members. Non-members
/// return 0 ("definitely not in the set") or an arbitrary index in [1, n].
///
/// Instances are immutable after construction and safe for concurrent reads.
class Mphf {
public:
    static constexpr std::size_t kMaxLevels = 64;
    static constexpr std::size_t kMaxFallbackEntries = 4096;
    static constexpr std::uint8_t kFormatVersion = 2;
    /// Build seed for the level seed schedule. Fixed so that every peer derives
    /// the same placement hashes.
    static constexpr std::uint64_t kBuildSeed = 0x534E4950534D5048ULL;  // "SNIPSMPH"
    static constexpr std::size_t kRankBlockBits = 512;

    Mphf() = default;

    static Mphf build(std::span<const Hash256> keys, const MphfBuildOptions& options = {});
    /// Single-threaded reference construction. Produces output bit-identical
    /// to build() for every thread count.
    static Mphf build_serial(std::span<const Hash256> keys, double gamma = 2.0);

    [[nodiscard]] std::uint64_t find(const Hash256& key) const noexcept;

    [[nodiscard]] std::uint64_t size() const noexcept { return n_; }
    [[nodiscard]] bool empty() const noexcept { return n_ == 0; }
    [[nodiscard]] double gamma() const noexcept { return gamma_; }
    [[nodiscard]] std::size_t level_count() const noexcept { return levels_.size(); }
    [[nodiscard]] std::size_t fallback_count() const noexcept { return fallback_.size(); }

    /// Bits in the serialized form plus the in-memory rank index.
    [[nodiscard]] std::uint64_t size_bits() const;

    [[nodiscard]] Bytes serialize() const;
    static Mphf deserialize(ByteView bytes);

    static std::uint64_t level_seed(std::size_t level) noexcept;

private:
    struct Level {
        std::uint64_t bits = 0;
        std::uint64_t word_offset = 0;
    };

    template <bool Parallel>
    static Mphf build_impl(std::span<const Hash256> keys, double gamma, int threads);

    void append_level(std::span<const std::uint64_t> words, std::uint64_t bits);
    void finalize_rank_index();
    [[nodiscard]] std::uint64_t rank(std::uint64_t bit_pos) const noexcept;
    [[nodiscard]] bool test_bit(std::uint64_t bit_pos) const noexcept {
        return (words_[bit_pos >> 6] >> (bit_pos & 63)) & 1U;
    }

    std::uint64_t n_ = 0;
    double gamma_ = 2.0;
    std::vector<Level> levels_;
    std::vector<std::uint64_t> words_;
    std::vector<std::uint32_t> rank_blocks_;
    std::uint64_t level_set_bits_ = 0;
    std::vector<std::pair<Hash256, std::uint64_t>> fallback_;
};

}  // namespace snips
