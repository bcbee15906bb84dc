#pragma once

#include <cstdint>

#include "snips/types.hpp"

namespace snips {

// The project uses SHA-256 for every cryptographic digest: chunk ids,
// chunk proofs, proof checksums, beacon nonces and serialization integrity.

Hash256 sha256(ByteView data);
Hash256 sha256(ByteView a, ByteView b);

/// Incremental SHA-256 for multi-part inputs.
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    Sha256& update(ByteView data);
    Hash256 finish();

private:
    void* ctx_;
};

/// 64-bit finalizer (splitmix64). Non-cryptographic; used for placement
/// hashing inside the MPHF and for deriving per-trial seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Combine a base seed with an index into an independent stream seed.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
    return mix64(base ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

/// Map a 64-bit hash uniformly onto [0, range) without division.
constexpr std::uint64_t fast_range(std::uint64_t hash, std::uint64_t range) noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(hash) * range) >> 64);
}

}  // namespace snips
