#pragma once

#include <memory>
#include <random>
#include <vector>

#include "snips/beacon.hpp"
#include "snips/chunkstore.hpp"
#include "snips/hash.hpp"
#include "snips/peer.hpp"
#include "snips/proof.hpp"
#include "snips/scenario.hpp"
#include "snips/signature.hpp"

namespace testing_support {

using namespace snips;

inline std::shared_ptr<const Signer> signer(std::uint64_t seed) {
    return std::make_shared<Ed25519Signer>(Ed25519Signer::from_u64(seed));
}

inline std::vector<Chunk> chunks(std::size_t n, std::uint64_t seed, std::size_t size = 64) {
    return ChunkFactory(seed, size).make(n);
}

inline ChunkStore store_of(const std::vector<Chunk>& cs) {
    ChunkStore s;
    for (const Chunk& c : cs) s.put(c);
    return s;
}

inline Hash256 random_digest(std::mt19937_64& rng) {
    Hash256 h;
    for (auto& b : h.bytes) b = static_cast<Byte>(rng());
    return h;
}

/// Messages of a given kind among outputs.
template <class T>
std::vector<T> of_kind(const std::vector<Outgoing>& out) {
    std::vector<T> v;
    for (const auto& o : out)
        if (const auto* m = std::get_if<T>(&o.message)) v.push_back(*m);
    return v;
}

}  // namespace testing_support
