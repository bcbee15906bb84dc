#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "snips/chunkstore.hpp"
#include "snips/mphf.hpp"
#include "snips/signature.hpp"
#include "snips/types.hpp"

namespace snips {

/// H(nonce || chunk data).
Hash256 chunk_proof(const Nonce& nonce, const Chunk& chunk);

/// Batch chunk-proof kernel, OpenMP parallel over chunks. `threads` = 0 uses
/// the OpenMP default.
void chunk_proofs_parallel(const Nonce& nonce, std::span<const Chunk* const> chunks, std::span<Hash256> out,
                           int threads = 0);
/// Serial reference for chunk_proofs_parallel.
void chunk_proofs_serial(const Nonce& nonce, std::span<const Chunk* const> chunks, std::span<Hash256> out);

/// H(cp_1 || cp_2 || ...), chunk proofs in ascending MPHF index order.
Hash256 proof_checksum(std::span<const Hash256> ordered_chunk_proofs);

/// Chance that a random candidate chunk both lands in a neighborhood of
/// `prefix_bits` and collides with a given index of an n-chunk proof.
double trojan_probability(int prefix_bits, std::uint64_t n);

/// Per-nonce cache of chunk proofs (chunk id -> proof digest). Keeps the most
/// recent `retained_nonces` nonces.
class ChunkProofCache {
public:
    explicit ChunkProofCache(std::size_t retained_nonces = 2, int threads = 0)
        : retained_(retained_nonces == 0 ? 1 : retained_nonces), threads_(threads) {}

    /// Proofs for `chunks` in input order; misses are computed in parallel.
    std::vector<Hash256> proofs(const Nonce& nonce, std::span<const Chunk* const> chunks);
    Hash256 proof(const Nonce& nonce, const Chunk& chunk);
    [[nodiscard]] std::optional<Hash256> lookup(const Nonce& nonce, const ChunkId& id) const;

    /// Number of chunk-proof hashes computed so far (cache misses).
    [[nodiscard]] std::uint64_t computed() const noexcept { return computed_; }
    [[nodiscard]] std::size_t nonce_count() const noexcept { return per_nonce_.size(); }
    [[nodiscard]] bool holds(const Nonce& nonce) const { return per_nonce_.contains(nonce); }

private:
    using Table = std::unordered_map<ChunkId, Hash256>;
    Table& table_for(const Nonce& nonce);

    std::size_t retained_;
    int threads_;
    std::deque<Nonce> order_;
    std::unordered_map<Nonce, Table> per_nonce_;
    std::uint64_t computed_ = 0;
};

/// Signed storage proof: MPHF over the chunk proofs of every chunk in
/// [start, end], bound to a nonce.
struct StorageProof {
    Mphf mphf;
    /// Serialized mphf; this exact byte string is signed and sent on the wire.
    Bytes mphf_bytes;
    Nonce nonce;
    Address start;
    Address end;
    std::optional<Hash256> checksum;
    SignatureField signature{};
    Address signer;

    [[nodiscard]] std::uint64_t size() const noexcept { return mphf.size(); }
    /// mphf bytes || nonce || start || end || checksum (if present).
    [[nodiscard]] Bytes signing_payload() const;
    /// Signature valid, signer matches the key in the signature field, range ordered.
    [[nodiscard]] bool verify() const;
};

/// Prover-side map from MPHF index (1-based) to chunk id.
struct ReverseMap {
    Nonce nonce;
    std::vector<ChunkId> ids;

    [[nodiscard]] std::uint64_t size() const noexcept { return ids.size(); }
    [[nodiscard]] const ChunkId* at(std::uint64_t index) const noexcept {
        return index >= 1 && index <= ids.size() ? &ids[index - 1] : nullptr;
    }
};

struct ProofBundle {
    StorageProof proof;
    ReverseMap reverse;
};

struct ProofOptions {
    double gamma = 2.0;
    int threads = 0;
};

/// Build, sign and reverse-map a storage proof for the chunks in [start, end].
/// An empty range yields a valid proof with n = 0.
ProofBundle create_proof(const ChunkStore& store, const Nonce& nonce, const Address& start, const Address& end,
                         ChunkProofCache& cache, const Signer& signer, const ProofOptions& options = {});

struct MissingReport {
    /// Indices in [1, n], ascending.
    std::vector<std::uint64_t> missing;
    bool collision = false;

    friend bool operator==(const MissingReport&, const MissingReport&) = default;
};

/// Verifier view of a proof: the counter array plus, for every index hit by
/// exactly one local chunk, that chunk's proof digest.
struct ProofAssessment {
    MissingReport report;
    /// counters[i-1] starts at 1 and drops by one per local hit on index i.
    std::vector<std::int32_t> counters;
    std::vector<Hash256> matched;
    /// Local in-range chunks whose query returned a nonzero index.
    std::uint64_t hits = 0;
    std::uint64_t queried = 0;

    [[nodiscard]] bool exactly_matched(std::uint64_t index) const { return counters[index - 1] == 0; }
};

ProofAssessment assess_proof(const ChunkStore& store, const StorageProof& proof, ChunkProofCache& cache);

/// Missing indices and collision flag for a verified proof.
MissingReport find_missing(const ChunkStore& store, const StorageProof& proof, ChunkProofCache& cache);

/// Accept an uploaded chunk only if it belongs to the neighborhood and its
/// chunk proof maps to the index that was requested.
bool verify_upload(const StorageProof& proof, std::uint64_t expected_index, const Chunk& chunk, const Address& peer,
                   int prefix_bits);

}  // namespace snips
