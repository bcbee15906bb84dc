#include "snips/proof.hpp"

#include <omp.h>

#include <cmath>

#include "snips/hash.hpp"

namespace snips {

Hash256 chunk_proof(const Nonce& nonce, const Chunk& chunk) { return sha256(nonce.view(), chunk.data()); }

void chunk_proofs_parallel(const Nonce& nonce, std::span<const Chunk* const> chunks, std::span<Hash256> out,
                           int threads) {
    const int nthreads = threads > 0 ? threads : omp_get_max_threads();
    const auto count = static_cast<std::int64_t>(chunks.size());
#pragma omp parallel for num_threads(nthreads) schedule(static)
    for (std::int64_t i = 0; i < count; ++i) out[i] = chunk_proof(nonce, *chunks[i]);
}

void chunk_proofs_serial(const Nonce& nonce, std::span<const Chunk* const> chunks, std::span<Hash256> out) {
    for (std::size_t i = 0; i < chunks.size(); ++i) out[i] = chunk_proof(nonce, *chunks[i]);
}

Hash256 proof_checksum(std::span<const Hash256> ordered_chunk_proofs) {
    Sha256 h;
    for (const Hash256& cp : ordered_chunk_proofs) h.update(cp.view());
    return h.finish();
}

double trojan_probability(int prefix_bits, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("trojan_probability requires n >= 1");
    return std::ldexp(1.0 / static_cast<double>(n), -prefix_bits);
}

ChunkProofCache::Table& ChunkProofCache::table_for(const Nonce& nonce) {
    auto it = per_nonce_.find(nonce);
    if (it != per_nonce_.end()) return it->second;
    order_.push_back(nonce);
    while (order_.size() > retained_) {
        per_nonce_.erase(order_.front());
        order_.pop_front();
    }
    return per_nonce_[nonce];
}

std::vector<Hash256> ChunkProofCache::proofs(const Nonce& nonce, std::span<const Chunk* const> chunks) {
    Table& table = table_for(nonce);
    std::vector<Hash256> out(chunks.size());
    std::vector<const Chunk*> misses;
    std::vector<std::size_t> miss_pos;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        auto it = table.find(chunks[i]->id());
        if (it != table.end()) {
            out[i] = it->second;
        } else {
            misses.push_back(chunks[i]);
            miss_pos.push_back(i);
        }
    }
    if (!misses.empty()) {
        std::vector<Hash256> computed(misses.size());
        chunk_proofs_parallel(nonce, misses, computed, threads_);
        computed_ += misses.size();
        for (std::size_t j = 0; j < misses.size(); ++j) {
            out[miss_pos[j]] = computed[j];
            table.emplace(misses[j]->id(), computed[j]);
        }
    }
    return out;
}

Hash256 ChunkProofCache::proof(const Nonce& nonce, const Chunk& chunk) {
    Table& table = table_for(nonce);
    auto it = table.find(chunk.id());
    if (it != table.end()) return it->second;
    const Hash256 cp = chunk_proof(nonce, chunk);
    ++computed_;
    table.emplace(chunk.id(), cp);
    return cp;
}

std::optional<Hash256> ChunkProofCache::lookup(const Nonce& nonce, const ChunkId& id) const {
    auto t = per_nonce_.find(nonce);
    if (t == per_nonce_.end()) return std::nullopt;
    auto it = t->second.find(id);
    if (it == t->second.end()) return std::nullopt;
    return it->second;
}

Bytes StorageProof::signing_payload() const {
    Bytes out;
    out.reserve(mphf_bytes.size() + 8 + 64 + 32);
    put_bytes(out, mphf_bytes);
    put_bytes(out, nonce.view());
    put_bytes(out, start.view());
    put_bytes(out, end.view());
    if (checksum) put_bytes(out, checksum->view());
    return out;
}

bool StorageProof::verify() const {
    if (end < start) return false;
    if (signer != signer_address(signature)) return false;
    return verify_signature(signature, signing_payload());
}

ProofBundle create_proof(const ChunkStore& store, const Nonce& nonce, const Address& start, const Address& end,
                         ChunkProofCache& cache, const Signer& signer, const ProofOptions& options) {
    const std::vector<const Chunk*> chunks = store.range(start, end);
    const std::vector<Hash256> proofs = cache.proofs(nonce, chunks);

    ProofBundle bundle;
    StorageProof& proof = bundle.proof;
    proof.mphf = Mphf::build(proofs, MphfBuildOptions{options.gamma, options.threads});
    proof.mphf_bytes = proof.mphf.serialize();
    proof.nonce = nonce;
    proof.start = start;
    proof.end = end;

    // Fill the reverse map by re-querying every chunk proof.
    bundle.reverse.nonce = nonce;
    bundle.reverse.ids.resize(chunks.size());
    std::vector<Hash256> ordered(chunks.size());
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        const std::uint64_t idx = proof.mphf.find(proofs[i]);
        bundle.reverse.ids[idx - 1] = chunks[i]->id();
        ordered[idx - 1] = proofs[i];
    }
    proof.checksum = proof_checksum(ordered);
    proof.signature = signer.sign(proof.signing_payload());
    proof.signer = signer.address();
    return bundle;
}

ProofAssessment assess_proof(const ChunkStore& store, const StorageProof& proof, ChunkProofCache& cache) {
    ProofAssessment a;
    const std::uint64_t n = proof.size();
    a.counters.assign(n, 1);
    a.matched.resize(n);
    if (n == 0) return a;

    const std::vector<const Chunk*> chunks = store.range(proof.start, proof.end);
    const std::vector<Hash256> proofs = cache.proofs(proof.nonce, chunks);
    a.queried = chunks.size();
    for (const Hash256& cp : proofs) {
        const std::uint64_t idx = proof.mphf.find(cp);
        if (idx != 0) {
            --a.counters[idx - 1];
            a.matched[idx - 1] = cp;
            ++a.hits;
        }
    }
    for (std::uint64_t i = 1; i <= n; ++i) {
        const std::int32_t c = a.counters[i - 1];
        if (c == 1) {
            a.report.missing.push_back(i);
        } else if (c < 0) {
            a.report.collision = true;
        }
    }
    return a;
}

MissingReport find_missing(const ChunkStore& store, const StorageProof& proof, ChunkProofCache& cache) {
    return assess_proof(store, proof, cache).report;
}

bool verify_upload(const StorageProof& proof, std::uint64_t expected_index, const Chunk& chunk, const Address& peer,
                   int prefix_bits) {
    if (!in_neighborhood(peer, chunk.id(), prefix_bits)) return false;
    if (expected_index == 0) return false;
    return proof.mphf.find(chunk_proof(proof.nonce, chunk)) == expected_index;
}

}  // namespace snips
