#include "snips/experiments.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstring>
#include <random>
#include <stdexcept>

#include "snips/hash.hpp"
#include "snips/mphf.hpp"
#include "snips/proof.hpp"
#include "snips/scenario.hpp"

namespace snips {
namespace {

int team_size(int threads) { return threads > 0 ? threads : omp_get_max_threads(); }

Nonce nonce_from(std::uint64_t v) {
    Nonce n;
    std::memcpy(n.bytes.data(), &v, 8);
    return n;
}

Hash256 random_digest(std::mt19937_64& rng) {
    Hash256 h;
    for (std::size_t i = 0; i < 4; ++i) {
        const std::uint64_t w = rng();
        std::memcpy(h.bytes.data() + 8 * i, &w, 8);
    }
    return h;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

double FalseConsistencyEstimate::estimate() const {
    return trials == 0 ? 0.0 : static_cast<double>(false_consistent) / static_cast<double>(trials);
}

double FalseConsistencyEstimate::analytic() const { return n_chunks == 0 ? 0.0 : 1.0 / static_cast<double>(n_chunks); }

double FalseConsistencyEstimate::sigma() const {
    const double p = analytic();
    return trials == 0 ? 0.0 : std::sqrt(p * (1 - p) / static_cast<double>(trials));
}

FalseConsistencyEstimate simulate_false_consistency(std::uint64_t n_chunks, std::uint64_t trials, std::uint64_t seed,
                                                    int threads, std::size_t chunk_size) {
    if (n_chunks == 0) throw std::invalid_argument("false consistency needs at least one chunk");
    FalseConsistencyEstimate out;
    out.n_chunks = n_chunks;
    out.trials = trials;

    // The verifier swaps the prover's first chunk for an extra one.
    ChunkFactory factory(derive_seed(seed, 0), chunk_size);
    std::vector<Chunk> pool = factory.make(n_chunks + 1);
    ChunkStore prover;
    ChunkStore verifier;
    for (std::uint64_t i = 0; i < n_chunks; ++i) prover.put(pool[i]);
    for (std::uint64_t i = 1; i <= n_chunks; ++i) verifier.put(pool[i]);

    std::uint64_t fc = 0;
    std::uint64_t unmapped = 0;
    std::uint64_t collisions = 0;
    const Chunk& foreign = pool[n_chunks];
    const auto n_trials = static_cast<std::int64_t>(trials);

#pragma omp parallel num_threads(team_size(threads)) reduction(+ : fc, unmapped, collisions)
    {
        const Ed25519Signer signer = Ed25519Signer::from_u64(derive_seed(seed, 1));
#pragma omp for schedule(static)
        for (std::int64_t t = 0; t < n_trials; ++t) {
            const Nonce nonce = nonce_from(derive_seed(seed, 2 + static_cast<std::uint64_t>(t)));
            ChunkProofCache prover_cache(1, 1);
            ChunkProofCache verifier_cache(1, 1);
            const ProofBundle bundle =
                create_proof(prover, nonce, min_address(), max_address(), prover_cache, signer, ProofOptions{2.0, 1});
            const MissingReport report = find_missing(verifier, bundle.proof, verifier_cache);
            if (report.missing.empty() && !report.collision) ++fc;
            if (report.collision) ++collisions;
            if (bundle.proof.mphf.find(verifier_cache.proof(nonce, foreign)) == 0) ++unmapped;
        }
    }
    out.false_consistent = fc;
    out.foreign_unmapped = unmapped;
    out.collisions = collisions;
    return out;
}

double FalsePositiveEstimate::probability() const {
    return trials == 0 ? 0.0 : static_cast<double>(trials_with_fp) / static_cast<double>(trials);
}

double FalsePositiveEstimate::per_query_rate() const {
    const std::uint64_t q = trials * probe_count;
    return q == 0 ? 0.0 : static_cast<double>(fp_queries) / static_cast<double>(q);
}

FalsePositiveEstimate simulate_false_positive(std::uint64_t n_chunks, std::uint64_t probe_count, std::uint64_t trials,
                                              std::uint64_t seed, int threads) {
    FalsePositiveEstimate out;
    out.n_chunks = n_chunks;
    out.probe_count = probe_count;
    out.trials = trials;
    if (n_chunks == 0) return out;

    std::uint64_t with_fp = 0;
    std::uint64_t fp_queries = 0;
    const auto n_trials = static_cast<std::int64_t>(trials);
#pragma omp parallel for num_threads(team_size(threads)) schedule(static) reduction(+ : with_fp, fp_queries)
    for (std::int64_t t = 0; t < n_trials; ++t) {
        std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        std::vector<Hash256> keys(n_chunks);
        for (auto& k : keys) k = random_digest(rng);
        const Mphf mphf = Mphf::build(keys, MphfBuildOptions{2.0, 1});
        std::uint64_t hits = 0;
        for (std::uint64_t p = 0; p < probe_count; ++p) hits += mphf.find(random_digest(rng)) != 0 ? 1 : 0;
        fp_queries += hits;
        with_fp += hits > 0 ? 1 : 0;
    }
    out.trials_with_fp = with_fp;
    out.fp_queries = fp_queries;
    return out;
}

double OverheadPoint::bits_per_chunk() const {
    return n_chunks == 0 ? 0.0 : static_cast<double>(size_bits) / static_cast<double>(n_chunks);
}

double OverheadPoint::create_us_per_chunk() const {
    return n_chunks == 0 ? 0.0 : 1e6 * create_seconds / static_cast<double>(n_chunks);
}

double OverheadPoint::verify_us_per_chunk() const {
    return n_chunks == 0 ? 0.0 : 1e6 * verify_seconds / static_cast<double>(n_chunks);
}

OverheadPoint measure_overhead(std::uint64_t n_chunks, std::size_t chunk_size, std::uint64_t seed, int repeats,
                               int threads) {
    ChunkFactory factory(derive_seed(seed, 0), chunk_size);
    ChunkStore store;
    for (std::uint64_t i = 0; i < n_chunks; ++i) store.put(factory.next());
    const Ed25519Signer signer = Ed25519Signer::from_u64(derive_seed(seed, 1));

    OverheadPoint best;
    best.n_chunks = n_chunks;
    for (int rep = 0; rep < std::max(1, repeats); ++rep) {
        const Nonce nonce = nonce_from(derive_seed(seed, 2 + static_cast<std::uint64_t>(rep)));
        ChunkProofCache prover_cache(1, threads);
        ChunkProofCache verifier_cache(1, threads);

        auto t0 = std::chrono::steady_clock::now();
        const ProofBundle bundle =
            create_proof(store, nonce, min_address(), max_address(), prover_cache, signer, ProofOptions{2.0, threads});
        const double create = seconds_since(t0);

        t0 = std::chrono::steady_clock::now();
        const MissingReport report = find_missing(store, bundle.proof, verifier_cache);
        const double verify = seconds_since(t0);
        if (!report.missing.empty() || report.collision) throw std::logic_error("identical stores disagreed");

        if (rep == 0 || create + verify < best.create_seconds + best.verify_seconds) {
            best.create_seconds = create;
            best.verify_seconds = verify;
        }
        best.proof_bytes = bundle.proof.mphf_bytes.size();
        best.size_bits = bundle.proof.mphf.size_bits();
    }
    return best;
}

}  // namespace snips
