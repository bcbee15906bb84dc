#pragma once

#include <cstdint>

namespace snips {

struct FalseConsistencyEstimate {
    std::uint64_t n_chunks = 0;
    std::uint64_t trials = 0;
    /// Trials where the verifier reported nothing missing and no collision.
    std::uint64_t false_consistent = 0;
    /// Trials where the one foreign chunk hit no index at all.
    std::uint64_t foreign_unmapped = 0;
    std::uint64_t collisions = 0;

    [[nodiscard]] double estimate() const;
    /// 1 / n.
    [[nodiscard]] double analytic() const;
    /// Binomial standard error of the estimate under the analytic rate.
    [[nodiscard]] double sigma() const;
};

/// Each trial: the prover holds n chunks, the verifier holds the same chunks
/// except one that is replaced by a chunk the prover lacks. A fresh nonce per
/// trial makes every trial an independent proof. Trials run in parallel and
/// the result does not depend on the thread count.
FalseConsistencyEstimate simulate_false_consistency(std::uint64_t n_chunks, std::uint64_t trials, std::uint64_t seed,
                                                    int threads = 0, std::size_t chunk_size = 64);

struct FalsePositiveEstimate {
    std::uint64_t n_chunks = 0;
    std::uint64_t probe_count = 0;
    std::uint64_t trials = 0;
    std::uint64_t trials_with_fp = 0;
    std::uint64_t fp_queries = 0;

    [[nodiscard]] double probability() const;
    /// Fraction of individual probes answered with a nonzero index.
    [[nodiscard]] double per_query_rate() const;
};

/// Each trial builds an MPHF over n random digests and probes it with
/// probe_count other random digests.
FalsePositiveEstimate simulate_false_positive(std::uint64_t n_chunks, std::uint64_t probe_count, std::uint64_t trials,
                                              std::uint64_t seed, int threads = 0);

struct OverheadPoint {
    std::uint64_t n_chunks = 0;
    std::uint64_t proof_bytes = 0;
    std::uint64_t size_bits = 0;
    double create_seconds = 0;
    double verify_seconds = 0;

    [[nodiscard]] double bits_per_chunk() const;
    [[nodiscard]] double create_us_per_chunk() const;
    [[nodiscard]] double verify_us_per_chunk() const;
};

/// Time create_proof and find_missing over n pseudorandom chunks, both with
/// cold chunk-proof caches. `repeats` > 1 keeps the fastest run.
OverheadPoint measure_overhead(std::uint64_t n_chunks, std::size_t chunk_size, std::uint64_t seed, int repeats = 1,
                               int threads = 0);

}  // namespace snips
