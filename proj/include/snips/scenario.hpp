#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "snips/chunkstore.hpp"

namespace snips {

/// Peer 0 loses this fraction of an otherwise fully replicated store.
struct ChunkLoss {
    double fraction = 0;
};
/// Peer 0 holds this many bytes of new chunks on top of the shared store.
struct ChunkAddition {
    std::uint64_t bytes = 0;
};
/// Every peer holds round(s * n) common chunks plus n - round(s * n) of its own.
struct Similarity {
    double s = 1;
};
using Scenario = std::variant<ChunkLoss, ChunkAddition, Similarity>;

/// "cl:0.1", "ca:10" (megabytes) or "sim:0.5". Throws std::invalid_argument.
Scenario parse_scenario(std::string_view text);
std::string scenario_label(const Scenario& scenario);

enum class Protocol { snips, baseline };
Protocol parse_protocol(std::string_view text);
std::string_view protocol_name(Protocol protocol);

/// Storage sizes use binary megabytes: 10 MB of 4 KB chunks is 2560 chunks.
inline constexpr std::uint64_t kMegabyte = 1ULL << 20;

struct ScenarioConfig {
    Protocol protocol = Protocol::snips;
    std::size_t peers = 2;
    /// Bytes held by each peer before the scenario perturbation.
    std::uint64_t total_storage_bytes = kMegabyte;
    std::size_t chunk_size = kMaxChunkSize;
    Scenario scenario = Similarity{1.0};
    std::uint64_t seed = 1;
    std::uint64_t max_rounds = 10;
    /// Simulated time units per message hop.
    std::uint64_t latency = 1;
    /// Hard stop for one beacon round, in delivered messages.
    std::uint64_t max_events_per_round = 50'000'000;
    int neighborhood_bits = 0;
    double gamma = 2.0;
    bool verify_checksum = true;
    int threads = 0;

    [[nodiscard]] std::uint64_t chunks_per_peer() const;
    /// Throws std::invalid_argument on out-of-range parameters.
    void validate() const;
    /// One-line key=value description; enough to rerun the configuration.
    [[nodiscard]] std::string describe() const;
};

/// Deterministic pseudorandom chunk payloads.
class ChunkFactory {
public:
    ChunkFactory(std::uint64_t seed, std::size_t chunk_size);
    Chunk next();
    std::vector<Chunk> make(std::size_t count);

private:
    std::mt19937_64 rng_;
    std::size_t chunk_size_;
};

/// Uniform integer in [0, bound) from a 64-bit generator.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

template <class T>
void shuffle(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[uniform_below(rng, i)]);
}

struct SimilarPair {
    std::vector<Chunk> a;
    std::vector<Chunk> b;
};

/// |A| = |B| = n and |A ∩ B| = round(s * n).
SimilarPair init_similarity(std::size_t n_chunks, double s, std::uint64_t seed,
                            std::size_t chunk_size = kMaxChunkSize);

/// Initial stores for every peer of a scenario.
std::vector<ChunkStore> initial_stores(const ScenarioConfig& config);

using IdSet = std::set<ChunkId>;

IdSet id_set(const ChunkStore& store);
IdSet id_set(const std::vector<Chunk>& chunks);

/// |A ∩ B| / min(|A|, |B|). Both empty gives 1, one empty gives 0.
double overlap_coefficient(const IdSet& a, const IdSet& b);

/// |identified ∩ truly_missing| / |truly_missing|, 1 when nothing is missing.
double proof_accuracy(const IdSet& identified, const IdSet& truly_missing);

}  // namespace snips
