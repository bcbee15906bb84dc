#include "snips/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "snips/hash.hpp"

namespace snips {
namespace {

std::string format_number(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

double parse_number(std::string_view text, std::string_view what) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
        throw std::invalid_argument("bad number for " + std::string(what) + ": '" + std::string(text) + "'");
    return v;
}

std::uint64_t common_count(std::uint64_t n, double s) { return static_cast<std::uint64_t>(std::llround(s * static_cast<double>(n))); }

}  // namespace

Scenario parse_scenario(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) throw std::invalid_argument("scenario must look like cl:<f>, ca:<mb> or sim:<s>");
    const std::string_view kind = text.substr(0, colon);
    const double v = parse_number(text.substr(colon + 1), kind);
    if (kind == "cl") {
        if (v < 0 || v > 1) throw std::invalid_argument("chunk loss fraction must be in [0,1]");
        return ChunkLoss{v};
    }
    if (kind == "ca") {
        if (v < 0) throw std::invalid_argument("added megabytes must be >= 0");
        return ChunkAddition{static_cast<std::uint64_t>(std::llround(v * static_cast<double>(kMegabyte)))};
    }
    if (kind == "sim") {
        if (v < 0 || v > 1) throw std::invalid_argument("similarity must be in [0,1]");
        return Similarity{v};
    }
    throw std::invalid_argument("unknown scenario kind '" + std::string(kind) + "'");
}

std::string scenario_label(const Scenario& scenario) {
    if (const auto* cl = std::get_if<ChunkLoss>(&scenario)) return "cl:" + format_number(cl->fraction);
    if (const auto* ca = std::get_if<ChunkAddition>(&scenario))
        return "ca:" + format_number(static_cast<double>(ca->bytes) / static_cast<double>(kMegabyte));
    return "sim:" + format_number(std::get<Similarity>(scenario).s);
}

Protocol parse_protocol(std::string_view text) {
    if (text == "snips") return Protocol::snips;
    if (text == "baseline") return Protocol::baseline;
    throw std::invalid_argument("unknown protocol '" + std::string(text) + "'");
}

std::string_view protocol_name(Protocol protocol) { return protocol == Protocol::snips ? "snips" : "baseline"; }

std::uint64_t ScenarioConfig::chunks_per_peer() const {
    return std::max<std::uint64_t>(1, total_storage_bytes / chunk_size);
}

void ScenarioConfig::validate() const {
    if (peers < 2) throw std::invalid_argument("need at least 2 peers");
    if (chunk_size == 0 || chunk_size > kMaxChunkSize) throw std::invalid_argument("chunk size must be in [1, 4096]");
    if (max_rounds == 0) throw std::invalid_argument("max_rounds must be >= 1");
    if (latency == 0) throw std::invalid_argument("latency must be >= 1");
    if (neighborhood_bits < 0 || neighborhood_bits > 256) throw std::invalid_argument("neighborhood bits must be in [0,256]");
    if (!(gamma >= 1.0)) throw std::invalid_argument("gamma must be >= 1");
    std::visit([](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ChunkLoss>) {
            if (s.fraction < 0 || s.fraction > 1) throw std::invalid_argument("chunk loss fraction must be in [0,1]");
        } else if constexpr (std::is_same_v<T, Similarity>) {
            if (s.s < 0 || s.s > 1) throw std::invalid_argument("similarity must be in [0,1]");
        }
    }, scenario);
}

std::string ScenarioConfig::describe() const {
    std::string out;
    out += "protocol=" + std::string(protocol_name(protocol));
    out += " peers=" + std::to_string(peers);
    out += " storage_bytes=" + std::to_string(total_storage_bytes);
    out += " chunk_size=" + std::to_string(chunk_size);
    out += " scenario=" + scenario_label(scenario);
    out += " seed=" + std::to_string(seed);
    out += " max_rounds=" + std::to_string(max_rounds);
    out += " gamma=" + format_number(gamma);
    out += " neighborhood_bits=" + std::to_string(neighborhood_bits);
    return out;
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_below: empty range");
    // Lemire's rejection keeps the result unbiased.
    std::uint64_t x = rng();
    auto m = static_cast<unsigned __int128>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            x = rng();
            m = static_cast<unsigned __int128>(x) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

ChunkFactory::ChunkFactory(std::uint64_t seed, std::size_t chunk_size) : rng_(seed), chunk_size_(chunk_size) {
    if (chunk_size == 0 || chunk_size > kMaxChunkSize) throw ChunkSizeError("chunk size must be in [1, 4096]");
}

Chunk ChunkFactory::next() {
    Bytes data(chunk_size_);
    for (std::size_t off = 0; off < chunk_size_; off += 8) {
        const std::uint64_t w = rng_();
        std::memcpy(data.data() + off, &w, std::min<std::size_t>(8, chunk_size_ - off));
    }
    return Chunk(std::move(data));
}

std::vector<Chunk> ChunkFactory::make(std::size_t count) {
    std::vector<Chunk> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(next());
    return out;
}

SimilarPair init_similarity(std::size_t n_chunks, double s, std::uint64_t seed, std::size_t chunk_size) {
    if (n_chunks == 0) throw std::invalid_argument("init_similarity: need at least one chunk");
    if (s < 0 || s > 1) throw std::invalid_argument("init_similarity: similarity must be in [0,1]");
    ChunkFactory factory(seed, chunk_size);
    const std::size_t common = common_count(n_chunks, s);
    SimilarPair out;
    out.a = factory.make(common);
    out.b = out.a;
    for (std::size_t i = common; i < n_chunks; ++i) out.a.push_back(factory.next());
    for (std::size_t i = common; i < n_chunks; ++i) out.b.push_back(factory.next());
    return out;
}

std::vector<ChunkStore> initial_stores(const ScenarioConfig& config) {
    config.validate();
    const std::uint64_t n = config.chunks_per_peer();
    ChunkFactory factory(derive_seed(config.seed, 0), config.chunk_size);
    std::vector<ChunkStore> stores(config.peers);

    if (const auto* sim = std::get_if<Similarity>(&config.scenario)) {
        const std::uint64_t common = common_count(n, sim->s);
        for (const Chunk& c : factory.make(common))
            for (auto& store : stores) store.put(c);
        for (auto& store : stores)
            for (std::uint64_t i = common; i < n; ++i) store.put(factory.next());
        return stores;
    }

    std::vector<Chunk> shared = factory.make(n);
    for (std::size_t p = 1; p < stores.size(); ++p)
        for (const Chunk& c : shared) stores[p].put(c);

    if (const auto* cl = std::get_if<ChunkLoss>(&config.scenario)) {
        std::mt19937_64 rng(derive_seed(config.seed, 1));
        shuffle(shared, rng);
        const std::uint64_t lost = common_count(n, cl->fraction);
        for (std::size_t i = lost; i < shared.size(); ++i) stores[0].put(shared[i]);
    } else {
        const auto& ca = std::get<ChunkAddition>(config.scenario);
        for (const Chunk& c : shared) stores[0].put(c);
        const std::uint64_t added = (ca.bytes + config.chunk_size - 1) / config.chunk_size;
        for (std::uint64_t i = 0; i < added; ++i) stores[0].put(factory.next());
    }
    return stores;
}

IdSet id_set(const ChunkStore& store) {
    const auto ids = store.ids();
    return IdSet(ids.begin(), ids.end());
}

IdSet id_set(const std::vector<Chunk>& chunks) {
    IdSet out;
    for (const Chunk& c : chunks) out.insert(c.id());
    return out;
}

double overlap_coefficient(const IdSet& a, const IdSet& b) {
    if (a.empty() && b.empty()) return 1.0;
    if (a.empty() || b.empty()) return 0.0;
    std::size_t common = 0;
    const IdSet& small = a.size() <= b.size() ? a : b;
    const IdSet& large = a.size() <= b.size() ? b : a;
    for (const ChunkId& id : small) common += large.contains(id) ? 1 : 0;
    return static_cast<double>(common) / static_cast<double>(small.size());
}

double proof_accuracy(const IdSet& identified, const IdSet& truly_missing) {
    if (truly_missing.empty()) return 1.0;
    std::size_t found = 0;
    for (const ChunkId& id : identified) found += truly_missing.contains(id) ? 1 : 0;
    return static_cast<double>(found) / static_cast<double>(truly_missing.size());
}

}  // namespace snips
