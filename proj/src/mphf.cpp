#include "snips/mphf.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>

#include "snips/hash.hpp"

namespace snips {
namespace {

constexpr Byte kMagic[4] = {'S', 'M', 'P', 'H'};
constexpr std::size_t kIntegrityBytes = 8;
// magic, version, gamma, n
constexpr std::size_t kHeaderBytes = 4 + 1 + 8 + 8;
constexpr double kMaxGamma = 64.0;
constexpr std::size_t kWordsPerBlock = Mphf::kRankBlockBits / 64;

std::uint64_t load_le64(const Byte* p) noexcept {
    std::uint64_t v;
    std::memcpy(&v, p, 8);
    return v;
}

// Folds the whole digest so keys that share a prefix still spread out.
std::uint64_t key_hash(const Hash256& key) noexcept {
    const Byte* p = key.data();
    return mix64(load_le64(p) ^ mix64(load_le64(p + 8) ^ mix64(load_le64(p + 16) ^ mix64(load_le64(p + 24)))));
}

std::uint64_t level_position(std::uint64_t kh, std::uint64_t seed, std::uint64_t bits) noexcept {
    return fast_range(mix64(kh ^ seed), bits);
}

std::uint64_t level_size(double gamma, std::uint64_t remaining) {
    auto bits = static_cast<std::uint64_t>(std::ceil(gamma * static_cast<double>(remaining)));
    return std::max<std::uint64_t>(bits, 1);
}

bool valid_gamma(double gamma) { return gamma >= 1.0 && gamma <= kMaxGamma; }

void check_gamma(double gamma) {
    if (!valid_gamma(gamma)) throw std::invalid_argument("gamma must be in [1, 64]");
}

}  // namespace

std::uint64_t Mphf::level_seed(std::size_t level) noexcept { return mix64(kBuildSeed ^ mix64(level + 1)); }

Mphf Mphf::build(std::span<const Hash256> keys, const MphfBuildOptions& options) {
    return build_impl<true>(keys, options.gamma, options.threads);
}

Mphf Mphf::build_serial(std::span<const Hash256> keys, double gamma) { return build_impl<false>(keys, gamma, 1); }

template <bool Parallel>
Mphf Mphf::build_impl(std::span<const Hash256> keys, double gamma, int threads) {
    check_gamma(gamma);
    Mphf out;
    out.gamma_ = gamma;
    out.n_ = keys.size();
    if (keys.empty()) {
        out.finalize_rank_index();
        return out;
    }
    const int nthreads = threads > 0 ? threads : omp_get_max_threads();

    // Remaining keys are tracked by position in `keys` together with their
    // folded hash, in input order. Filtering preserves that order, so the
    // result never depends on thread interleaving.
    std::vector<std::uint32_t> remaining(keys.size());
    std::vector<std::uint64_t> hashes(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) remaining[i] = static_cast<std::uint32_t>(i);

    if constexpr (Parallel) {
        const auto count = static_cast<std::int64_t>(keys.size());
#pragma omp parallel for num_threads(nthreads) schedule(static)
        for (std::int64_t i = 0; i < count; ++i) hashes[i] = key_hash(keys[i]);
    } else {
        for (std::size_t i = 0; i < keys.size(); ++i) hashes[i] = key_hash(keys[i]);
    }

    std::vector<std::uint64_t> seen;
    std::vector<std::uint64_t> collided;
    std::vector<std::uint32_t> next;

    for (std::size_t level = 0; level < kMaxLevels && !remaining.empty(); ++level) {
        const std::uint64_t bits = level_size(gamma, remaining.size());
        const std::uint64_t seed = level_seed(level);
        const std::size_t words = (bits + 63) / 64;
        seen.assign(words, 0);
        collided.assign(words, 0);

        if constexpr (Parallel) {
            const auto count = static_cast<std::int64_t>(remaining.size());
#pragma omp parallel for num_threads(nthreads) schedule(static)
            for (std::int64_t i = 0; i < count; ++i) {
                const std::uint64_t pos = level_position(hashes[remaining[i]], seed, bits);
                const std::uint64_t mask = 1ULL << (pos & 63);
                const std::uint64_t prev = std::atomic_ref<std::uint64_t>(seen[pos >> 6]).fetch_or(mask, std::memory_order_relaxed);
                if (prev & mask) std::atomic_ref<std::uint64_t>(collided[pos >> 6]).fetch_or(mask, std::memory_order_relaxed);
            }
        } else {
            for (std::uint32_t idx : remaining) {
                const std::uint64_t pos = level_position(hashes[idx], seed, bits);
                const std::uint64_t mask = 1ULL << (pos & 63);
                if (seen[pos >> 6] & mask) collided[pos >> 6] |= mask;
                seen[pos >> 6] |= mask;
            }
        }

        for (std::size_t w = 0; w < words; ++w) seen[w] &= ~collided[w];
        out.append_level(seen, bits);

        next.clear();
        if constexpr (Parallel) {
            // Stable compaction: each thread filters a contiguous slice, then
            // slices are concatenated in order.
            const std::size_t count = remaining.size();
            std::vector<std::vector<std::uint32_t>> parts(static_cast<std::size_t>(nthreads));
#pragma omp parallel num_threads(nthreads)
            {
                const auto tid = static_cast<std::size_t>(omp_get_thread_num());
                const auto team = static_cast<std::size_t>(omp_get_num_threads());
                const std::size_t lo = count * tid / team;
                const std::size_t hi = count * (tid + 1) / team;
                auto& part = parts[tid];
                for (std::size_t i = lo; i < hi; ++i) {
                    const std::uint64_t pos = level_position(hashes[remaining[i]], seed, bits);
                    if ((collided[pos >> 6] >> (pos & 63)) & 1U) part.push_back(remaining[i]);
                }
            }
            for (const auto& part : parts) next.insert(next.end(), part.begin(), part.end());
        } else {
            for (std::uint32_t idx : remaining) {
                const std::uint64_t pos = level_position(hashes[idx], seed, bits);
                if ((collided[pos >> 6] >> (pos & 63)) & 1U) next.push_back(idx);
            }
        }
        remaining.swap(next);
    }

    out.finalize_rank_index();

    if (!remaining.empty()) {
        std::vector<Hash256> left;
        left.reserve(remaining.size());
        for (std::uint32_t idx : remaining) left.push_back(keys[idx]);
        std::sort(left.begin(), left.end());
        if (std::adjacent_find(left.begin(), left.end()) != left.end())
            throw DuplicateKeyError("duplicate digest in MPHF input");
        if (left.size() > kMaxFallbackEntries)
            throw ConstructionError("level cascade left too many keys unplaced");
        std::uint64_t index = out.level_set_bits_;
        for (const auto& key : left) out.fallback_.emplace_back(key, ++index);
    }
    return out;
}

void Mphf::append_level(std::span<const std::uint64_t> words, std::uint64_t bits) {
    levels_.push_back(Level{bits, words_.size()});
    words_.insert(words_.end(), words.begin(), words.end());
}

void Mphf::finalize_rank_index() {
    const std::size_t blocks = (words_.size() + kWordsPerBlock - 1) / kWordsPerBlock;
    rank_blocks_.assign(blocks, 0);
    std::uint64_t total = 0;
    for (std::size_t w = 0; w < words_.size(); ++w) {
        if (w % kWordsPerBlock == 0) rank_blocks_[w / kWordsPerBlock] = static_cast<std::uint32_t>(total);
        total += static_cast<std::uint64_t>(std::popcount(words_[w]));
    }
    level_set_bits_ = total;
}

std::uint64_t Mphf::rank(std::uint64_t bit_pos) const noexcept {
    const std::size_t word = bit_pos >> 6;
    const std::size_t block = word / kWordsPerBlock;
    std::uint64_t r = rank_blocks_[block];
    for (std::size_t w = block * kWordsPerBlock; w < word; ++w) r += static_cast<std::uint64_t>(std::popcount(words_[w]));
    const std::uint64_t below = (1ULL << (bit_pos & 63)) - 1;
    return r + static_cast<std::uint64_t>(std::popcount(words_[word] & below));
}

std::uint64_t Mphf::find(const Hash256& key) const noexcept {
    if (n_ == 0) return 0;
    const std::uint64_t kh = key_hash(key);
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        const Level& lv = levels_[i];
        const std::uint64_t pos = lv.word_offset * 64 + level_position(kh, level_seed(i), lv.bits);
        if (test_bit(pos)) return 1 + rank(pos);
    }
    if (!fallback_.empty()) {
        auto it = std::lower_bound(fallback_.begin(), fallback_.end(), key,
                                   [](const auto& entry, const Hash256& k) { return entry.first < k; });
        if (it != fallback_.end() && it->first == key) return it->second;
    }
    return 0;
}

std::uint64_t Mphf::size_bits() const {
    std::uint64_t bytes = kHeaderBytes + kIntegrityBytes;
    for (const Level& lv : levels_) bytes += (lv.bits + 7) / 8;
    bytes += fallback_.size() * 32;
    return bytes * 8 + rank_blocks_.size() * 32;
}

Bytes Mphf::serialize() const {
    Bytes out;
    out.reserve(size_bits() / 8);
    for (Byte b : kMagic) put_u8(out, b);
    put_u8(out, kFormatVersion);
    put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(gamma_));
    put_le<std::uint64_t>(out, n_);
    // Level sizes, the level count and the fallback length all follow from n,
    // gamma and the popcount of each level, so none of them is stored.
    for (const Level& lv : levels_) {
        const std::size_t nbytes = (lv.bits + 7) / 8;
        for (std::size_t b = 0; b < nbytes; ++b) {
            const std::uint64_t word = words_[lv.word_offset + b / 8];
            out.push_back(static_cast<Byte>(word >> (8 * (b % 8))));
        }
    }
    for (const auto& entry : fallback_) put_bytes(out, entry.first.view());
    const Hash256 digest = sha256(out);
    put_bytes(out, ByteView(digest.data(), kIntegrityBytes));
    return out;
}

Mphf Mphf::deserialize(ByteView bytes) {
    if (bytes.size() < kHeaderBytes + kIntegrityBytes) throw DecodeError("mphf: truncated input");
    const ByteView body = bytes.first(bytes.size() - kIntegrityBytes);
    const Hash256 digest = sha256(body);
    if (!std::equal(digest.bytes.begin(), digest.bytes.begin() + kIntegrityBytes, bytes.end() - kIntegrityBytes))
        throw DecodeError("mphf: integrity digest mismatch");

    Reader in(body);
    const ByteView magic = in.take(4);
    if (!std::equal(magic.begin(), magic.end(), kMagic)) throw DecodeError("mphf: bad magic");
    if (in.u8() != kFormatVersion) throw DecodeError("mphf: unsupported version");

    Mphf out;
    out.gamma_ = std::bit_cast<double>(in.le<std::uint64_t>());
    if (!valid_gamma(out.gamma_)) throw DecodeError("mphf: invalid gamma");
    out.n_ = in.le<std::uint64_t>();
    // Every key costs at least one bit on the wire.
    if (out.n_ > 8 * static_cast<std::uint64_t>(bytes.size())) throw DecodeError("mphf: element count too large");

    std::uint64_t remaining = out.n_;
    std::vector<std::uint64_t> words;
    for (std::size_t level = 0; level < kMaxLevels && remaining > 0; ++level) {
        const std::uint64_t bits = level_size(out.gamma_, remaining);
        const std::size_t nbytes = (bits + 7) / 8;
        if (nbytes > in.remaining()) throw DecodeError("mphf: truncated level");
        const ByteView packed = in.take(nbytes);
        words.assign((bits + 63) / 64, 0);
        for (std::size_t b = 0; b < nbytes; ++b) words[b / 8] |= static_cast<std::uint64_t>(packed[b]) << (8 * (b % 8));
        if (bits % 64 != 0 && (words.back() >> (bits % 64)) != 0) throw DecodeError("mphf: nonzero padding bits");
        std::uint64_t placed = 0;
        for (std::uint64_t w : words) placed += static_cast<std::uint64_t>(std::popcount(w));
        if (placed > remaining) throw DecodeError("mphf: level places more keys than remain");
        out.append_level(words, bits);
        remaining -= placed;
    }
    out.finalize_rank_index();

    if (remaining > kMaxFallbackEntries) throw DecodeError("mphf: fallback table too large");
    for (std::uint64_t i = 0; i < remaining; ++i) {
        Hash256 key = in.fixed<Hash256>();
        if (!out.fallback_.empty() && !(out.fallback_.back().first < key)) throw DecodeError("mphf: fallback keys unsorted");
        out.fallback_.emplace_back(key, out.level_set_bits_ + i + 1);
    }
    in.expect_end();
    return out;
}

}  // namespace snips
