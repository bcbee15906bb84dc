#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "snips/types.hpp"

namespace snips {

class ChunkSizeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class RangeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Content address of a payload: SHA-256 over the data.
/// Throws ChunkSizeError unless 1 <= data.size() <= 4096.
ChunkId chunk_id(ByteView data);

/// Immutable content-addressed chunk. The payload buffer is shared, so copies
/// are cheap and many peers can hold the same chunk.
class Chunk {
public:
    explicit Chunk(Bytes data);

    [[nodiscard]] const ChunkId& id() const noexcept { return id_; }
    [[nodiscard]] ByteView data() const noexcept { return *data_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_->size(); }

    friend bool operator==(const Chunk& a, const Chunk& b) noexcept { return a.id_ == b.id_; }

private:
    ChunkId id_;
    std::shared_ptr<const Bytes> data_;
};

/// In-memory chunk store ordered by id for range scans.
class ChunkStore {
public:
    using Map = std::map<ChunkId, Chunk>;

    /// Returns false when the id was already present (no-op).
    bool put(const Chunk& chunk);
    [[nodiscard]] std::optional<Chunk> get(const ChunkId& id) const;
    [[nodiscard]] const Chunk* find(const ChunkId& id) const;
    /// Returns false when the id was absent.
    bool erase(const ChunkId& id);
    [[nodiscard]] bool contains(const ChunkId& id) const { return chunks_.contains(id); }

    [[nodiscard]] std::size_t size() const noexcept { return chunks_.size(); }
    [[nodiscard]] bool empty() const noexcept { return chunks_.empty(); }
    [[nodiscard]] std::uint64_t payload_bytes() const noexcept { return payload_bytes_; }

    /// Bumped on every mutation.
    [[nodiscard]] std::uint64_t version() const noexcept { return version_; }

    /// Chunks with start <= id <= end in ascending id order.
    [[nodiscard]] std::vector<const Chunk*> range(const Address& start, const Address& end) const;
    [[nodiscard]] std::size_t count_range(const Address& start, const Address& end) const;

    [[nodiscard]] std::vector<ChunkId> ids() const;
    [[nodiscard]] const Map& chunks() const noexcept { return chunks_; }

    /// Ids that do not match the content hash of their payload. Always empty
    /// for stores built through the public API.
    [[nodiscard]] std::vector<ChunkId> scrub() const;

    void save(const std::filesystem::path& path) const;
    static ChunkStore load(const std::filesystem::path& path);
    [[nodiscard]] Bytes encode_snapshot() const;
    static ChunkStore decode_snapshot(ByteView bytes);

    friend bool operator==(const ChunkStore& a, const ChunkStore& b);

private:
    Map chunks_;
    std::uint64_t payload_bytes_ = 0;
    std::uint64_t version_ = 0;
};

/// Result of splitting a file into a 128-ary tree of chunks.
struct FileTree {
    ChunkId root;
    /// Leaves at depth 0; the root sits at `depth`.
    std::size_t depth = 0;
    std::size_t leaf_count = 0;
    std::vector<Chunk> chunks;
};

inline constexpr std::size_t kTreeArity = kMaxChunkSize / 32;

/// Split data into <=4096-byte leaves and build intermediate chunks holding the
/// concatenated ids of up to 128 children. Throws ChunkSizeError on empty input.
FileTree split_file(ByteView data);

/// Depth-first reassembly of a file tree from a store.
Bytes join_file(const ChunkStore& store, const ChunkId& root, std::size_t depth);

/// True iff the first `prefix_bits` bits of both addresses agree.
bool in_neighborhood(const Address& peer, const Address& id, int prefix_bits);

}  // namespace snips
