#include "snips/chunkstore.hpp"

#include <fstream>
#include <iterator>

#include "snips/hash.hpp"

namespace snips {
namespace {

constexpr Byte kSnapshotMagic[4] = {'S', 'C', 'H', 'K'};
constexpr std::uint8_t kSnapshotVersion = 1;

void check_size(std::size_t n) {
    if (n == 0 || n > kMaxChunkSize) throw ChunkSizeError("chunk payload must be 1..4096 bytes");
}

}  // namespace

ChunkId chunk_id(ByteView data) {
    check_size(data.size());
    return sha256(data);
}

Chunk::Chunk(Bytes data) {
    check_size(data.size());
    id_ = sha256(data);
    data_ = std::make_shared<const Bytes>(std::move(data));
}

bool ChunkStore::put(const Chunk& chunk) {
    auto [it, inserted] = chunks_.try_emplace(chunk.id(), chunk);
    if (inserted) {
        payload_bytes_ += chunk.size();
        ++version_;
    }
    return inserted;
}

std::optional<Chunk> ChunkStore::get(const ChunkId& id) const {
    auto it = chunks_.find(id);
    if (it == chunks_.end()) return std::nullopt;
    return it->second;
}

const Chunk* ChunkStore::find(const ChunkId& id) const {
    auto it = chunks_.find(id);
    return it == chunks_.end() ? nullptr : &it->second;
}

bool ChunkStore::erase(const ChunkId& id) {
    auto it = chunks_.find(id);
    if (it == chunks_.end()) return false;
    payload_bytes_ -= it->second.size();
    chunks_.erase(it);
    ++version_;
    return true;
}

std::vector<const Chunk*> ChunkStore::range(const Address& start, const Address& end) const {
    if (end < start) throw RangeError("range start exceeds end");
    std::vector<const Chunk*> out;
    for (auto it = chunks_.lower_bound(start); it != chunks_.end() && !(end < it->first); ++it) out.push_back(&it->second);
    return out;
}

std::size_t ChunkStore::count_range(const Address& start, const Address& end) const {
    if (end < start) throw RangeError("range start exceeds end");
    return static_cast<std::size_t>(std::distance(chunks_.lower_bound(start), chunks_.upper_bound(end)));
}

std::vector<ChunkId> ChunkStore::ids() const {
    std::vector<ChunkId> out;
    out.reserve(chunks_.size());
    for (const auto& [id, chunk] : chunks_) out.push_back(id);
    return out;
}

std::vector<ChunkId> ChunkStore::scrub() const {
    std::vector<ChunkId> bad;
    for (const auto& [id, chunk] : chunks_)
        if (sha256(chunk.data()) != id) bad.push_back(id);
    return bad;
}

Bytes ChunkStore::encode_snapshot() const {
    Bytes out;
    out.reserve(13 + payload_bytes_ + 2 * chunks_.size());
    for (Byte b : kSnapshotMagic) put_u8(out, b);
    put_u8(out, kSnapshotVersion);
    put_le<std::uint64_t>(out, chunks_.size());
    for (const auto& [id, chunk] : chunks_) {
        put_le<std::uint16_t>(out, static_cast<std::uint16_t>(chunk.size()));
        put_bytes(out, chunk.data());
    }
    return out;
}

ChunkStore ChunkStore::decode_snapshot(ByteView bytes) {
    Reader in(bytes);
    const ByteView magic = in.take(4);
    if (!std::equal(magic.begin(), magic.end(), kSnapshotMagic)) throw DecodeError("snapshot: bad magic");
    if (in.u8() != kSnapshotVersion) throw DecodeError("snapshot: unsupported version");
    const std::uint64_t count = in.le<std::uint64_t>();
    ChunkStore store;
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint16_t len = in.le<std::uint16_t>();
        if (len == 0 || len > kMaxChunkSize) throw DecodeError("snapshot: bad chunk length");
        const ByteView data = in.take(len);
        store.put(Chunk(Bytes(data.begin(), data.end())));
    }
    in.expect_end();
    return store;
}

void ChunkStore::save(const std::filesystem::path& path) const {
    const Bytes bytes = encode_snapshot();
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open snapshot for writing: " + path.string());
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("snapshot write failed: " + path.string());
}

ChunkStore ChunkStore::load(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open snapshot: " + path.string());
    Bytes bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return decode_snapshot(bytes);
}

bool operator==(const ChunkStore& a, const ChunkStore& b) {
    if (a.chunks_.size() != b.chunks_.size()) return false;
    return std::equal(a.chunks_.begin(), a.chunks_.end(), b.chunks_.begin(),
                      [](const auto& x, const auto& y) { return x.first == y.first; });
}

FileTree split_file(ByteView data) {
    if (data.empty()) throw ChunkSizeError("cannot split an empty file");
    FileTree tree;
    std::vector<ChunkId> level;
    for (std::size_t off = 0; off < data.size(); off += kMaxChunkSize) {
        const ByteView slice = data.subspan(off, std::min(kMaxChunkSize, data.size() - off));
        tree.chunks.emplace_back(Bytes(slice.begin(), slice.end()));
        level.push_back(tree.chunks.back().id());
    }
    tree.leaf_count = level.size();
    while (level.size() > 1) {
        std::vector<ChunkId> parents;
        for (std::size_t i = 0; i < level.size(); i += kTreeArity) {
            Bytes node;
            const std::size_t end = std::min(level.size(), i + kTreeArity);
            for (std::size_t j = i; j < end; ++j) put_bytes(node, level[j].view());
            tree.chunks.emplace_back(std::move(node));
            parents.push_back(tree.chunks.back().id());
        }
        level.swap(parents);
        ++tree.depth;
    }
    tree.root = level.front();
    return tree;
}

namespace {

void join_into(const ChunkStore& store, const ChunkId& id, std::size_t depth, Bytes& out) {
    const Chunk* chunk = store.find(id);
    if (chunk == nullptr) throw std::runtime_error("file tree references missing chunk " + id.hex());
    if (depth == 0) {
        put_bytes(out, chunk->data());
        return;
    }
    const ByteView children = chunk->data();
    if (children.size() % 32 != 0) throw DecodeError("intermediate chunk is not a list of ids");
    for (std::size_t off = 0; off < children.size(); off += 32)
        join_into(store, ChunkId::from_span(children.subspan(off, 32)), depth - 1, out);
}

}  // namespace

Bytes join_file(const ChunkStore& store, const ChunkId& root, std::size_t depth) {
    Bytes out;
    join_into(store, root, depth, out);
    return out;
}

bool in_neighborhood(const Address& peer, const Address& id, int prefix_bits) {
    if (prefix_bits < 0 || prefix_bits > 256) throw std::invalid_argument("prefix_bits must be in [0, 256]");
    const int full = prefix_bits / 8;
    for (int i = 0; i < full; ++i)
        if (peer.bytes[i] != id.bytes[i]) return false;
    const int rest = prefix_bits % 8;
    if (rest == 0) return true;
    const auto mask = static_cast<Byte>(0xFF << (8 - rest));
    return (peer.bytes[full] & mask) == (id.bytes[full] & mask);
}

}  // namespace snips
