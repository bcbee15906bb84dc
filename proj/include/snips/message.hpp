#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "snips/chunkstore.hpp"
#include "snips/proof.hpp"
#include "snips/types.hpp"

namespace snips {

// Wire layout (little-endian), one variant tag byte followed by:
//
//   1 NewProof       nonce[8] start[32] end[32]
//   2 NewProof       nonce[8]                      (range kept by the prover)
//   3 Prove          nonce[8] start[32] end[32] len:u32 mphf[len] signature[97]
//                    [ 0x01 checksum[32] ]         (optional trailing block)
//   4 Select         nonce[8] bits:u32 bitvector[ceil(bits/8)]
//   5 Upload         len:u16 data[len]             (id recomputed on receipt)
//   6 UploadDone     (no payload)
//
// Select bit vectors put index 1 at bit 0 of byte 0, index 9 at bit 0 of
// byte 1, and so on. Padding bits in the last byte must be zero.

enum class MessageTag : std::uint8_t {
    new_proof = 1,
    new_proof_nonce = 2,
    prove = 3,
    select = 4,
    upload = 5,
    upload_done = 6,
};

struct NewProof {
    Nonce nonce;
    /// Absent when the sender leaves the range to the prover.
    std::optional<std::pair<Address, Address>> range;
};

struct Prove {
    std::shared_ptr<const StorageProof> proof;
};

/// Fixed-length bit vector over 1-based proof indices.
class IndexBitVector {
public:
    IndexBitVector() = default;
    explicit IndexBitVector(std::uint32_t length) : length_(length), bytes_((length + 7) / 8, 0) {}

    static IndexBitVector from_indices(std::uint32_t length, std::span<const std::uint64_t> indices);
    /// Throws DecodeError if the byte count or padding does not fit `length`.
    static IndexBitVector from_bytes(std::uint32_t length, ByteView bytes);

    void set(std::uint64_t index);
    [[nodiscard]] bool test(std::uint64_t index) const noexcept;
    [[nodiscard]] std::uint32_t length() const noexcept { return length_; }
    [[nodiscard]] std::size_t count() const noexcept;
    [[nodiscard]] std::vector<std::uint64_t> indices() const;
    [[nodiscard]] const Bytes& bytes() const noexcept { return bytes_; }

    friend bool operator==(const IndexBitVector&, const IndexBitVector&) = default;

private:
    std::uint32_t length_ = 0;
    Bytes bytes_;
};

struct Select {
    Nonce nonce;
    IndexBitVector missing;
};

struct Upload {
    Chunk chunk;
};

struct UploadDone {};

using Message = std::variant<NewProof, Prove, Select, Upload, UploadDone>;

Bytes encode(const Message& message);
/// Throws DecodeError on truncation, unknown tags, malformed proofs, or a bit
/// vector whose byte count disagrees with its length header.
Message decode(ByteView bytes);

/// Chunk payload bytes carried by a message (nonzero only for Upload).
std::size_t payload_size(const Message& message);
std::string_view message_name(const Message& message);

}  // namespace snips
