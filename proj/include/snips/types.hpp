#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace snips {

using Byte = std::uint8_t;
using Bytes = std::vector<Byte>;
using ByteView = std::span<const Byte>;

/// Fixed-width byte string with lexicographic ordering.
template <std::size_t N, typename Tag>
struct FixedBytes {
    static constexpr std::size_t size = N;
    std::array<Byte, N> bytes{};

    constexpr auto operator<=>(const FixedBytes&) const = default;

    [[nodiscard]] ByteView view() const noexcept { return {bytes.data(), N}; }
    [[nodiscard]] const Byte* data() const noexcept { return bytes.data(); }
    [[nodiscard]] Byte* data() noexcept { return bytes.data(); }

    [[nodiscard]] std::string hex() const {
        static constexpr char digits[] = "0123456789abcdef";
        std::string out;
        out.reserve(2 * N);
        for (Byte b : bytes) {
            out.push_back(digits[b >> 4]);
            out.push_back(digits[b & 0x0F]);
        }
        return out;
    }

    static FixedBytes from_span(ByteView src) {
        if (src.size() != N) throw std::invalid_argument("fixed-width value has wrong length");
        FixedBytes out;
        std::copy(src.begin(), src.end(), out.bytes.begin());
        return out;
    }

    static FixedBytes filled(Byte value) {
        FixedBytes out;
        out.bytes.fill(value);
        return out;
    }

    /// First eight bytes as a little-endian word; used for hashing into tables.
    [[nodiscard]] std::uint64_t prefix64() const noexcept {
        static_assert(N >= 8);
        std::uint64_t v;
        std::memcpy(&v, bytes.data(), 8);
        return v;
    }
};

struct Hash256Tag {};
struct NonceTag {};

/// 256-bit digest. Chunk ids, chunk proofs, checksums and overlay
/// addresses all live in this space.
using Hash256 = FixedBytes<32, Hash256Tag>;
using Address = Hash256;
using ChunkId = Hash256;

/// 8-byte shared-randomness value bound into every chunk proof.
using Nonce = FixedBytes<8, NonceTag>;

inline constexpr std::size_t kMaxChunkSize = 4096;

struct FixedBytesHash {
    template <std::size_t N, typename Tag>
    std::size_t operator()(const FixedBytes<N, Tag>& v) const noexcept {
        if constexpr (N >= 8) {
            return static_cast<std::size_t>(v.prefix64());
        } else {
            std::uint64_t x = 0;
            std::memcpy(&x, v.bytes.data(), N);
            return static_cast<std::size_t>(x);
        }
    }
};

/// Lowest address (all zero bytes) and highest address (all 0xFF).
inline Address min_address() { return Address::filled(0x00); }
inline Address max_address() { return Address::filled(0xFF); }

// Little-endian helpers for the wire formats.
inline void put_u8(Bytes& out, std::uint8_t v) { out.push_back(v); }

template <typename T>
inline void put_le(Bytes& out, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<Byte>(v >> (8 * i)));
}

inline void put_bytes(Bytes& out, ByteView v) { out.insert(out.end(), v.begin(), v.end()); }

/// Raised by every decoder in the project on malformed input.
class DecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bounds-checked little-endian cursor over an input buffer.
class Reader {
public:
    explicit Reader(ByteView data) : data_(data) {}

    [[nodiscard]] std::size_t remaining() const noexcept { return data_.size() - pos_; }
    [[nodiscard]] std::size_t position() const noexcept { return pos_; }

    ByteView take(std::size_t n) {
        if (n > remaining()) throw DecodeError("truncated input");
        ByteView v = data_.subspan(pos_, n);
        pos_ += n;
        return v;
    }

    std::uint8_t u8() { return take(1)[0]; }

    template <typename T>
    T le() {
        ByteView v = take(sizeof(T));
        T out = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) out |= static_cast<T>(static_cast<T>(v[i]) << (8 * i));
        return out;
    }

    template <typename Fixed>
    Fixed fixed() {
        return Fixed::from_span(take(Fixed::size));
    }

    void expect_end() const {
        if (remaining() != 0) throw DecodeError("trailing bytes after message");
    }

private:
    ByteView data_;
    std::size_t pos_ = 0;
};

}  // namespace snips

template <std::size_t N, typename Tag>
struct std::hash<snips::FixedBytes<N, Tag>> {
    std::size_t operator()(const snips::FixedBytes<N, Tag>& v) const noexcept { return snips::FixedBytesHash{}(v); }
};
