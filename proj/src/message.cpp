#include "snips/message.hpp"

#include <bit>

namespace snips {
namespace {

constexpr Byte kChecksumMarker = 0x01;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

IndexBitVector IndexBitVector::from_indices(std::uint32_t length, std::span<const std::uint64_t> indices) {
    IndexBitVector v(length);
    for (std::uint64_t idx : indices) v.set(idx);
    return v;
}

IndexBitVector IndexBitVector::from_bytes(std::uint32_t length, ByteView bytes) {
    if (bytes.size() != (static_cast<std::size_t>(length) + 7) / 8) throw DecodeError("bit vector length mismatch");
    IndexBitVector v;
    v.length_ = length;
    v.bytes_.assign(bytes.begin(), bytes.end());
    if (length % 8 != 0 && (v.bytes_.back() >> (length % 8)) != 0) throw DecodeError("bit vector padding not zero");
    return v;
}

void IndexBitVector::set(std::uint64_t index) {
    if (index == 0 || index > length_) throw std::out_of_range("bit vector index out of range");
    const std::uint64_t bit = index - 1;
    bytes_[bit / 8] = static_cast<Byte>(bytes_[bit / 8] | (1U << (bit % 8)));
}

bool IndexBitVector::test(std::uint64_t index) const noexcept {
    if (index == 0 || index > length_) return false;
    const std::uint64_t bit = index - 1;
    return (bytes_[bit / 8] >> (bit % 8)) & 1U;
}

std::size_t IndexBitVector::count() const noexcept {
    std::size_t c = 0;
    for (Byte b : bytes_) c += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(b)));
    return c;
}

std::vector<std::uint64_t> IndexBitVector::indices() const {
    std::vector<std::uint64_t> out;
    for (std::size_t byte = 0; byte < bytes_.size(); ++byte) {
        unsigned b = bytes_[byte];
        while (b != 0) {
            const int bit = std::countr_zero(b);
            out.push_back(byte * 8 + static_cast<std::size_t>(bit) + 1);
            b &= b - 1;
        }
    }
    return out;
}

Bytes encode(const Message& message) {
    Bytes out;
    std::visit(Overloaded{
                   [&](const NewProof& m) {
                       put_u8(out, static_cast<std::uint8_t>(m.range ? MessageTag::new_proof : MessageTag::new_proof_nonce));
                       put_bytes(out, m.nonce.view());
                       if (m.range) {
                           put_bytes(out, m.range->first.view());
                           put_bytes(out, m.range->second.view());
                       }
                   },
                   [&](const Prove& m) {
                       const StorageProof& p = *m.proof;
                       out.reserve(1 + 8 + 64 + 4 + p.mphf_bytes.size() + kSignatureFieldSize + 33);
                       put_u8(out, static_cast<std::uint8_t>(MessageTag::prove));
                       put_bytes(out, p.nonce.view());
                       put_bytes(out, p.start.view());
                       put_bytes(out, p.end.view());
                       put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.mphf_bytes.size()));
                       put_bytes(out, p.mphf_bytes);
                       put_bytes(out, ByteView(p.signature.data(), p.signature.size()));
                       if (p.checksum) {
                           put_u8(out, kChecksumMarker);
                           put_bytes(out, p.checksum->view());
                       }
                   },
                   [&](const Select& m) {
                       put_u8(out, static_cast<std::uint8_t>(MessageTag::select));
                       put_bytes(out, m.nonce.view());
                       put_le<std::uint32_t>(out, m.missing.length());
                       put_bytes(out, m.missing.bytes());
                   },
                   [&](const Upload& m) {
                       put_u8(out, static_cast<std::uint8_t>(MessageTag::upload));
                       put_le<std::uint16_t>(out, static_cast<std::uint16_t>(m.chunk.size()));
                       put_bytes(out, m.chunk.data());
                   },
                   [&](const UploadDone&) { put_u8(out, static_cast<std::uint8_t>(MessageTag::upload_done)); },
               },
               message);
    return out;
}

Message decode(ByteView bytes) {
    Reader in(bytes);
    const auto tag = static_cast<MessageTag>(in.u8());
    switch (tag) {
        case MessageTag::new_proof: {
            NewProof m;
            m.nonce = in.fixed<Nonce>();
            Address start = in.fixed<Address>();
            Address end = in.fixed<Address>();
            m.range.emplace(start, end);
            in.expect_end();
            return m;
        }
        case MessageTag::new_proof_nonce: {
            NewProof m;
            m.nonce = in.fixed<Nonce>();
            in.expect_end();
            return m;
        }
        case MessageTag::prove: {
            auto p = std::make_shared<StorageProof>();
            p->nonce = in.fixed<Nonce>();
            p->start = in.fixed<Address>();
            p->end = in.fixed<Address>();
            const std::uint32_t len = in.le<std::uint32_t>();
            const ByteView mphf = in.take(len);
            p->mphf_bytes.assign(mphf.begin(), mphf.end());
            p->mphf = Mphf::deserialize(p->mphf_bytes);
            const ByteView sig = in.take(kSignatureFieldSize);
            std::copy(sig.begin(), sig.end(), p->signature.begin());
            p->signer = signer_address(p->signature);
            if (in.remaining() != 0) {
                if (in.u8() != kChecksumMarker) throw DecodeError("prove: bad checksum marker");
                p->checksum = in.fixed<Hash256>();
            }
            in.expect_end();
            return Prove{std::move(p)};
        }
        case MessageTag::select: {
            Select m;
            m.nonce = in.fixed<Nonce>();
            const std::uint32_t bits = in.le<std::uint32_t>();
            m.missing = IndexBitVector::from_bytes(bits, in.take(in.remaining()));
            return m;
        }
        case MessageTag::upload: {
            const std::uint16_t len = in.le<std::uint16_t>();
            const ByteView data = in.take(len);
            in.expect_end();
            if (len == 0 || len > kMaxChunkSize) throw DecodeError("upload: bad chunk length");
            return Upload{Chunk(Bytes(data.begin(), data.end()))};
        }
        case MessageTag::upload_done:
            in.expect_end();
            return UploadDone{};
    }
    throw DecodeError("unknown message tag");
}

std::size_t payload_size(const Message& message) {
    if (const auto* up = std::get_if<Upload>(&message)) return up->chunk.size();
    return 0;
}

std::string_view message_name(const Message& message) {
    return std::visit(Overloaded{
                          [](const NewProof&) { return std::string_view("NewProof"); },
                          [](const Prove&) { return std::string_view("Prove"); },
                          [](const Select&) { return std::string_view("Select"); },
                          [](const Upload&) { return std::string_view("Upload"); },
                          [](const UploadDone&) { return std::string_view("UploadDone"); },
                      },
                      message);
}

}  // namespace snips
