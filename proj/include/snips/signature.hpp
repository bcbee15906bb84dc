#pragma once

#include <array>
#include <cstdint>
#include <memory>

#include "snips/types.hpp"

namespace snips {

/// Wire width of a proof signature.
inline constexpr std::size_t kSignatureFieldSize = 97;

/// Layout of the 97-byte field:
///   [0]      scheme tag
///   [1..65)  signature bytes (zero padded for shorter schemes)
///   [65..97) public key of the signer
/// The signer's overlay address is SHA-256 of that public key.
using SignatureField = std::array<Byte, kSignatureFieldSize>;

enum class SignatureScheme : std::uint8_t {
    none = 0,
    ed25519 = 1,
};

class Signer {
public:
    virtual ~Signer() = default;
    [[nodiscard]] virtual SignatureField sign(ByteView message) const = 0;
    [[nodiscard]] virtual const Address& address() const noexcept = 0;
};

/// Ed25519 identity derived deterministically from a 32-byte seed.
class Ed25519Signer final : public Signer {
public:
    explicit Ed25519Signer(const Hash256& seed);
    static Ed25519Signer from_u64(std::uint64_t seed);

    ~Ed25519Signer() override;
    Ed25519Signer(Ed25519Signer&&) noexcept;
    Ed25519Signer& operator=(Ed25519Signer&&) noexcept;

    [[nodiscard]] SignatureField sign(ByteView message) const override;
    [[nodiscard]] const Address& address() const noexcept override { return address_; }
    [[nodiscard]] const Hash256& public_key() const noexcept { return public_key_; }

private:
    void* key_ = nullptr;
    Hash256 public_key_;
    Address address_;
};

/// Address embedded in a signature field (hash of its public-key bytes).
Address signer_address(const SignatureField& field);

/// Check `field` over `message` for the scheme named by its tag byte.
bool verify_signature(const SignatureField& field, ByteView message);

}  // namespace snips
