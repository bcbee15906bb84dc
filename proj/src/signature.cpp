#include "snips/signature.hpp"

#include <openssl/evp.h>

#include <stdexcept>

#include "snips/hash.hpp"

namespace snips {
namespace {

constexpr std::size_t kSigOffset = 1;
constexpr std::size_t kSigBytes = 64;
constexpr std::size_t kKeyOffset = kSigOffset + kSigBytes;

struct PkeyDeleter {
    void operator()(EVP_PKEY* k) const { EVP_PKEY_free(k); }
};
struct MdCtxDeleter {
    void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};

}  // namespace

Ed25519Signer::Ed25519Signer(const Hash256& seed) {
    EVP_PKEY* key = EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed.data(), 32);
    if (key == nullptr) throw std::runtime_error("ed25519 key derivation failed");
    std::size_t len = 32;
    if (EVP_PKEY_get_raw_public_key(key, public_key_.data(), &len) != 1 || len != 32) {
        EVP_PKEY_free(key);
        throw std::runtime_error("ed25519 public key export failed");
    }
    key_ = key;
    address_ = sha256(public_key_.view());
}

Ed25519Signer Ed25519Signer::from_u64(std::uint64_t seed) {
    Bytes material;
    put_bytes(material, ByteView(reinterpret_cast<const Byte*>("snips-identity"), 14));
    put_le<std::uint64_t>(material, seed);
    return Ed25519Signer(sha256(material));
}

Ed25519Signer::~Ed25519Signer() { EVP_PKEY_free(static_cast<EVP_PKEY*>(key_)); }

Ed25519Signer::Ed25519Signer(Ed25519Signer&& other) noexcept
    : key_(other.key_), public_key_(other.public_key_), address_(other.address_) {
    other.key_ = nullptr;
}

Ed25519Signer& Ed25519Signer::operator=(Ed25519Signer&& other) noexcept {
    if (this != &other) {
        EVP_PKEY_free(static_cast<EVP_PKEY*>(key_));
        key_ = other.key_;
        public_key_ = other.public_key_;
        address_ = other.address_;
        other.key_ = nullptr;
    }
    return *this;
}

SignatureField Ed25519Signer::sign(ByteView message) const {
    std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx(EVP_MD_CTX_new());
    SignatureField field{};
    field[0] = static_cast<Byte>(SignatureScheme::ed25519);
    std::size_t siglen = kSigBytes;
    if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, static_cast<EVP_PKEY*>(key_)) != 1 ||
        EVP_DigestSign(ctx.get(), field.data() + kSigOffset, &siglen, message.data(), message.size()) != 1 ||
        siglen != kSigBytes)
        throw std::runtime_error("ed25519 signing failed");
    std::copy(public_key_.bytes.begin(), public_key_.bytes.end(), field.begin() + kKeyOffset);
    return field;
}

Address signer_address(const SignatureField& field) {
    return sha256(ByteView(field.data() + kKeyOffset, 32));
}

bool verify_signature(const SignatureField& field, ByteView message) {
    if (field[0] != static_cast<Byte>(SignatureScheme::ed25519)) return false;
    std::unique_ptr<EVP_PKEY, PkeyDeleter> key(
        EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, field.data() + kKeyOffset, 32));
    if (!key) return false;
    std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx(EVP_MD_CTX_new());
    if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1) return false;
    return EVP_DigestVerify(ctx.get(), field.data() + kSigOffset, kSigBytes, message.data(), message.size()) == 1;
}

}  // namespace snips
