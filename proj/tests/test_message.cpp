#include <doctest.h>

#include <random>

#include "snips/message.hpp"
#include "support.hpp"

using namespace snips;
using testing_support::chunks;
using testing_support::random_digest;
using testing_support::signer;
using testing_support::store_of;

namespace {

std::shared_ptr<const StorageProof> make_proof(std::size_t n, std::uint64_t seed) {
    ChunkProofCache cache;
    auto b = create_proof(store_of(chunks(n, seed)), beacon_nonce(seed), min_address(), max_address(), cache,
                          *signer(seed));
    return std::make_shared<const StorageProof>(std::move(b.proof));
}

Nonce random_nonce(std::mt19937_64& rng) {
    Nonce n;
    for (auto& b : n.bytes) b = static_cast<Byte>(rng());
    return n;
}

}  // namespace

TEST_CASE("encoded sizes follow the wire layout") {
    const Nonce nonce = beacon_nonce(1);
    CHECK(encode(NewProof{nonce, std::pair{min_address(), max_address()}}).size() == 1 + 8 + 32 + 32);
    CHECK(encode(NewProof{nonce, std::nullopt}).size() == 1 + 8);
    CHECK(encode(UploadDone{}).size() == 1);
    CHECK(encode(UploadDone{}) == Bytes{6});

    for (std::uint32_t n : {0u, 1u, 3u, 8u, 9u, 2560u}) {
        const Bytes wire = encode(Select{nonce, IndexBitVector(n)});
        CHECK(wire.size() == 1 + 8 + 4 + (n + 7) / 8);
    }

    const Chunk c(Bytes(4096, 7));
    CHECK(encode(Upload{c}).size() == 1 + 2 + 4096);
    CHECK(payload_size(Upload{c}) == 4096);
    CHECK(payload_size(UploadDone{}) == 0);

    for (std::size_t n : {0u, 1u, 100u}) {
        const auto p = make_proof(n, 40 + n);
        REQUIRE(p->checksum.has_value());
        CHECK(encode(Prove{p}).size() == 1 + 8 + 32 + 32 + 4 + p->mphf_bytes.size() + 97 + 33);
        auto bare = std::make_shared<StorageProof>(*p);
        bare->checksum.reset();
        CHECK(encode(Prove{bare}).size() == 1 + 8 + 32 + 32 + 4 + p->mphf_bytes.size() + 97);
    }
}

TEST_CASE("select bit layout") {
    const std::vector<std::uint64_t> two{2};
    const IndexBitVector v = IndexBitVector::from_indices(3, two);
    REQUIRE(v.bytes().size() == 1);
    CHECK(v.bytes()[0] == 0b010);

    const std::vector<std::uint64_t> many{1, 9, 16};
    const IndexBitVector w = IndexBitVector::from_indices(16, many);
    CHECK(w.bytes() == Bytes{0x01, 0x81});
    CHECK(w.count() == 3);
    CHECK(w.indices() == many);
    CHECK(w.test(9));
    CHECK_FALSE(w.test(10));
    CHECK_FALSE(w.test(0));
    CHECK_FALSE(w.test(17));

    IndexBitVector x(4);
    CHECK_THROWS_AS(x.set(0), std::out_of_range);
    CHECK_THROWS_AS(x.set(5), std::out_of_range);
}

TEST_CASE("decode rejects malformed input") {
    CHECK_THROWS_AS(decode(Bytes{}), DecodeError);
    CHECK_THROWS_AS(decode(Bytes{0}), DecodeError);
    CHECK_THROWS_AS(decode(Bytes{7}), DecodeError);
    CHECK_THROWS_AS(decode(Bytes{6, 0}), DecodeError);

    const Bytes sel = encode(Select{beacon_nonce(1), IndexBitVector(20)});
    CHECK_THROWS_AS(decode(ByteView(sel.data(), sel.size() - 1)), DecodeError);
    Bytes longer = sel;
    longer.push_back(0);
    CHECK_THROWS_AS(decode(longer), DecodeError);
    Bytes wrong_len = sel;
    wrong_len[9] = 30;  // header says 30 bits, 3 bytes follow
    CHECK_THROWS_AS(decode(wrong_len), DecodeError);
    Bytes padding = sel;
    padding.back() = 0x80;  // bit 24 of a 20-bit vector
    CHECK_THROWS_AS(decode(padding), DecodeError);

    Bytes empty_upload{5, 0, 0};
    CHECK_THROWS_AS(decode(empty_upload), DecodeError);

    const Bytes prove = encode(Prove{make_proof(30, 3)});
    for (std::size_t len = 0; len < prove.size(); len += 13)
        CHECK_THROWS_AS(decode(ByteView(prove.data(), len)), DecodeError);
    Bytes bad_marker = prove;
    bad_marker[bad_marker.size() - 33] = 0x02;
    CHECK_THROWS_AS(decode(bad_marker), DecodeError);
}

TEST_CASE("decoded proofs verify and tampered ones do not") {
    const auto p = make_proof(64, 4);
    const Bytes wire = encode(Prove{p});
    const auto back = std::get<Prove>(decode(wire)).proof;
    CHECK(back->verify());
    CHECK(back->signer == p->signer);
    CHECK(back->mphf_bytes == p->mphf_bytes);

    Bytes tampered = wire;
    tampered[3] ^= 1;  // inside the nonce
    CHECK_FALSE(std::get<Prove>(decode(tampered)).proof->verify());
}

TEST_CASE("random messages round-trip, 10^5 cases") {
    std::mt19937_64 rng(2024);
    std::vector<std::shared_ptr<const StorageProof>> proofs;
    for (std::size_t i = 0; i < 12; ++i) proofs.push_back(make_proof(i * 17, 100 + i));

    std::size_t failures = 0;
    for (int i = 0; i < 100000; ++i) {
        Message m;
        switch (rng() % 6) {
            case 0:
                m = NewProof{random_nonce(rng), std::pair{random_digest(rng), random_digest(rng)}};
                break;
            case 1:
                m = NewProof{random_nonce(rng), std::nullopt};
                break;
            case 2:
                m = Prove{proofs[rng() % proofs.size()]};
                break;
            case 3: {
                const auto len = static_cast<std::uint32_t>(rng() % 3000);
                IndexBitVector v(len);
                for (std::uint32_t k = 0; len > 0 && k < 10; ++k) v.set(1 + rng() % len);
                m = Select{random_nonce(rng), v};
                break;
            }
            case 4: {
                Bytes data(1 + rng() % 4096);
                for (auto& b : data) b = static_cast<Byte>(rng());
                m = Upload{Chunk(std::move(data))};
                break;
            }
            default:
                m = UploadDone{};
        }
        const Bytes wire = encode(m);
        const Message back = decode(wire);
        bool same = back.index() == m.index() && encode(back) == wire;
        if (const auto* s = std::get_if<Select>(&m)) same = same && std::get<Select>(back).missing == s->missing;
        if (const auto* u = std::get_if<Upload>(&m)) same = same && std::get<Upload>(back).chunk.id() == u->chunk.id();
        if (const auto* n = std::get_if<NewProof>(&m)) {
            const auto& nb = std::get<NewProof>(back);
            same = same && nb.nonce == n->nonce && nb.range == n->range;
        }
        failures += same ? 0 : 1;
    }
    CHECK(failures == 0);
}

TEST_CASE("random bytes never crash the decoder") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 20000; ++i) {
        Bytes junk(rng() % 200);
        for (auto& b : junk) b = static_cast<Byte>(rng());
        if (!junk.empty()) junk[0] = static_cast<Byte>(1 + rng() % 6);
        try {
            (void)decode(junk);
        } catch (const DecodeError&) {
        } catch (const ChunkSizeError&) {
            FAIL("chunk size errors must surface as decode errors");
        }
    }
}
