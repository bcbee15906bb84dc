#include <doctest.h>

#include <random>

#include "snips/beacon.hpp"
#include "snips/peer.hpp"
#include "support.hpp"

using namespace snips;
using testing_support::chunks;
using testing_support::of_kind;
using testing_support::signer;
using testing_support::store_of;

namespace {

Peer make_peer(std::uint64_t id, const std::vector<Chunk>& cs, PeerConfig config = {}) {
    return Peer(signer(id), config, store_of(cs));
}

/// Beacon proof from `prover` delivered to `verifier`.
std::vector<Outgoing> deliver_beacon(Peer& prover, Peer& verifier, std::uint64_t round) {
    const Address to[] = {verifier.address()};
    auto out = prover.on_beacon(round, to);
    REQUIRE(out.size() == 1);
    return verifier.handle(prover.address(), out[0].message);
}

/// Run the Select/Upload exchange for every Select in `out` sent to `prover`.
std::vector<Outgoing> answer_selects(Peer& prover, Peer& verifier, const std::vector<Outgoing>& out) {
    std::vector<Outgoing> next;
    for (const Select& s : of_kind<Select>(out)) {
        for (const Outgoing& o : prover.on_select(verifier.address(), s)) {
            auto more = verifier.handle(prover.address(), o.message);
            next.insert(next.end(), more.begin(), more.end());
        }
    }
    return next;
}

}  // namespace

TEST_CASE("beacon proof fans out to every other neighbor") {
    Peer a = make_peer(1, chunks(10, 1));
    std::vector<Address> hood{a.address()};
    for (std::uint64_t i = 2; i <= 8; ++i) hood.push_back(signer(i)->address());
    const auto out = a.on_beacon(1, hood);
    CHECK(out.size() == 7);
    for (const auto& o : out) {
        CHECK(o.to != a.address());
        CHECK(std::holds_alternative<Prove>(o.message));
    }
}

TEST_CASE("repeated NewProof for one nonce reuses the cached proof") {
    Peer a = make_peer(1, chunks(100, 2));
    const Address b = signer(2)->address();
    const auto first = a.on_new_proof(b, NewProof{beacon_nonce(1), std::nullopt});
    const std::uint64_t hashed = a.cache().computed();
    const auto second = a.on_new_proof(b, NewProof{beacon_nonce(1), std::nullopt});
    CHECK(a.counters().proofs_created == 1);
    CHECK(a.counters().proofs_served_from_cache == 1);
    CHECK(a.cache().computed() == hashed);
    CHECK(std::get<Prove>(first[0].message).proof == std::get<Prove>(second[0].message).proof);
}

TEST_CASE("NewProof over an empty range proves zero chunks") {
    Peer a = make_peer(1, chunks(100, 3));
    Address lo = min_address(), hi = min_address();
    hi.bytes[31] = 1;
    const auto out = a.on_new_proof(signer(2)->address(), NewProof{beacon_nonce(1), std::pair{lo, hi}});
    REQUIRE(out.size() == 1);
    const auto& proof = std::get<Prove>(out[0].message).proof;
    CHECK(proof->size() == 0);
    CHECK(proof->start == lo);
    CHECK(proof->end == hi);
}

TEST_CASE("identical stores need no Select") {
    const auto cs = chunks(300, 4);
    Peer a = make_peer(1, cs), b = make_peer(2, cs);
    CHECK(deliver_beacon(a, b, 1).empty());
    CHECK(b.counters().proofs_verified == 1);
}

TEST_CASE("one extra chunk gives a one-bit Select") {
    auto cs = chunks(300, 5);
    Peer a = make_peer(1, cs);
    cs.pop_back();
    Peer b = make_peer(2, cs);
    const auto out = deliver_beacon(a, b, 1);
    const auto selects = of_kind<Select>(out);
    REQUIRE(selects.size() == 1);
    CHECK(selects[0].missing.count() == 1);
    CHECK(selects[0].missing.length() == 300);
}

TEST_CASE("a replayed Prove produces nothing") {
    auto cs = chunks(50, 6);
    Peer a = make_peer(1, cs);
    cs.erase(cs.begin() + 40, cs.end());
    Peer b = make_peer(2, cs);
    const Address to[] = {b.address()};
    const auto prove = a.on_beacon(1, to);
    CHECK_FALSE(b.handle(a.address(), prove[0].message).empty());
    CHECK(b.handle(a.address(), prove[0].message).empty());
    CHECK(b.counters().replays_dropped == 1);
    CHECK(b.counters().proofs_verified == 1);
}

TEST_CASE("proofs with a bad signature or stale nonce are dropped") {
    Peer a = make_peer(1, chunks(20, 7));
    Peer b = make_peer(2, {});
    const Address to[] = {b.address()};
    const auto prove = a.on_beacon(1, to);
    // Claimed sender differs from the signer.
    CHECK(b.handle(signer(3)->address(), prove[0].message).empty());
    CHECK(b.counters().bad_signature == 1);

    Peer c = make_peer(3, chunks(20, 8));
    const auto far = c.on_beacon(50, to);
    CHECK(b.handle(c.address(), far[0].message).empty());
    CHECK(b.counters().unknown_nonce == 1);
}

TEST_CASE("Select handling on the prover") {
    const auto cs = chunks(3, 9);
    Peer a = make_peer(1, cs);
    const Address b = signer(2)->address();
    const Address to[] = {b};
    (void)a.on_beacon(1, to);
    const Nonce nonce = beacon_nonce(1);

    SUBCASE("bits {2,3} give two uploads and UploadDone") {
        const std::vector<std::uint64_t> idx{2, 3};
        const auto out = a.on_select(b, Select{nonce, IndexBitVector::from_indices(3, idx)});
        REQUIRE(out.size() == 3);
        CHECK(of_kind<Upload>(out).size() == 2);
        CHECK(std::holds_alternative<UploadDone>(out.back().message));
        CHECK(of_kind<Upload>(out)[0].chunk.id() == *a.reverse_map(nonce)->at(2));
        CHECK(of_kind<Upload>(out)[1].chunk.id() == *a.reverse_map(nonce)->at(3));
    }
    SUBCASE("zero bits give UploadDone only") {
        const auto out = a.on_select(b, Select{nonce, IndexBitVector(3)});
        REQUIRE(out.size() == 1);
        CHECK(std::holds_alternative<UploadDone>(out[0].message));
    }
    SUBCASE("bits past n are counted and skipped") {
        const std::vector<std::uint64_t> idx{1, 5};
        const auto out = a.on_select(b, Select{nonce, IndexBitVector::from_indices(6, idx)});
        CHECK(of_kind<Upload>(out).size() == 1);
        CHECK(a.counters().select_out_of_range == 1);
    }
    SUBCASE("replayed Select is dropped") {
        const std::vector<std::uint64_t> idx{1};
        const Select s{nonce, IndexBitVector::from_indices(3, idx)};
        CHECK(a.on_select(b, s).size() == 2);
        CHECK(a.on_select(b, s).empty());
        CHECK(a.counters().replays_dropped == 1);
    }
    SUBCASE("evicted nonce uploads nothing and is counted") {
        (void)a.on_beacon(2, to);
        (void)a.on_beacon(3, to);
        CHECK(a.reverse_map(nonce) == nullptr);
        const std::vector<std::uint64_t> idx{1, 2};
        const auto out = a.on_select(b, Select{nonce, IndexBitVector::from_indices(3, idx)});
        CHECK(of_kind<Upload>(out).empty());
        CHECK(a.counters().select_unknown_nonce == 1);
    }
}

TEST_CASE("upload acceptance") {
    auto cs = chunks(20, 10);
    Peer a = make_peer(1, cs);
    const Chunk absent = cs.back();
    cs.pop_back();
    Peer b = make_peer(2, cs);
    const auto sel = deliver_beacon(a, b, 1);
    REQUIRE(of_kind<Select>(sel).size() == 1);

    SUBCASE("the requested chunk is accepted") {
        CHECK(b.on_upload(a.address(), Upload{absent}));
        CHECK(b.store().size() == 20);
        CHECK(b.store().contains(absent.id()));
    }
    SUBCASE("a chunk that was not requested is rejected") {
        CHECK_FALSE(b.on_upload(a.address(), Upload{cs[0]}));
        CHECK(b.counters().uploads_rejected == 1);
        CHECK(b.misbehavior(a.address()) == 1);
        CHECK(b.store().size() == 19);
    }
    SUBCASE("a foreign chunk is rejected") {
        CHECK_FALSE(b.on_upload(a.address(), Upload{chunks(1, 999)[0]}));
        CHECK(b.store().size() == 19);
    }
    SUBCASE("uploads from a peer without an open request are rejected") {
        CHECK_FALSE(b.on_upload(signer(3)->address(), Upload{absent}));
        CHECK(b.misbehavior(signer(3)->address()) == 1);
    }
    SUBCASE("the full exchange converges") {
        const auto after = answer_selects(a, b, sel);
        CHECK(after.empty());
        CHECK(b.store() == a.store());
        CHECK_FALSE(b.in_flight_sender().has_value());
    }
}

TEST_CASE("upload outside the verifier's neighborhood is rejected") {
    PeerConfig cfg;
    cfg.neighborhood_bits = 4;
    Peer b(signer(2), cfg, {});
    // A chunk whose first nibble differs from the verifier's address.
    Chunk outside = chunks(1, 11)[0];
    for (std::uint64_t s = 12; in_neighborhood(b.address(), outside.id(), 4); ++s) outside = chunks(1, s)[0];
    Peer a = make_peer(1, {outside});
    const auto sel = deliver_beacon(a, b, 1);
    REQUIRE(of_kind<Select>(sel).size() == 1);
    CHECK_FALSE(b.on_upload(a.address(), Upload{outside}));
    CHECK(b.store().empty());
}

TEST_CASE("collision handling") {
    const Nonce nonce = beacon_nonce(1);
    // Look for stores where the verifier has both missing indices and a
    // collision for the round-1 proof.
    for (std::uint64_t seed = 1; seed < 500; ++seed) {
        const auto theirs = chunks(40, seed * 2);
        const auto mine = chunks(120, seed * 2 + 1);
        ChunkProofCache pc, vc;
        const auto b = create_proof(store_of(theirs), nonce, min_address(), max_address(), pc, *signer(1));
        const auto r = find_missing(store_of(mine), b.proof, vc);
        if (!r.collision || r.missing.empty()) continue;

        Peer a = make_peer(1, theirs), v = make_peer(2, mine);
        const auto sel = deliver_beacon(a, v, 1);
        REQUIRE(of_kind<Select>(sel).size() == 1);
        CHECK(of_kind<NewProof>(sel).empty());
        const auto after = answer_selects(a, v, sel);
        const auto np = of_kind<NewProof>(after);
        REQUIRE(np.size() == 1);
        CHECK(np[0].nonce == beacon_nonce(2));
        CHECK_FALSE(np[0].range.has_value());
        CHECK(v.counters().new_proofs_sent == 1);
        return;
    }
    FAIL("no seed produced a collision with missing indices");
}

TEST_CASE("collision with nothing missing asks for a new proof at once") {
    // One prover chunk and many foreign verifier chunks: index 1 is hit repeatedly.
    const auto theirs = chunks(1, 5);
    const auto mine = chunks(200, 6);
    Peer a = make_peer(1, theirs), v = make_peer(2, mine);
    const auto out = deliver_beacon(a, v, 1);
    CHECK(of_kind<Select>(out).empty());
    REQUIRE(of_kind<NewProof>(out).size() == 1);
    CHECK(of_kind<NewProof>(out)[0].nonce == beacon_nonce(2));
}

TEST_CASE("no collision means no NewProof after UploadDone") {
    auto cs = chunks(30, 14);
    Peer a = make_peer(1, cs);
    cs.erase(cs.begin() + 25, cs.end());
    Peer b = make_peer(2, cs);
    const auto after = answer_selects(a, b, deliver_beacon(a, b, 1));
    CHECK(of_kind<NewProof>(after).empty());
}

TEST_CASE("unsolicited UploadDone is counted and ignored") {
    Peer b = make_peer(2, chunks(5, 15));
    CHECK(b.on_upload_done(signer(1)->address()).empty());
    CHECK(b.counters().unsolicited_upload_done == 1);
}

TEST_CASE("proofs from a second sender wait for the open pipeline") {
    auto shared = chunks(50, 16);
    const auto extra_a = chunks(5, 17);
    const auto extra_c = chunks(5, 18);
    auto sa = shared, sc = shared;
    sa.insert(sa.end(), extra_a.begin(), extra_a.end());
    sc.insert(sc.end(), extra_c.begin(), extra_c.end());
    Peer a = make_peer(1, sa), c = make_peer(3, sc), b = make_peer(2, shared);

    const auto sel_a = deliver_beacon(a, b, 1);
    REQUIRE(of_kind<Select>(sel_a).size() == 1);
    CHECK(b.in_flight_sender() == a.address());

    // c's proof arrives while a's pipeline is open.
    CHECK(deliver_beacon(c, b, 1).empty());
    CHECK(b.queued_proofs() == 1);
    CHECK(b.counters().proofs_verified == 1);

    // A NewProof from c is also held back.
    CHECK(b.on_new_proof(c.address(), NewProof{beacon_nonce(2), std::nullopt}).empty());
    CHECK(b.counters().new_proofs_deferred == 1);

    std::vector<Outgoing> tail;
    for (const Outgoing& o : a.on_select(b.address(), of_kind<Select>(sel_a)[0])) tail = b.handle(a.address(), o.message);
    // UploadDone: the deferred NewProof is answered, then c's proof is evaluated.
    CHECK(b.store().size() == 55);
    REQUIRE(tail.size() == 2);
    CHECK(std::holds_alternative<Prove>(tail[0].message));
    CHECK(tail[0].to == c.address());
    CHECK(std::get<Prove>(tail[0].message).proof->size() == 55);
    CHECK(std::holds_alternative<Select>(tail[1].message));
    CHECK(tail[1].to == c.address());
    CHECK(std::get<Select>(tail[1].message).missing.count() == 5);
    CHECK(b.in_flight_sender() == c.address());
}

TEST_CASE("checksum mismatch rolls back the uploads of a pipeline") {
    auto cs = chunks(30, 19);
    Peer a = make_peer(1, cs);
    cs.erase(cs.begin() + 27, cs.end());
    Peer b = make_peer(2, cs);
    const auto sel = deliver_beacon(a, b, 1);
    REQUIRE(of_kind<Select>(sel).size() == 1);

    // A forged proof with the same MPHF but a wrong checksum.
    const auto real = a.proof_for_nonce(beacon_nonce(1));
    auto forged = std::make_shared<StorageProof>(*real);
    forged->checksum->bytes[0] ^= 1;
    Peer v = make_peer(2, cs);
    // Re-sign under a key whose address matches the claimed sender.
    const auto mallory = signer(1);
    forged->signature = mallory->sign(forged->signing_payload());
    const auto sel2 = v.handle(a.address(), Prove{forged});
    REQUIRE(of_kind<Select>(sel2).size() == 1);
    std::vector<Outgoing> tail;
    for (const Outgoing& o : a.on_select(v.address(), of_kind<Select>(sel2)[0])) tail = v.handle(a.address(), o.message);
    CHECK(v.counters().uploads_accepted == 3);
    CHECK(v.counters().checksum_mismatch == 1);
    CHECK(v.counters().rolled_back == 3);
    CHECK(v.store().size() == 27);
    CHECK(of_kind<NewProof>(tail).size() == 1);
}

TEST_CASE("beacon") {
    CHECK(beacon_nonce(5) == beacon_nonce(5));
    CHECK(Beacon{}.derive(5) == beacon_nonce(5));
    for (std::uint64_t r = 0; r < 1000; ++r) CHECK(beacon_nonce(r) != beacon_nonce(r + 1));
    CHECK(Beacon::interval_for(86400, 12) == 7200);
    CHECK(Beacon{}.block_interval == 7200);
    CHECK(Beacon{}.triggers(14400));
    CHECK_FALSE(Beacon{}.triggers(14401));
    CHECK(Beacon{}.round_of_block(14401) == 2);

    // First 8 bytes of SHA-256 over the big-endian round.
    Bytes be(8, 0);
    be[7] = 5;
    const Hash256 h = sha256(be);
    CHECK(std::equal(h.bytes.begin(), h.bytes.begin() + 8, beacon_nonce(5).bytes.begin()));
}

TEST_CASE("an incomplete upload set is rolled back") {
    auto cs = chunks(30, 20);
    Peer a = make_peer(1, cs);
    cs.erase(cs.begin() + 26, cs.end());
    Peer b = make_peer(2, cs);
    const auto sel = deliver_beacon(a, b, 1);
    REQUIRE(of_kind<Select>(sel).size() == 1);
    const auto uploads = of_kind<Upload>(a.on_select(b.address(), of_kind<Select>(sel)[0]));
    REQUIRE(uploads.size() == 4);
    // Only three of the four requested chunks arrive.
    for (std::size_t i = 0; i < 3; ++i) CHECK(b.on_upload(a.address(), uploads[i]));
    CHECK(b.store().size() == 29);
    const auto tail = b.on_upload_done(a.address());
    CHECK(b.store().size() == 26);
    CHECK(b.counters().incomplete_pipelines == 1);
    CHECK(b.counters().rolled_back == 3);
    CHECK(of_kind<NewProof>(tail).size() == 1);
}
