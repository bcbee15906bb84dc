#include <doctest.h>

#include <algorithm>
#include <bit>
#include <numeric>
#include <random>
#include <set>

#include "snips/mphf.hpp"
#include "support.hpp"

using namespace snips;
using testing_support::random_digest;

namespace {

std::vector<Hash256> random_keys(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Hash256> keys(n);
    for (auto& k : keys) k = random_digest(rng);
    return keys;
}

bool is_permutation_of_1_to_n(const Mphf& m, const std::vector<Hash256>& keys) {
    std::vector<char> seen(keys.size() + 1, 0);
    for (const auto& k : keys) {
        const std::uint64_t idx = m.find(k);
        if (idx == 0 || idx > keys.size() || seen[idx]) return false;
        seen[idx] = 1;
    }
    return true;
}

}  // namespace

TEST_CASE("empty set answers 0 for every query") {
    const Mphf m = Mphf::build({});
    CHECK(m.size() == 0);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 100; ++i) CHECK(m.find(random_digest(rng)) == 0);
}

TEST_CASE("singleton maps to index 1") {
    const auto keys = random_keys(1, 2);
    CHECK(Mphf::build(keys).find(keys[0]) == 1);
}

TEST_CASE("three keys form a permutation of 1..3") {
    const auto keys = random_keys(3, 3);
    const Mphf m = Mphf::build(keys);
    std::set<std::uint64_t> got;
    for (const auto& k : keys) got.insert(m.find(k));
    CHECK(got == std::set<std::uint64_t>{1, 2, 3});
}

TEST_CASE("member queries are a bijection onto [1, n]") {
    for (std::size_t n : {2u, 7u, 64u, 65u, 511u, 512u, 513u, 5000u, 40000u}) {
        const auto keys = random_keys(n, n);
        CHECK_MESSAGE(is_permutation_of_1_to_n(Mphf::build(keys), keys), "n=" << n);
    }
}

TEST_CASE("non-member answers stay within [0, n]") {
    const auto keys = random_keys(1000, 4);
    const Mphf m = Mphf::build(keys);
    std::mt19937_64 rng(99);
    std::size_t zeros = 0;
    for (int i = 0; i < 20000; ++i) {
        const std::uint64_t idx = m.find(random_digest(rng));
        CHECK(idx <= 1000);
        zeros += idx == 0 ? 1 : 0;
    }
    // Some non-members are rejected outright, most are not.
    CHECK(zeros > 0);
    CHECK(zeros < 20000);
}

TEST_CASE("member indices are stable across calls") {
    const auto keys = random_keys(300, 5);
    const Mphf m = Mphf::build(keys);
    for (const auto& k : keys) CHECK(m.find(k) == m.find(k));
}

TEST_CASE("parallel build is bit-identical to the serial reference") {
    for (std::size_t n : {0u, 1u, 100u, 10000u, 60000u}) {
        const auto keys = random_keys(n, 10 + n);
        const Bytes serial = Mphf::build_serial(keys).serialize();
        for (int threads : {1, 2, 3, 8}) CHECK(Mphf::build(keys, MphfBuildOptions{2.0, threads}).serialize() == serial);
    }
}

TEST_CASE("duplicate keys are rejected") {
    auto keys = random_keys(50, 6);
    keys.push_back(keys[17]);
    CHECK_THROWS_AS(Mphf::build(keys), DuplicateKeyError);
    CHECK_THROWS_AS(Mphf::build_serial(keys), DuplicateKeyError);
}

TEST_CASE("gamma must be at least 1") {
    const auto keys = random_keys(10, 7);
    CHECK_THROWS_AS(Mphf::build(keys, MphfBuildOptions{0.5, 0}), std::invalid_argument);
    CHECK_NOTHROW(Mphf::build(keys, MphfBuildOptions{1.0, 0}));
}

TEST_CASE("set bits across all levels equal n and the fallback is rarely used") {
    const auto keys = random_keys(20000, 8);
    const Mphf m = Mphf::build(keys);
    CHECK(m.fallback_count() == 0);
    CHECK(m.level_count() > 1);
    CHECK(m.level_count() <= Mphf::kMaxLevels);
}

TEST_CASE("size_bits: header-only at n=0, above the 1.44 floor, in band for large n") {
    const Mphf e2 = Mphf::build({}, MphfBuildOptions{2.0, 0});
    const Mphf e3 = Mphf::build({}, MphfBuildOptions{3.0, 0});
    CHECK(e2.size_bits() == e3.size_bits());
    CHECK(e2.size_bits() == 8 * e2.serialize().size());

    const auto keys = random_keys(100000, 9);
    const Mphf m = Mphf::build(keys);
    const double bpk = static_cast<double>(m.size_bits()) / 100000.0;
    CHECK(bpk >= 1.44);
    CHECK(bpk >= 3.0);
    CHECK(bpk <= 4.5);
    // Serialized bytes plus 32-bit rank samples.
    const Bytes wire = m.serialize();
    CHECK(m.size_bits() >= 8 * wire.size());
    CHECK((m.size_bits() - 8 * wire.size()) % 32 == 0);
}

TEST_CASE("serialize round-trip preserves every answer") {
    for (std::size_t n : {0u, 1u, 10000u}) {
        const auto keys = random_keys(n, 20 + n);
        const Mphf m = Mphf::build(keys);
        const Mphf back = Mphf::deserialize(m.serialize());
        CHECK(back.size() == n);
        CHECK(back.serialize() == m.serialize());
        for (const auto& k : keys) CHECK(back.find(k) == m.find(k));
        std::mt19937_64 rng(n);
        for (int i = 0; i < 1000; ++i) {
            const Hash256 q = random_digest(rng);
            CHECK(back.find(q) == m.find(q));
        }
    }
}

TEST_CASE("fallback table survives serialization") {
    // gamma = 1 gives the longest cascade.
    const auto keys = random_keys(3000, 31);
    const Mphf m = Mphf::build(keys, MphfBuildOptions{1.0, 0});
    CHECK(is_permutation_of_1_to_n(m, keys));
    const Mphf back = Mphf::deserialize(m.serialize());
    CHECK(is_permutation_of_1_to_n(back, keys));
}

TEST_CASE("any single corrupted byte is detected") {
    const auto keys = random_keys(500, 11);
    const Bytes wire = Mphf::build(keys).serialize();
    for (std::size_t pos = 0; pos < wire.size(); ++pos) {
        Bytes bad = wire;
        bad[pos] ^= 0x5A;
        CHECK_THROWS_AS(Mphf::deserialize(bad), DecodeError);
    }
}

TEST_CASE("truncated and padded inputs are rejected") {
    const Bytes wire = Mphf::build(random_keys(100, 12)).serialize();
    for (std::size_t len = 0; len < wire.size(); len += 7)
        CHECK_THROWS_AS(Mphf::deserialize(ByteView(wire.data(), len)), DecodeError);
    Bytes longer = wire;
    longer.push_back(0);
    CHECK_THROWS_AS(Mphf::deserialize(longer), DecodeError);
}
