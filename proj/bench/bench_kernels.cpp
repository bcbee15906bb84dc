// Parallel kernels against their serial references.
//
//   ./snips_bench --benchmark_filter=ChunkProofs

#include <benchmark/benchmark.h>

#include <map>
#include <vector>

#include "snips/beacon.hpp"
#include "snips/hash.hpp"
#include "snips/mphf.hpp"
#include "snips/proof.hpp"
#include "snips/scenario.hpp"

namespace {

using namespace snips;

struct Fixture {
    std::vector<Chunk> chunks;
    std::vector<const Chunk*> ptrs;
    std::vector<Hash256> proofs;

    explicit Fixture(std::size_t n) {
        ChunkFactory factory(n, kMaxChunkSize);
        chunks = factory.make(n);
        for (const Chunk& c : chunks) ptrs.push_back(&c);
        proofs.resize(n);
        chunk_proofs_serial(beacon_nonce(1), ptrs, proofs);
    }
};

const Fixture& fixture(std::size_t n) {
    static std::map<std::size_t, Fixture> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, Fixture(n)).first;
    return it->second;
}

void BM_ChunkProofsSerial(benchmark::State& state) {
    const Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
    std::vector<Hash256> out(f.ptrs.size());
    for (auto _ : state) chunk_proofs_serial(beacon_nonce(2), f.ptrs, out);
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ChunkProofsParallel(benchmark::State& state) {
    const Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
    std::vector<Hash256> out(f.ptrs.size());
    for (auto _ : state) chunk_proofs_parallel(beacon_nonce(2), f.ptrs, out);
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_MphfBuildSerial(benchmark::State& state) {
    const Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(Mphf::build_serial(f.proofs));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_MphfBuildParallel(benchmark::State& state) {
    const Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(Mphf::build(f.proofs));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_MphfFind(benchmark::State& state) {
    const Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
    const Mphf m = Mphf::build(f.proofs);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(m.find(f.proofs[i]));
        i = i + 1 == f.proofs.size() ? 0 : i + 1;
    }
}

}  // namespace

BENCHMARK(BM_ChunkProofsSerial)->Arg(2560)->Arg(25600)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ChunkProofsParallel)->Arg(2560)->Arg(25600)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MphfBuildSerial)->Arg(2560)->Arg(25600)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MphfBuildParallel)->Arg(2560)->Arg(25600)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MphfFind)->Arg(25600);

BENCHMARK_MAIN();
