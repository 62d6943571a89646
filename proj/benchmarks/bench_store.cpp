#include <benchmark/benchmark.h>

#include "pagedevict/block_table.hpp"
#include "pagedevict/rng.hpp"

using namespace pagedevict;

namespace {

KvVector sample_kv(GaussianStream& rng, std::uint64_t position) {
    return make_kv(rng.draw(64), rng.draw(64), position);
}

} // namespace

static void BM_AppendToken(benchmark::State& state) {
    const auto page_size = static_cast<std::uint32_t>(state.range(0));
    GaussianStream rng(1);
    const auto kv = sample_kv(rng, 0);
    PagePool pool(65536 / page_size + 1, page_size);
    BlockTable table(pool);
    std::uint64_t position = 0;
    for (auto _ : state) {
        KvVector copy = kv;
        copy.position = position++;
        table.append_token(std::move(copy));
        if (table.retained_len() == 65536) {
            state.PauseTiming();
            table.clear();
            position = 0;
            state.ResumeTiming();
        }
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_AppendToken)->Arg(8)->Arg(16)->Arg(32);

static void BM_PoolAllocateRelease(benchmark::State& state) {
    PagePool pool(1024, 16);
    for (auto _ : state) {
        PageId id = pool.allocate();
        benchmark::DoNotOptimize(id);
        pool.release(id);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PoolAllocateRelease);

static void BM_EvictSlot(benchmark::State& state) {
    const std::size_t tokens = static_cast<std::size_t>(state.range(0));
    GaussianStream rng(2);
    PagePool pool(tokens / 16 + 2, 16);
    for (auto _ : state) {
        state.PauseTiming();
        BlockTable table(pool);
        for (std::uint64_t i = 0; i < tokens; ++i) {
            table.append_token(sample_kv(rng, i));
        }
        state.ResumeTiming();
        // Drain by evicting the middle token repeatedly (worst-case scan).
        for (std::uint64_t i = 0; i < tokens; ++i) {
            table.evict_slot(i);
        }
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EvictSlot)->Arg(256)->Arg(1024);

BENCHMARK_MAIN();
