#include <benchmark/benchmark.h>

#include "pagedevict/attention.hpp"
#include "pagedevict/rng.hpp"

using namespace pagedevict;

static void BM_PagedAttend(benchmark::State& state) {
    const std::size_t tokens = static_cast<std::size_t>(state.range(0));
    const std::uint32_t heads = 4;
    const std::uint32_t dim = 16;
    GaussianStream rng(3);
    PagePool pool(tokens / 16 + 1, 16);
    BlockTable table(pool);
    for (std::uint64_t i = 0; i < tokens; ++i) {
        table.append_token(make_kv(rng.draw(heads * dim), rng.draw(heads * dim), i));
    }
    const auto query = rng.draw(heads * dim);
    for (auto _ : state) {
        auto out = attend({query, &table, heads, dim});
        benchmark::DoNotOptimize(out);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PagedAttend)->RangeMultiplier(4)->Range(64, 4096);
