#include <benchmark/benchmark.h>

#include "pagedevict/policy.hpp"
#include "pagedevict/rng.hpp"

using namespace pagedevict;

namespace {

/// Steady-state decode cost per step with the cache at budget. The contrast
/// of interest is page-aligned eviction (work every B steps) versus the
/// per-step evictors (work every step).
void decode_steps(benchmark::State& state, PolicyKind kind) {
    const std::size_t budget = 512;
    const std::uint32_t page_size = 16;
    PolicyConfig config;
    config.kind = kind;
    config.cache_budget = budget;
    config.page_size = page_size;

    GaussianStream rng(4);
    PagePool pool(4096, page_size);
    BlockTable table(pool);
    auto policy = make_policy(config);
    std::vector<KvVector> prompt;
    for (std::uint64_t i = 0; i < budget; ++i) {
        prompt.push_back(make_kv(rng.draw(64), rng.draw(64), i));
    }
    auto result = policy->prefill_compress(std::move(prompt));
    const std::vector<KvVector> snapshot = result.retained;
    for (auto& kv : result.retained) {
        table.append_token(std::move(kv));
    }

    std::uint64_t position = budget;
    std::int64_t step = 0;
    const auto prototype = make_kv(rng.draw(64), rng.draw(64), 0);
    for (auto _ : state) {
        if (pool.free_count() < 4) {
            // FullCache and the hole-leaving evictors otherwise outgrow any
            // fixed pool over a long benchmark run.
            state.PauseTiming();
            table.clear();
            for (const auto& kv : snapshot) {
                table.append_token(kv);
            }
            position = budget;
            state.ResumeTiming();
        }
        KvVector kv = prototype;
        kv.position = position++;
        policy->decode_step(table, std::move(kv), ++step);
    }
    state.SetItemsProcessed(state.iterations());
}

} // namespace

static void BM_DecodePagedEviction(benchmark::State& state) {
    decode_steps(state, PolicyKind::PagedEviction);
}
static void BM_DecodeStreamingLlm(benchmark::State& state) {
    decode_steps(state, PolicyKind::StreamingLlm);
}
static void BM_DecodeInvKeyL2(benchmark::State& state) {
    decode_steps(state, PolicyKind::InvKeyL2);
}
static void BM_DecodeKeyDiff(benchmark::State& state) {
    decode_steps(state, PolicyKind::KeyDiff);
}
static void BM_DecodeFullCache(benchmark::State& state) {
    decode_steps(state, PolicyKind::FullCache);
}

BENCHMARK(BM_DecodePagedEviction);
BENCHMARK(BM_DecodeStreamingLlm);
BENCHMARK(BM_DecodeInvKeyL2);
BENCHMARK(BM_DecodeKeyDiff);
BENCHMARK(BM_DecodeFullCache);
