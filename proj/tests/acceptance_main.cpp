// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Criteria marked with their tolerances; every threshold is
// pinned here, not configurable.
//
// Usage: acceptance [--cli /path/to/pagedevict]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pagedevict/attention.hpp"
#include "pagedevict/importance.hpp"
#include "pagedevict/metrics.hpp"
#include "pagedevict/simulator.hpp"

#include "oracles.hpp"

using namespace pagedevict;

namespace {

struct Criterion {
    int number;
    std::string title;
    bool passed;
    std::string detail;
    double seconds;
};

std::vector<Criterion> g_results;

template <typename Fn>
void run_criterion(int number, const std::string& title, Fn&& fn) {
    const auto started = std::chrono::steady_clock::now();
    bool passed = false;
    std::string detail;
    try {
        detail = fn();
        passed = detail.empty();
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    g_results.push_back({number, title, passed, detail, seconds});
}

PolicyConfig policy_for(PolicyKind kind, std::size_t budget, std::uint32_t page_size = 16) {
    PolicyConfig c;
    c.kind = kind;
    c.cache_budget = budget;
    c.page_size = page_size;
    return c;
}

// ---------------------------------------------------------------------------
// 1. Scoring oracle equivalence: 100 random caches (<= 128 tokens, H=4,
//    d=16); token/page scores within 1e-6 relative of raw-vector
//    recomputation; rank selections exact. Runtime < 5 s.
std::string criterion_scoring() {
    GaussianStream rng(101);
    std::mt19937_64 gen(102);
    for (int round = 0; round < 100; ++round) {
        const std::size_t count = 1 + gen() % 128;
        const std::size_t width = 64;  // H=4, d=16
        PagePool pool(count / 16 + 2, 16);
        BlockTable table(pool);
        std::vector<KvVector> copies;
        std::vector<TokenScore> scores;
        for (std::size_t i = 0; i < count; ++i) {
            auto kv = oracle::random_kv(rng, width, i);
            copies.push_back(kv);
            scores.push_back(token_score(kv));
            table.append_token(std::move(kv));
        }
        for (std::size_t i = 0; i < count; ++i) {
            const double expected = oracle::token_ratio(copies[i]);
            if (std::abs(scores[i].score - expected) > 1e-6 * std::abs(expected)) {
                return "token score off by more than 1e-6 relative";
            }
        }
        for (std::size_t j = 0; j < table.page_count(); ++j) {
            if (table.page_at(j).fill() == 0) {
                continue;
            }
            double mean = 0.0;
            std::size_t members = 0;
            for (std::size_t i = j * 16; i < std::min<std::size_t>((j + 1) * 16, count); ++i) {
                mean += oracle::token_ratio(copies[i]);
                ++members;
            }
            mean /= static_cast<double>(members);
            const double got = page_score(table.page_at(j), j).score;
            if (std::abs(got - mean) > 1e-6 * std::max(1.0, std::abs(mean))) {
                return "page score off by more than 1e-6 relative";
            }
        }
        const std::size_t k = gen() % (count + 1);
        if (rank_tokens(scores, k) != oracle::rank_lowest(scores, k)) {
            return "rank_tokens disagrees with the full-sort oracle";
        }
        auto page_scores = score_pages(table);
        if (!page_scores.empty() && rank_pages(page_scores) != oracle::argmin_page(page_scores)) {
            return "rank_pages disagrees with the exhaustive argmin";
        }
    }
    return "";
}

// ---------------------------------------------------------------------------
// 2. Attention oracle equivalence: 100 random instances (<= 256 tokens),
//    paged vs dense contiguous within 1e-5 relative. Runtime < 10 s.
std::string criterion_attention() {
    GaussianStream rng(201);
    std::mt19937_64 gen(202);
    for (int round = 0; round < 100; ++round) {
        const std::uint32_t heads = 1 + gen() % 4;
        const std::uint32_t dim = 4 + gen() % 16;
        const std::size_t width = static_cast<std::size_t>(heads) * dim;
        const std::size_t count = 1 + gen() % 256;
        PagePool pool(count / 16 + 2, 16);
        BlockTable table(pool);
        std::vector<KvVector> dense;
        for (std::size_t i = 0; i < count; ++i) {
            auto kv = oracle::random_kv(rng, width, i);
            dense.push_back(kv);
            table.append_token(std::move(kv));
        }
        auto query = rng.draw(width);
        auto paged = attend({query, &table, heads, dim});
        auto expected = oracle::dense_attention(dense, query, heads, dim);
        if (output_deviation(paged, expected) > 1e-5) {
            return "paged attention deviates more than 1e-5 from the dense oracle";
        }
    }
    return "";
}

// ---------------------------------------------------------------------------
// 3. Budget and alignment invariants over >= 1000 randomized traces.
std::string criterion_budget_invariants() {
    std::mt19937_64 gen(301);
    GaussianStream rng(302);
    const std::uint32_t page_sizes[] = {8, 16, 32};
    int cases = 0;
    while (cases < 1000) {
        const std::uint32_t b = page_sizes[gen() % 3];
        const std::size_t budget = b * (2 + gen() % 15);
        const std::size_t prefill = 16 + gen() % 241;
        const std::size_t decode = 64 + gen() % 961;
        for (PolicyKind kind : {PolicyKind::PagedEviction, PolicyKind::StreamingLlm,
                                PolicyKind::InvKeyL2, PolicyKind::KeyDiff}) {
            ++cases;
            PagePool pool((prefill + decode) / b + 4, b);
            BlockTable table(pool);
            auto policy = make_policy(policy_for(kind, budget, b));
            std::vector<KvVector> prompt;
            for (std::size_t i = 0; i < prefill; ++i) {
                prompt.push_back(oracle::random_kv(rng, 8, i));
            }
            auto compressed = policy->prefill_compress(std::move(prompt));
            for (auto& kv : compressed.retained) {
                table.append_token(std::move(kv));
            }
            bool past_budget = false;
            for (std::size_t t = 1; t <= decode; ++t) {
                auto d = policy->decode_step(table, oracle::random_kv(rng, 8, prefill + t - 1),
                                             static_cast<std::int64_t>(t));
                const std::size_t retained = table.retained_len();
                if (retained > budget) {
                    past_budget = true;
                }
                if (kind == PolicyKind::PagedEviction) {
                    if (retained > budget + b) {
                        return "PagedEviction exceeded C + B";
                    }
                    if (past_budget && retained + b <= budget) {
                        return "PagedEviction fell to C - B or below";
                    }
                    if (d.kind == EvictionDecision::Kind::Page && retained != budget) {
                        return "PagedEviction trigger did not return to C";
                    }
                    for (std::size_t j = 0; j + 1 < table.page_count(); ++j) {
                        if (table.page_at(j).fill() != b) {
                            return "PagedEviction left a non-newest page partially filled";
                        }
                    }
                } else if (retained > budget) {
                    return std::string(to_string(kind)) + " exceeded the budget at rest";
                }
            }
        }
    }
    return "";
}

// ---------------------------------------------------------------------------
// 4. Eviction cadence: floor(D/B) page evictions for PagedEviction vs D
//    per-step updates; summarize reports cadence ratio == B exactly.
std::string criterion_cadence() {
    TraceConfig trace;
    trace.prefill_len = 96;
    trace.decode_len = 160;
    trace.batch = 1;
    trace.layer_count = 1;
    trace.seed = 401;
    trace.compute_deviation = false;

    std::vector<RunSpec> specs;
    for (PolicyKind kind : {PolicyKind::PagedEviction, PolicyKind::StreamingLlm,
                            PolicyKind::InvKeyL2, PolicyKind::KeyDiff}) {
        specs.push_back({policy_for(kind, 64), trace, 1});
    }
    auto records = run_matrix(specs);
    if (records[0].page_evictions != 10 || records[0].block_table_updates != 10) {
        return "PagedEviction did not make exactly floor(D/B) page evictions";
    }
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].block_table_updates != 160) {
            return records[i].policy + " did not update the table once per step";
        }
    }
    auto rows = summarize(records);
    for (const auto& row : rows) {
        if (row.policy == "paged-eviction") {
            continue;
        }
        if (row.cadence_ratio != 16.0) {  // == B, exactly
            return row.policy + " cadence ratio is not exactly B";
        }
    }
    return "";
}

// ---------------------------------------------------------------------------
// 5. Degenerate exactness: C >= prefill + decode makes every policy equal
//    FullCache (outputs within 1e-6 relative, retained sets identical).
std::string criterion_degenerate() {
    TraceConfig trace;
    trace.prefill_len = 64;
    trace.decode_len = 64;
    trace.batch = 1;
    trace.layer_count = 2;
    trace.seed = 501;
    const std::size_t budget = 128;  // == prefill + decode, multiple of 16

    auto reference = run_trace(policy_for(PolicyKind::FullCache, budget), trace);
    for (PolicyKind kind : {PolicyKind::PagedEviction, PolicyKind::StreamingLlm,
                            PolicyKind::InvKeyL2, PolicyKind::KeyDiff}) {
        auto result = run_trace(policy_for(kind, budget), trace);
        const auto& steps = result.sequences[0].steps;
        const auto& ref_steps = reference.sequences[0].steps;
        for (std::size_t i = 0; i < steps.size(); ++i) {
            if (steps[i].retained_len != ref_steps[i].retained_len) {
                return std::string(to_string(kind)) + " retained set differs from FullCache";
            }
            // The shadow run IS FullCache on the same stream; zero deviation
            // means outputs match it exactly.
            if (steps[i].deviation > 1e-6) {
                return std::string(to_string(kind)) + " attention output deviates from FullCache";
            }
        }
    }
    return "";
}

// ---------------------------------------------------------------------------
// 6. StreamingLLM golden semantics on a 2000-token trace: retained set is
//    always {first 4 sinks} + {most recent C-4}.
std::string criterion_streaming_golden() {
    const std::size_t prefill = 1000;
    const std::size_t decode = 1000;
    const std::size_t budget = 256;
    const std::size_t sinks = 4;

    PolicyConfig config = policy_for(PolicyKind::StreamingLlm, budget);
    config.sink_count = sinks;
    PagePool pool((prefill + decode) / 16 + 4, 16);
    BlockTable table(pool);
    auto policy = make_policy(config);

    GaussianStream rng(601);
    std::vector<KvVector> prompt;
    for (std::size_t i = 0; i < prefill; ++i) {
        prompt.push_back(oracle::random_kv(rng, 8, i));
    }
    auto compressed = policy->prefill_compress(std::move(prompt));
    for (auto& kv : compressed.retained) {
        table.append_token(std::move(kv));
    }

    auto expected_set = [&](std::size_t total) {
        std::vector<std::uint64_t> expected;
        for (std::uint64_t i = 0; i < sinks; ++i) {
            expected.push_back(i);
        }
        const std::size_t window = budget - sinks;
        const std::uint64_t start = total > window ? total - window : 0;
        for (std::uint64_t p = std::max<std::uint64_t>(start, sinks); p < total; ++p) {
            expected.push_back(p);
        }
        return expected;
    };

    if (table.retained_positions() != expected_set(prefill)) {
        return "prefill retained set is not sinks + recent window";
    }
    for (std::size_t t = 1; t <= decode; ++t) {
        policy->decode_step(table, oracle::random_kv(rng, 8, prefill + t - 1),
                            static_cast<std::int64_t>(t));
        if (table.retained_positions() != expected_set(prefill + t)) {
            return "retained set diverged at decode step " + std::to_string(t);
        }
    }
    return "";
}

// ---------------------------------------------------------------------------
// 7. Fragmentation separation on a 512-step over-budget trace: page-aligned
//    eviction reports exactly zero fragmentation outside the newest page;
//    the per-token evictors InvKeyL2/KeyDiff report strictly positive
//    fragmentation. StreamingLLM's per-token decode eviction concentrates its
//    holes at the sequence front (sink page + draining page), so it is
//    reported but gated only on the unstructured side of the claim not
//    applying to PagedEviction.
std::string criterion_fragmentation() {
    TraceConfig trace;
    trace.prefill_len = 96;
    trace.decode_len = 512;
    trace.batch = 1;
    trace.layer_count = 1;
    trace.seed = 701;
    trace.compute_deviation = false;

    std::vector<RunSpec> specs;
    for (PolicyKind kind : {PolicyKind::PagedEviction, PolicyKind::StreamingLlm,
                            PolicyKind::InvKeyL2, PolicyKind::KeyDiff}) {
        specs.push_back({policy_for(kind, 64), trace, 1});
    }
    auto records = run_matrix(specs);

    if (records[0].max_fragmentation_excl_newest != 0.0) {
        return "PagedEviction reported nonzero fragmentation outside the newest page";
    }
    if (!(records[2].max_fragmentation_excl_newest > 0.0)) {
        return "InvKeyL2 reported no fragmentation";
    }
    if (!(records[3].max_fragmentation_excl_newest > 0.0)) {
        return "KeyDiff reported no fragmentation";
    }
    return "";
}

// ---------------------------------------------------------------------------
// 8. Memory formula spot check.
std::string criterion_memory_formula() {
    if (memory_bytes(1024, 16, 8, 64, 2) != 33'554'432ULL) {
        return "memory_bytes(1024, 16, 8, 64, 2) != 33554432";
    }
    return "";
}

// ---------------------------------------------------------------------------
// 9. Deviation sanity: open-loop mean deviation non-increasing in C over
//    {4B, 8B, 16B}, and exactly zero once C covers the whole trace.
std::string criterion_deviation_monotone() {
    TraceConfig trace;
    trace.prefill_len = 128;
    trace.decode_len = 384;
    trace.batch = 1;
    trace.layer_count = 2;
    trace.seed = 901;
    trace.mode = GeneratorMode::OpenLoop;

    std::vector<double> means;
    for (std::size_t budget : {64, 128, 256}) {  // 4B, 8B, 16B at B=16
        RunSpec spec{policy_for(PolicyKind::PagedEviction, budget), trace, 1};
        auto records = run_matrix({&spec, 1});
        means.push_back(records[0].mean_deviation);
    }
    for (std::size_t i = 1; i < means.size(); ++i) {
        if (means[i] > means[i - 1]) {
            return "mean deviation increased from C=" + std::to_string(64 << (i - 1)) +
                   " to C=" + std::to_string(64 << i);
        }
    }
    RunSpec covered{policy_for(PolicyKind::PagedEviction, 512), trace, 1};
    auto records = run_matrix({&covered, 1});
    if (records[0].mean_deviation != 0.0 || records[0].p95_deviation != 0.0) {
        return "deviation is nonzero with the budget covering the whole trace";
    }
    return "";
}

// ---------------------------------------------------------------------------
// 10. Determinism: two CLI executions with identical config and seed produce
//     byte-identical CSV and JSONL.
std::string criterion_cli_determinism(const std::string& cli) {
    if (cli.empty()) {
        return "CLI path not provided (--cli)";
    }
    auto slurp = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const std::string args = " run --policy paged-eviction --budget 64 --prefill 96 "
                             "--decode 96 --batch 2 --seed 17";
    const std::string a_csv = "/tmp/pagedevict_acc_a.csv";
    const std::string a_jsonl = "/tmp/pagedevict_acc_a.jsonl";
    const std::string b_csv = "/tmp/pagedevict_acc_b.csv";
    const std::string b_jsonl = "/tmp/pagedevict_acc_b.jsonl";
    if (std::system((cli + args + " --out-csv " + a_csv + " --out-jsonl " + a_jsonl +
                     " > /dev/null").c_str()) != 0) {
        return "first CLI execution failed";
    }
    if (std::system((cli + args + " --out-csv " + b_csv + " --out-jsonl " + b_jsonl +
                     " > /dev/null").c_str()) != 0) {
        return "second CLI execution failed";
    }
    if (slurp(a_csv) != slurp(b_csv) || slurp(a_csv).empty()) {
        return "CSV outputs differ between identical executions";
    }
    if (slurp(a_jsonl) != slurp(b_jsonl) || slurp(a_jsonl).empty()) {
        return "JSONL outputs differ between identical executions";
    }
    return "";
}

} // namespace

int main(int argc, char** argv) {
    std::string cli;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--cli") {
            cli = argv[i + 1];
        }
    }

    run_criterion(1, "oracle equivalence: scoring", criterion_scoring);
    run_criterion(2, "oracle equivalence: attention", criterion_attention);
    run_criterion(3, "budget and alignment invariants", criterion_budget_invariants);
    run_criterion(4, "eviction cadence", criterion_cadence);
    run_criterion(5, "degenerate exactness", criterion_degenerate);
    run_criterion(6, "StreamingLLM golden semantics", criterion_streaming_golden);
    run_criterion(7, "fragmentation separation", criterion_fragmentation);
    run_criterion(8, "memory formula", criterion_memory_formula);
    run_criterion(9, "deviation sanity", criterion_deviation_monotone);
    run_criterion(10, "output determinism", [&] { return criterion_cli_determinism(cli); });

    bool all_passed = true;
    for (const auto& c : g_results) {
        std::printf("[%s] criterion %2d: %s (%.2fs)%s%s\n", c.passed ? "PASS" : "FAIL",
                    c.number, c.title.c_str(), c.seconds, c.detail.empty() ? "" : " - ",
                    c.detail.c_str());
        all_passed = all_passed && c.passed;
    }
    if (g_results[0].seconds >= 5.0) {
        std::printf("[FAIL] criterion  1 runtime bound: %.2fs >= 5s\n", g_results[0].seconds);
        all_passed = false;
    }
    if (g_results[1].seconds >= 10.0) {
        std::printf("[FAIL] criterion  2 runtime bound: %.2fs >= 10s\n", g_results[1].seconds);
        all_passed = false;
    }
    return all_passed ? 0 : 1;
}
