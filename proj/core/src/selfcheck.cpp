// Copyright (c) 2026 pagedevict authors
// SPDX-License-Identifier: Apache-2.0

#include "pagedevict/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "pagedevict/attention.hpp"
#include "pagedevict/importance.hpp"
#include "pagedevict/rng.hpp"
#include "pagedevict/simulator.hpp"

namespace pagedevict {

CheckResult check_trigger_cadence(std::span<const EvictionDecision> decisions,
                                  std::uint32_t page_size, std::uint64_t decode_steps) {
    const std::uint64_t expected = decode_steps / page_size;
    std::uint64_t page_events = 0;
    std::ostringstream detail;
    bool ok = true;
    for (const auto& d : decisions) {
        if (d.kind == EvictionDecision::Kind::Page) {
            ++page_events;
            if (d.trigger_step % page_size != 0) {
                ok = false;
                detail << "page eviction off the page boundary at step " << d.trigger_step
                       << "; ";
            }
        } else if (d.kind == EvictionDecision::Kind::Tokens) {
            ok = false;
            detail << "token eviction at step " << d.trigger_step << "; ";
        }
    }
    if (page_events != expected) {
        ok = false;
        detail << "expected " << expected << " page evictions over " << decode_steps
               << " steps, saw " << page_events;
    }
    return CheckResult{"trigger cadence", ok, detail.str()};
}

CheckResult check_budget_bound(PolicyKind kind, std::span<const std::size_t> retained,
                               std::size_t cache_budget, std::uint32_t page_size) {
    std::ostringstream detail;
    bool ok = true;
    bool past_budget = false;
    for (std::size_t i = 0; i < retained.size(); ++i) {
        const std::size_t len = retained[i];
        if (len > cache_budget) {
            past_budget = true;
        }
        if (kind == PolicyKind::PagedEviction) {
            if (past_budget &&
                (len <= cache_budget - std::min<std::size_t>(cache_budget, page_size) ||
                 len > cache_budget + page_size)) {
                ok = false;
                detail << "retained " << len << " outside (C-B, C+B] at step " << i + 1;
                break;
            }
        } else if (kind != PolicyKind::FullCache) {
            // Per-step evictors: at most C at rest (the transient C+1 inside a
            // step is not visible at step boundaries).
            if (len > cache_budget) {
                ok = false;
                detail << "retained " << len << " exceeds budget at step " << i + 1;
                break;
            }
        }
    }
    return CheckResult{"budget bound", ok, detail.str()};
}

namespace {

// The oracles below recompute results from raw data along an independent
// path (plain loops over contiguous copies, no paging, no cached norms).

double oracle_norm(const std::vector<float>& v) {
    double acc = 0.0;
    for (float x : v) {
        acc += static_cast<double>(x) * static_cast<double>(x);
    }
    return std::sqrt(acc);
}

std::vector<float> oracle_attention(const std::vector<KvVector>& tokens,
                                    const std::vector<float>& query, std::uint32_t heads,
                                    std::uint32_t dim) {
    const std::size_t width = static_cast<std::size_t>(heads) * dim;
    std::vector<float> out(width, 0.0f);
    for (std::uint32_t h = 0; h < heads; ++h) {
        const std::size_t base = static_cast<std::size_t>(h) * dim;
        std::vector<double> logits(tokens.size());
        double max_logit = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < tokens.size(); ++t) {
            double dot = 0.0;
            for (std::uint32_t i = 0; i < dim; ++i) {
                dot += static_cast<double>(query[base + i]) *
                       static_cast<double>(tokens[t].key[base + i]);
            }
            logits[t] = dot / std::sqrt(static_cast<double>(dim));
            max_logit = std::max(max_logit, logits[t]);
        }
        double z = 0.0;
        for (double& l : logits) {
            l = std::exp(l - max_logit);
            z += l;
        }
        for (std::uint32_t i = 0; i < dim; ++i) {
            double acc = 0.0;
            for (std::size_t t = 0; t < tokens.size(); ++t) {
                acc += logits[t] / z * static_cast<double>(tokens[t].value[base + i]);
            }
            out[base + i] = static_cast<float>(acc);
        }
    }
    return out;
}

CheckResult check_scoring_oracle(std::uint64_t seed) {
    GaussianStream rng(derive_seed(seed, 0x5C07));
    std::mt19937_64 sizes(derive_seed(seed, 0x5C08));
    for (int round = 0; round < 50; ++round) {
        const std::size_t width = 8 + sizes() % 56;
        const std::size_t count = 1 + sizes() % 64;
        for (std::size_t i = 0; i < count; ++i) {
            auto kv = make_kv(rng.draw(width), rng.draw(width), i);
            const double expected =
                oracle_norm(kv.value) / std::max(oracle_norm(kv.key), kNormEpsilon);
            const double got = token_importance(kv);
            if (std::abs(got - expected) > 1e-6 * std::max(1.0, std::abs(expected))) {
                return CheckResult{"scoring oracle", false,
                                   "token score mismatch vs raw-vector recomputation"};
            }
        }
    }
    return CheckResult{"scoring oracle", true, ""};
}

CheckResult check_rank_oracle(std::uint64_t seed) {
    std::mt19937_64 gen(derive_seed(seed, 0x4A9));
    std::uniform_real_distribution<double> uniform(0.0, 4.0);
    for (int round = 0; round < 200; ++round) {
        const std::size_t n = 1 + gen() % 64;
        std::vector<TokenScore> scores(n);
        for (std::size_t i = 0; i < n; ++i) {
            // Coarse quantization makes score ties likely.
            scores[i] = TokenScore{i, std::round(uniform(gen) * 4.0) / 4.0};
        }
        const std::size_t k = gen() % (n + 1);
        auto got = rank_tokens(scores, k);
        auto order = scores;
        std::stable_sort(order.begin(), order.end(),
                         [](const TokenScore& a, const TokenScore& b) {
                             return a.score < b.score ||
                                    (a.score == b.score && a.position < b.position);
                         });
        std::vector<std::uint64_t> expected;
        for (std::size_t i = 0; i < k; ++i) {
            expected.push_back(order[i].position);
        }
        std::sort(expected.begin(), expected.end());
        if (got != expected) {
            return CheckResult{"rank oracle", false, "rank_tokens disagrees with full sort"};
        }
    }
    return CheckResult{"rank oracle", true, ""};
}

CheckResult check_attention_oracle(std::uint64_t seed) {
    GaussianStream rng(derive_seed(seed, 0xA77));
    std::mt19937_64 sizes(derive_seed(seed, 0xA78));
    for (int round = 0; round < 25; ++round) {
        const std::uint32_t heads = 2 + sizes() % 4;
        const std::uint32_t dim = 4 + sizes() % 12;
        const std::size_t width = static_cast<std::size_t>(heads) * dim;
        const std::size_t count = 1 + sizes() % 128;

        PagePool pool(count / 4 + 2, 4);
        BlockTable table(pool);
        std::vector<KvVector> dense;
        for (std::size_t t = 0; t < count; ++t) {
            auto kv = make_kv(rng.draw(width), rng.draw(width), t);
            dense.push_back(kv);
            table.append_token(std::move(kv));
        }
        const auto query = rng.draw(width);
        const auto paged = attend({query, &table, heads, dim});
        const auto expected = oracle_attention(dense, query, heads, dim);
        if (output_deviation(paged, expected) > 1e-5) {
            return CheckResult{"attention oracle", false,
                               "paged attention diverges from the dense oracle"};
        }
    }
    return CheckResult{"attention oracle", true, ""};
}

CheckResult check_page_conservation(std::uint64_t seed) {
    std::mt19937_64 gen(derive_seed(seed, 0xC0115));
    GaussianStream rng(derive_seed(seed, 0xC0116));
    for (int round = 0; round < 20; ++round) {
        const std::size_t capacity = 4 + gen() % 12;
        PagePool pool(capacity, 4);
        BlockTable table(pool);
        std::uint64_t position = 0;
        for (int op = 0; op < 200; ++op) {
            const auto roll = gen() % 3;
            try {
                if (roll == 0) {
                    table.append_token(make_kv(rng.draw(4), rng.draw(4), position++));
                } else if (roll == 1 && table.page_count() > 0) {
                    table.free_page(gen() % table.page_count());
                } else if (roll == 2 && table.retained_len() > 0) {
                    auto positions = table.retained_positions();
                    table.evict_slot(positions[gen() % positions.size()]);
                }
            } catch (const PoolExhausted&) {
                // Expected on small pools; conservation must still hold.
            }
            if (pool.allocated() + pool.free_count() != pool.capacity()) {
                return CheckResult{"page conservation", false,
                                   "allocated + free != capacity after an operation"};
            }
            auto positions = table.retained_positions();
            if (!std::is_sorted(positions.begin(), positions.end()) ||
                std::adjacent_find(positions.begin(), positions.end()) != positions.end()) {
                return CheckResult{"page conservation", false,
                                   "retained positions are not strictly increasing"};
            }
        }
    }
    return CheckResult{"page conservation", true, ""};
}

void run_policy_trace(PolicyKind kind, std::uint64_t seed, std::size_t prefill,
                      std::size_t decode, std::size_t budget, std::uint32_t page_size,
                      std::vector<EvictionDecision>& decisions_out,
                      std::vector<std::size_t>& retained_out) {
    PolicyConfig config;
    config.kind = kind;
    config.cache_budget = budget;
    config.page_size = page_size;
    auto policy = make_policy(config);

    GaussianStream rng(derive_seed(seed, 0x7AACE));
    const std::size_t width = 16;
    PagePool pool((prefill + decode) / page_size + 4, page_size);
    BlockTable table(pool);

    std::vector<KvVector> prompt;
    for (std::size_t t = 0; t < prefill; ++t) {
        prompt.push_back(make_kv(rng.draw(width), rng.draw(width), t));
    }
    auto compressed = policy->prefill_compress(std::move(prompt));
    for (auto& kv : compressed.retained) {
        table.append_token(std::move(kv));
    }
    for (std::size_t t = 1; t <= decode; ++t) {
        auto kv = make_kv(rng.draw(width), rng.draw(width), prefill + t - 1);
        decisions_out.push_back(
            policy->decode_step(table, std::move(kv), static_cast<std::int64_t>(t)));
        retained_out.push_back(table.retained_len());
    }
}

CheckResult check_budget_and_cadence(std::uint64_t seed) {
    // PagedEviction starts at budget so every decode step is past budget.
    const std::uint32_t page_size = 16;
    const std::size_t budget = 64;
    const std::size_t prefill = 96;
    const std::size_t decode = 160;

    std::vector<EvictionDecision> decisions;
    std::vector<std::size_t> retained;
    run_policy_trace(PolicyKind::PagedEviction, seed, prefill, decode, budget, page_size,
                     decisions, retained);
    auto cadence = check_trigger_cadence(decisions, page_size, decode);
    if (!cadence.passed) {
        return cadence;
    }
    auto bound = check_budget_bound(PolicyKind::PagedEviction, retained, budget, page_size);
    if (!bound.passed) {
        return CheckResult{"trigger cadence", false, bound.detail};
    }
    for (PolicyKind kind :
         {PolicyKind::StreamingLlm, PolicyKind::InvKeyL2, PolicyKind::KeyDiff}) {
        std::vector<EvictionDecision> d;
        std::vector<std::size_t> r;
        run_policy_trace(kind, seed, prefill, decode, budget, page_size, d, r);
        std::size_t token_steps = 0;
        for (const auto& decision : d) {
            if (decision.kind == EvictionDecision::Kind::Tokens) {
                ++token_steps;
            }
        }
        if (token_steps != decode) {
            return CheckResult{"trigger cadence", false,
                               std::string(to_string(kind)) + " made " +
                                   std::to_string(token_steps) + " token evictions, expected " +
                                   std::to_string(decode)};
        }
        auto b = check_budget_bound(kind, r, budget, page_size);
        if (!b.passed) {
            return CheckResult{"trigger cadence", false, b.detail};
        }
    }
    return CheckResult{"trigger cadence", true, ""};
}

CheckResult check_determinism(std::uint64_t seed) {
    PolicyConfig policy;
    policy.kind = PolicyKind::PagedEviction;
    policy.cache_budget = 64;
    policy.page_size = 16;
    TraceConfig trace;
    trace.prefill_len = 80;
    trace.decode_len = 96;
    trace.batch = 2;
    trace.seed = seed;
    auto a = run_trace(policy, trace);
    auto b = run_trace(policy, trace);
    for (std::size_t s = 0; s < a.sequences.size(); ++s) {
        if (a.sequences[s].embedding_checksum != b.sequences[s].embedding_checksum) {
            return CheckResult{"determinism", false, "embedding streams differ across runs"};
        }
        const auto& sa = a.sequences[s].steps;
        const auto& sb = b.sequences[s].steps;
        if (sa.size() != sb.size()) {
            return CheckResult{"determinism", false, "step logs differ in length"};
        }
        for (std::size_t i = 0; i < sa.size(); ++i) {
            if (sa[i].retained_len != sb[i].retained_len ||
                sa[i].decision.kind != sb[i].decision.kind ||
                sa[i].decision.positions != sb[i].decision.positions ||
                sa[i].decision.logical_index != sb[i].decision.logical_index ||
                sa[i].deviation != sb[i].deviation) {
                return CheckResult{"determinism", false, "step logs differ across runs"};
            }
        }
    }
    return CheckResult{"determinism", true, ""};
}

} // namespace

std::vector<CheckResult> run_selfchecks(std::uint64_t seed) {
    std::vector<CheckResult> results;
    results.push_back(check_scoring_oracle(seed));
    results.push_back(check_rank_oracle(seed));
    results.push_back(check_attention_oracle(seed));
    results.push_back(check_page_conservation(seed));
    results.push_back(check_budget_and_cadence(seed));
    results.push_back(check_determinism(seed));
    return results;
}

} // namespace pagedevict
