// Copyright (c) 2026 pagedevict authors
// SPDX-License-Identifier: Apache-2.0

#include "pagedevict/policy.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

#include "pagedevict/importance.hpp"

namespace pagedevict {

std::string_view to_string(PolicyKind kind) {
    switch (kind) {
    case PolicyKind::PagedEviction: return "paged-eviction";
    case PolicyKind::StreamingLlm: return "streaming-llm";
    case PolicyKind::InvKeyL2: return "inv-key-l2";
    case PolicyKind::KeyDiff: return "key-diff";
    case PolicyKind::FullCache: return "full";
    }
    return "unknown";
}

std::optional<PolicyKind> parse_policy_kind(std::string_view name) {
    for (PolicyKind kind : {PolicyKind::PagedEviction, PolicyKind::StreamingLlm,
                            PolicyKind::InvKeyL2, PolicyKind::KeyDiff, PolicyKind::FullCache}) {
        if (name == to_string(kind)) {
            return kind;
        }
    }
    return std::nullopt;
}

void PolicyConfig::validate() const {
    if (page_size == 0) {
        throw BudgetInvalid("page size must be positive");
    }
    if (cache_budget < page_size) {
        throw BudgetInvalid("budget must be at least one page (" +
                            std::to_string(page_size) + " tokens)");
    }
    if (cache_budget % page_size != 0) {
        throw BudgetInvalid("budget must be a multiple of page size");
    }
    if (kind == PolicyKind::StreamingLlm && sink_count >= cache_budget) {
        throw BudgetInvalid("sink count must be smaller than the budget");
    }
}

PrefillResult EvictionPolicy::prefill_compress(std::vector<KvVector> tokens) const {
    config_.validate();
    if (tokens.empty()) {
        throw Error("prefill requires at least one token");
    }
    if (tokens.size() <= config_.cache_budget) {
        return PrefillResult{std::move(tokens), EvictionDecision::none(0)};
    }
    return compress(std::move(tokens));
}

EvictionDecision EvictionPolicy::decode_step(BlockTable& table, KvVector kv,
                                             std::int64_t step) {
    const std::uint64_t newest = kv.position;
    table.append_token(std::move(kv));
    return evict(table, newest, step);
}

namespace {

/// Drops the tokens named in `evicted` (sorted positions), preserving order.
std::vector<KvVector> drop_positions(std::vector<KvVector> tokens,
                                     const std::vector<std::uint64_t>& evicted) {
    std::unordered_set<std::uint64_t> gone(evicted.begin(), evicted.end());
    std::vector<KvVector> retained;
    retained.reserve(tokens.size() - evicted.size());
    for (auto& kv : tokens) {
        if (!gone.contains(kv.position)) {
            retained.push_back(std::move(kv));
        }
    }
    return retained;
}

/// Score-based prefill compression shared by the non-window policies: evict
/// the E = L - C lowest-scoring tokens before page partitioning.
template <typename ScoreFn>
PrefillResult compress_by_score(std::vector<KvVector> tokens, std::size_t budget,
                                ScoreFn&& score_of) {
    std::vector<TokenScore> scores;
    scores.reserve(tokens.size());
    for (const auto& kv : tokens) {
        scores.push_back(TokenScore{kv.position, score_of(kv)});
    }
    auto evicted = rank_tokens(scores, tokens.size() - budget);
    auto retained = drop_positions(std::move(tokens), evicted);
    return PrefillResult{std::move(retained), EvictionDecision::tokens(std::move(evicted), 0)};
}

double cosine_similarity(std::span<const float> a, double a_norm,
                         std::span<const float> b, double b_norm) {
    if (a_norm < kNormEpsilon || b_norm < kNormEpsilon) {
        return -1.0;  // a zero key counts as maximally diverse
    }
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return dot / (a_norm * b_norm);
}

std::vector<float> mean_key(const BlockTable& table) {
    std::vector<double> acc;
    std::size_t count = 0;
    table.for_each_retained([&](const KvVector& kv) {
        if (acc.empty()) {
            acc.resize(kv.key.size(), 0.0);
        }
        for (std::size_t i = 0; i < kv.key.size(); ++i) {
            acc[i] += kv.key[i];
        }
        ++count;
    });
    std::vector<float> mean(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) {
        mean[i] = static_cast<float>(acc[i] / static_cast<double>(count));
    }
    return mean;
}

class PagedEvictionPolicy final : public EvictionPolicy {
public:
    using EvictionPolicy::EvictionPolicy;

protected:
    PrefillResult compress(std::vector<KvVector> tokens) const override {
        return compress_by_score(std::move(tokens), config_.cache_budget, token_importance);
    }

    EvictionDecision evict(BlockTable& table, std::uint64_t, std::int64_t step) override {
        // Trigger: the newest page just filled while over budget. Without the
        // budget guard the first post-prefill state (retained == C, a multiple
        // of B) would fire a spurious eviction.
        const Page& newest = table.page_at(table.page_count() - 1);
        if (!newest.write_full() || table.retained_len() <= config_.cache_budget) {
            return EvictionDecision::none(step);
        }
        auto scores = score_pages(table);
        std::size_t victim = rank_pages(scores);
        table.free_page(victim);
        return EvictionDecision::page(victim, step);
    }
};

class StreamingLlmPolicy final : public EvictionPolicy {
public:
    using EvictionPolicy::EvictionPolicy;

protected:
    PrefillResult compress(std::vector<KvVector> tokens) const override {
        // Sinks plus the most recent C - sink_count tokens; the middle of the
        // prompt is evicted regardless of scores.
        const std::size_t sinks = std::min(config_.sink_count, tokens.size());
        const std::size_t window = config_.cache_budget - sinks;
        const std::size_t window_start = tokens.size() - window;
        std::vector<std::uint64_t> evicted;
        evicted.reserve(tokens.size() - config_.cache_budget);
        std::vector<KvVector> retained;
        retained.reserve(config_.cache_budget);
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (i < sinks || i >= window_start) {
                retained.push_back(std::move(tokens[i]));
            } else {
                evicted.push_back(tokens[i].position);
            }
        }
        return PrefillResult{std::move(retained),
                             EvictionDecision::tokens(std::move(evicted), 0)};
    }

    EvictionDecision evict(BlockTable& table, std::uint64_t, std::int64_t step) override {
        if (table.retained_len() <= config_.cache_budget) {
            return EvictionDecision::none(step);
        }
        // Oldest retained token outside the sink prefix. Sinks are the first
        // sink_count positions of the sequence, never evicted. The page
        // holding the victim auto-frees once it fully drains.
        std::uint64_t victim = std::numeric_limits<std::uint64_t>::max();
        bool found = false;
        for (std::size_t j = 0; j < table.page_count() && !found; ++j) {
            const Page& page = table.page_at(j);
            for (std::uint32_t s = 0; s < page.write_cursor(); ++s) {
                if (page.occupied(s) && page.at(s).position >= config_.sink_count) {
                    victim = page.at(s).position;
                    found = true;
                    break;
                }
            }
        }
        assert(found);
        table.evict_slot(victim);
        return EvictionDecision::tokens({victim}, step);
    }
};

class InvKeyL2Policy final : public EvictionPolicy {
public:
    using EvictionPolicy::EvictionPolicy;

protected:
    PrefillResult compress(std::vector<KvVector> tokens) const override {
        // Importance is the inverse key norm: large-norm keys go first.
        return compress_by_score(std::move(tokens), config_.cache_budget,
                                 [](const KvVector& kv) {
                                     return 1.0 / std::max(kv.key_norm, kNormEpsilon);
                                 });
    }

    EvictionDecision evict(BlockTable& table, std::uint64_t newest_position,
                           std::int64_t step) override {
        if (table.retained_len() <= config_.cache_budget) {
            return EvictionDecision::none(step);
        }
        double worst = -1.0;
        std::uint64_t victim = 0;
        table.for_each_retained([&](const KvVector& kv) {
            if (kv.position == newest_position) {
                return;  // this step's own KV is not a candidate
            }
            if (kv.key_norm > worst) {  // ties keep the first (older) token
                worst = kv.key_norm;
                victim = kv.position;
            }
        });
        table.evict_slot(victim);
        return EvictionDecision::tokens({victim}, step);
    }
};

class KeyDiffPolicy final : public EvictionPolicy {
public:
    using EvictionPolicy::EvictionPolicy;

protected:
    PrefillResult compress(std::vector<KvVector> tokens) const override {
        // Redundancy pruning: evict the keys most similar to the mean key.
        std::vector<double> acc(tokens.front().key.size(), 0.0);
        for (const auto& kv : tokens) {
            for (std::size_t i = 0; i < acc.size(); ++i) {
                acc[i] += kv.key[i];
            }
        }
        std::vector<float> mean(acc.size());
        for (std::size_t i = 0; i < acc.size(); ++i) {
            mean[i] = static_cast<float>(acc[i] / static_cast<double>(tokens.size()));
        }
        const double mean_norm = l2_norm(mean);
        return compress_by_score(std::move(tokens), config_.cache_budget,
                                 [&](const KvVector& kv) {
                                     return -cosine_similarity(kv.key, kv.key_norm, mean,
                                                               mean_norm);
                                 });
    }

    EvictionDecision evict(BlockTable& table, std::uint64_t newest_position,
                           std::int64_t step) override {
        if (table.retained_len() <= config_.cache_budget) {
            return EvictionDecision::none(step);
        }
        const std::vector<float> mean = mean_key(table);
        const double mean_norm = l2_norm(mean);
        double most_similar = -std::numeric_limits<double>::infinity();
        std::uint64_t victim = 0;
        table.for_each_retained([&](const KvVector& kv) {
            if (kv.position == newest_position) {
                return;
            }
            const double sim = cosine_similarity(kv.key, kv.key_norm, mean, mean_norm);
            if (sim > most_similar) {
                most_similar = sim;
                victim = kv.position;
            }
        });
        table.evict_slot(victim);
        return EvictionDecision::tokens({victim}, step);
    }
};

class FullCachePolicy final : public EvictionPolicy {
public:
    using EvictionPolicy::EvictionPolicy;

protected:
    PrefillResult compress(std::vector<KvVector> tokens) const override {
        return PrefillResult{std::move(tokens), EvictionDecision::none(0)};
    }

    EvictionDecision evict(BlockTable&, std::uint64_t, std::int64_t step) override {
        return EvictionDecision::none(step);
    }
};

} // namespace

std::unique_ptr<EvictionPolicy> make_policy(PolicyConfig config) {
    switch (config.kind) {
    case PolicyKind::PagedEviction:
        return std::make_unique<PagedEvictionPolicy>(config);
    case PolicyKind::StreamingLlm:
        return std::make_unique<StreamingLlmPolicy>(config);
    case PolicyKind::InvKeyL2:
        return std::make_unique<InvKeyL2Policy>(config);
    case PolicyKind::KeyDiff:
        return std::make_unique<KeyDiffPolicy>(config);
    case PolicyKind::FullCache:
        return std::make_unique<FullCachePolicy>(config);
    }
    throw Error("unknown policy kind");
}

} // namespace pagedevict
