// Copyright (c) 2026 pagedevict authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "pagedevict/block_table.hpp"
#include "pagedevict/kv_vector.hpp"

namespace pagedevict {

enum class PolicyKind {
    PagedEviction,
    StreamingLlm,
    InvKeyL2,
    KeyDiff,
    FullCache,
};

std::string_view to_string(PolicyKind kind);

/// Parses the CLI spelling ("paged-eviction", "streaming-llm", "inv-key-l2",
/// "key-diff", "full").
std::optional<PolicyKind> parse_policy_kind(std::string_view name);

struct PolicyConfig {
    std::size_t cache_budget = 256;  // C, in tokens
    std::uint32_t page_size = 16;    // B, tokens per page
    std::size_t sink_count = 4;      // StreamingLLM only
    PolicyKind kind = PolicyKind::PagedEviction;

    /// Throws BudgetInvalid unless C >= B, C % B == 0 and sink_count < C.
    void validate() const;
};

/// Reified outcome of one eviction opportunity, for logging and tests.
/// `trigger_step` is the 1-based decode step, or 0 for prefill.
struct EvictionDecision {
    enum class Kind { None, Tokens, Page };

    Kind kind = Kind::None;
    std::vector<std::uint64_t> positions;  // Kind::Tokens
    std::size_t logical_index = 0;         // Kind::Page
    std::int64_t trigger_step = 0;

    static EvictionDecision none(std::int64_t step) {
        EvictionDecision d;
        d.trigger_step = step;
        return d;
    }
    static EvictionDecision tokens(std::vector<std::uint64_t> positions, std::int64_t step) {
        EvictionDecision d;
        d.kind = Kind::Tokens;
        d.positions = std::move(positions);
        d.trigger_step = step;
        return d;
    }
    static EvictionDecision page(std::size_t logical_index, std::int64_t step) {
        EvictionDecision d;
        d.kind = Kind::Page;
        d.logical_index = logical_index;
        d.trigger_step = step;
        return d;
    }

    /// Tokens removed from the cache by this decision. Page decisions always
    /// free a full page here: the trigger fires only when every page is full.
    std::uint64_t tokens_removed(std::uint32_t page_size) const {
        switch (kind) {
        case Kind::None:
            return 0;
        case Kind::Tokens:
            return positions.size();
        case Kind::Page:
            return page_size;
        }
        return 0;
    }
};

struct PrefillResult {
    std::vector<KvVector> retained;
    EvictionDecision decision;
};

/// Shared contract for the five eviction policies: a one-shot prefill
/// compression hook applied before page partitioning, and a per-token decode
/// hook that appends and then evicts according to the policy. An instance is
/// bound to one sequence's layer and is not thread-safe.
class EvictionPolicy {
public:
    explicit EvictionPolicy(PolicyConfig config) : config_(config) { config_.validate(); }
    virtual ~EvictionPolicy() = default;

    const PolicyConfig& config() const { return config_; }
    PolicyKind kind() const { return config_.kind; }

    /// Compresses the prompt's tokens to at most C before partitioning.
    /// Identity when tokens.size() <= C. Retained tokens keep their original
    /// positions and relative order.
    PrefillResult prefill_compress(std::vector<KvVector> tokens) const;

    /// Appends this step's token and applies the policy's decode eviction
    /// rule. `step` is 1-based. Propagates PoolExhausted from the append.
    EvictionDecision decode_step(BlockTable& table, KvVector kv, std::int64_t step);

protected:
    virtual PrefillResult compress(std::vector<KvVector> tokens) const = 0;
    /// Runs after the append; `newest_position` is the token appended this
    /// step and is never an eviction candidate.
    virtual EvictionDecision evict(BlockTable& table, std::uint64_t newest_position,
                                   std::int64_t step) = 0;

    PolicyConfig config_;
};

std::unique_ptr<EvictionPolicy> make_policy(PolicyConfig config);

} // namespace pagedevict
