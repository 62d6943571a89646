// Copyright (c) 2026 pagedevict authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pagedevict/policy.hpp"

namespace pagedevict {

/// One decode step of one (run, sequence, layer). `deviation` is the
/// relative attention-output error against the FullCache shadow run, or NaN
/// when the shadow is disabled.
struct StepRecord {
    std::uint32_t run = 0;
    std::uint32_t sequence = 0;
    std::uint32_t layer = 0;
    std::int64_t step = 0;  // 1-based
    std::size_t retained_len = 0;
    EvictionDecision decision;
    double fragmentation = 0.0;
    double fragmentation_excl_newest = 0.0;
    double deviation = 0.0;
};

/// Aggregated statistics of one run (one policy/budget/trace combination,
/// summed over the batch's sequences and layers). Column order in the CSV is
/// fixed; see schemas/metrics.csv.md.
struct MetricsRecord {
    std::string policy;
    std::uint64_t cache_budget = 0;
    std::uint32_t page_size = 0;
    std::uint64_t prefill_len = 0;
    std::uint64_t decode_steps = 0;
    std::uint64_t batch = 0;
    std::uint64_t layer_count = 0;
    std::uint64_t seed = 0;
    std::uint64_t prefill_evicted = 0;
    std::uint64_t evictions_total = 0;
    std::uint64_t page_evictions = 0;
    std::uint64_t token_evictions = 0;
    std::uint64_t block_table_updates = 0;
    double mean_fragmentation = 0.0;
    double max_fragmentation = 0.0;
    double max_fragmentation_excl_newest = 0.0;
    double mean_deviation = 0.0;
    double p95_deviation = 0.0;
    std::uint64_t retained_bytes = 0;
    std::uint64_t prefill_wall_ns = 0;
    std::uint64_t decode_wall_ns = 0;
};

/// CSV with a header row, RFC 4180 quoting, and round-trip-lossless numbers
/// (shortest float form).
std::string emit_csv(std::span<const MetricsRecord> records);

/// One JSON object per step; decision "kind" is an explicit null for
/// Kind::None. See schemas/steplog.jsonl.md.
std::string emit_jsonl(std::span<const StepRecord> steps);

struct SummaryRow {
    std::string policy;
    std::uint64_t runs = 0;
    std::uint64_t evictions_total = 0;
    std::uint64_t block_table_updates = 0;
    /// Block-table updates of this policy relative to PagedEviction's; NaN
    /// when no PagedEviction record is present.
    double cadence_ratio = 0.0;
    double max_fragmentation_excl_newest = 0.0;
    double mean_deviation = 0.0;
};

/// Per-policy comparison rows in PolicyKind order. Throws EmptyInput.
std::vector<SummaryRow> summarize(std::span<const MetricsRecord> records);

/// Plain-text table of summarize() output.
std::string format_summary(std::span<const SummaryRow> rows);

} // namespace pagedevict
