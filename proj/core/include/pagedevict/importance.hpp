// Copyright (c) 2026 pagedevict authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pagedevict/block_table.hpp"
#include "pagedevict/kv_vector.hpp"

namespace pagedevict {

/// Guard against zero keys: a zero key scores near-infinite importance and
/// is therefore retained.
inline constexpr double kNormEpsilon = 1e-12;

struct TokenScore {
    std::uint64_t position = 0;
    double score = 0.0;
};

struct PageScore {
    std::size_t logical_index = 0;
    double score = 0.0;
    std::uint32_t token_count = 0;
};

/// Token importance from cached norms: ||V||_2 / ||K||_2.
double token_importance(const KvVector& kv);

TokenScore token_score(const KvVector& kv);

/// Mean token importance over the page's occupied slots.
/// Throws EmptyPage when the page has no occupied slots.
PageScore page_score(const Page& page, std::size_t logical_index);

/// Scores every mapped page of the table.
std::vector<PageScore> score_pages(const BlockTable& table);

/// The k lowest-scoring positions. Ties break toward the smaller position
/// (older token). Output sorted by position. Throws KTooLarge.
std::vector<std::uint64_t> rank_tokens(std::span<const TokenScore> scores, std::size_t k);

/// Logical index of the lowest-scoring page; ties break toward the smaller
/// logical index. Throws NoEligiblePage on empty input.
std::size_t rank_pages(std::span<const PageScore> scores);

} // namespace pagedevict
