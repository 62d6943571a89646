// Copyright (c) 2026 pagedevict authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pagedevict/block_table.hpp"

namespace pagedevict {

struct AttentionInputs {
    std::span<const float> query;  // length head_count * head_dim
    const BlockTable* table = nullptr;
    std::uint32_t head_count = 0;
    std::uint32_t head_dim = 0;
};

/// Per-head scaled dot-product attention over the retained tokens, read from
/// the paged cache in logical order (holes skipped), heads concatenated.
/// Softmax uses max-subtraction; accumulation is double precision in a fixed
/// order, so identical retained sets give bit-identical outputs.
/// Throws EmptyCache / LengthMismatch.
std::vector<float> attend(const AttentionInputs& inputs);

struct AttentionDetail {
    std::vector<float> output;
    std::vector<double> weight_sums;  // per head, post-normalization (== 1)
};

/// attend() plus per-head softmax weight sums, for diagnostics.
AttentionDetail attend_detailed(const AttentionInputs& inputs);

/// Relative output error ||a - b||_2 / max(||b||_2, eps).
/// Throws LengthMismatch.
double output_deviation(std::span<const float> a, std::span<const float> b);

} // namespace pagedevict
