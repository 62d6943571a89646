// Copyright (c) 2026 pagedevict authors
// SPDX-License-Identifier: Apache-2.0

#include "pagedevict/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pagedevict {

namespace {

AttentionDetail attend_impl(const AttentionInputs& inputs) {
    const BlockTable& table = *inputs.table;
    const std::size_t width = static_cast<std::size_t>(inputs.head_count) * inputs.head_dim;
    if (inputs.query.size() != width) {
        throw LengthMismatch("query length " + std::to_string(inputs.query.size()) +
                             " does not match head_count * head_dim = " +
                             std::to_string(width));
    }
    const std::size_t tokens = table.retained_len();
    if (tokens == 0) {
        throw EmptyCache();
    }

    const std::uint32_t heads = inputs.head_count;
    const std::uint32_t dim = inputs.head_dim;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));

    // Pass 1: per-head logits over retained tokens in logical order.
    std::vector<double> logits(tokens * heads);
    std::size_t t = 0;
    table.for_each_retained([&](const KvVector& kv) {
        if (kv.key.size() != width) {
            throw LengthMismatch("cached KV width does not match head layout");
        }
        for (std::uint32_t h = 0; h < heads; ++h) {
            double dot = 0.0;
            const std::size_t base = static_cast<std::size_t>(h) * dim;
            for (std::uint32_t i = 0; i < dim; ++i) {
                dot += static_cast<double>(inputs.query[base + i]) *
                       static_cast<double>(kv.key[base + i]);
            }
            logits[t * heads + h] = dot * scale;
        }
        ++t;
    });

    std::vector<double> max_logit(heads, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < tokens; ++i) {
        for (std::uint32_t h = 0; h < heads; ++h) {
            max_logit[h] = std::max(max_logit[h], logits[i * heads + h]);
        }
    }

    std::vector<double> weight_sum(heads, 0.0);
    for (std::size_t i = 0; i < tokens; ++i) {
        for (std::uint32_t h = 0; h < heads; ++h) {
            double w = std::exp(logits[i * heads + h] - max_logit[h]);
            logits[i * heads + h] = w;  // reuse as unnormalized weight
            weight_sum[h] += w;
        }
    }

    // Pass 2: weighted value accumulation, single accumulator per head lane.
    std::vector<double> acc(width, 0.0);
    t = 0;
    table.for_each_retained([&](const KvVector& kv) {
        for (std::uint32_t h = 0; h < heads; ++h) {
            const double w = logits[t * heads + h] / weight_sum[h];
            const std::size_t base = static_cast<std::size_t>(h) * dim;
            for (std::uint32_t i = 0; i < dim; ++i) {
                acc[base + i] += w * static_cast<double>(kv.value[base + i]);
            }
        }
        ++t;
    });

    AttentionDetail detail;
    detail.output.resize(width);
    for (std::size_t i = 0; i < width; ++i) {
        detail.output[i] = static_cast<float>(acc[i]);
    }
    detail.weight_sums.assign(heads, 0.0);
    for (std::size_t i = 0; i < tokens; ++i) {
        for (std::uint32_t h = 0; h < heads; ++h) {
            detail.weight_sums[h] += logits[i * heads + h] / weight_sum[h];
        }
    }
    return detail;
}

} // namespace

std::vector<float> attend(const AttentionInputs& inputs) {
    return attend_impl(inputs).output;
}

AttentionDetail attend_detailed(const AttentionInputs& inputs) {
    return attend_impl(inputs);
}

double output_deviation(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        throw LengthMismatch("deviation requires equal-length vectors, got " +
                             std::to_string(a.size()) + " and " + std::to_string(b.size()));
    }
    double diff = 0.0;
    double ref = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        diff += d * d;
        ref += static_cast<double>(b[i]) * static_cast<double>(b[i]);
    }
    return std::sqrt(diff) / std::max(std::sqrt(ref), 1e-12);
}

} // namespace pagedevict
