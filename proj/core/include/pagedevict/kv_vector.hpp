// Copyright (c) 2026 pagedevict authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "pagedevict/errors.hpp"

namespace pagedevict {

inline double l2_norm(std::span<const float> v) {
    double acc = 0.0;
    for (float x : v) {
        acc += static_cast<double>(x) * static_cast<double>(x);
    }
    return std::sqrt(acc);
}

/// One token's cached key/value pair for a single layer. Keys and values are
/// stored concatenated across heads (length head_count * head_dim), so the
/// cached norms cover all heads of the token at once. `position` is the
/// absolute token index at creation and is never re-assigned, even after
/// earlier tokens have been evicted.
struct KvVector {
    std::vector<float> key;
    std::vector<float> value;
    std::uint64_t position = 0;
    double key_norm = 0.0;
    double value_norm = 0.0;
};

inline KvVector make_kv(std::vector<float> key, std::vector<float> value,
                        std::uint64_t position) {
    if (key.empty() || key.size() != value.size()) {
        throw LengthMismatch("key and value must have identical nonzero length");
    }
    KvVector kv;
    kv.key_norm = l2_norm(key);
    kv.value_norm = l2_norm(value);
    kv.key = std::move(key);
    kv.value = std::move(value);
    kv.position = position;
    return kv;
}

} // namespace pagedevict
