// Copyright (c) 2026 pagedevict authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace pagedevict {

/// Derives an independent stream seed from a base seed and a salt
/// (splitmix64 finalizer). Used so that weights, embeddings and noise
/// draw from decoupled streams: consuming one never shifts another.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seeded stream of i.i.d. standard Gaussians.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

    double next() { return normal_(engine_); }

    /// Fills `out` with draws scaled by `scale`.
    void fill(std::span<float> out, double scale = 1.0) {
        for (float& x : out) {
            x = static_cast<float>(scale * normal_(engine_));
        }
    }

    std::vector<float> draw(std::size_t n, double scale = 1.0) {
        std::vector<float> out(n);
        fill(out, scale);
        return out;
    }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Order-sensitive checksum of float payloads, used to assert that two
/// consumers saw the identical embedding stream.
class StreamChecksum {
public:
    void update(std::span<const float> data) {
        for (float x : data) {
            std::uint32_t bits;
            static_assert(sizeof(bits) == sizeof(x));
            __builtin_memcpy(&bits, &x, sizeof(bits));
            state_ = (state_ ^ bits) * 0x100000001b3ULL;
        }
    }

    std::uint64_t value() const { return state_; }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

} // namespace pagedevict
