// Copyright (c) 2026 pagedevict authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "pagedevict/attention.hpp"
#include "pagedevict/metrics.hpp"
#include "pagedevict/policy.hpp"
#include "pagedevict/rng.hpp"

namespace pagedevict {

/// Per-layer projection weights, row-major. W_Q/W_K/W_V map d_model ->
/// head_count*head_dim; W_O maps head_count*head_dim -> d_model.
struct LayerWeights {
    std::vector<float> w_q;
    std::vector<float> w_k;
    std::vector<float> w_v;
    std::vector<float> w_o;
};

/// Seeded toy projections: entries i.i.d. Gaussian scaled by 1/sqrt(d_model).
/// Each layer draws its own weights, so layers score and evict independently.
struct ToyModelWeights {
    std::vector<LayerWeights> layers;
    std::uint32_t d_model = 0;
    std::uint32_t head_count = 0;
    std::uint32_t head_dim = 0;
    std::uint64_t seed = 0;

    static ToyModelWeights make(std::uint32_t d_model, std::uint32_t head_count,
                                std::uint32_t head_dim, std::uint32_t layer_count,
                                std::uint64_t seed);
};

enum class GeneratorMode {
    OpenLoop,    // every embedding is a fresh seeded Gaussian
    ClosedLoop,  // next embedding recycles the previous attention output
};

struct TraceConfig {
    std::size_t prefill_len = 128;
    std::size_t decode_len = 512;
    std::size_t batch = 4;
    GeneratorMode mode = GeneratorMode::OpenLoop;
    std::uint32_t d_model = 64;
    std::uint32_t head_count = 4;
    std::uint32_t head_dim = 16;
    std::uint32_t layer_count = 2;
    std::uint64_t seed = 0;
    /// Shadow FullCache run + per-step attention deviation. Costs one extra
    /// attention pass per layer per step.
    bool compute_deviation = true;
    /// Worker threads over the batch; 0 means hardware concurrency.
    std::uint32_t threads = 0;
    /// Main pool capacity in pages; 0 picks a policy-aware default that the
    /// trace cannot exhaust.
    std::size_t pool_pages = 0;

    void validate() const;
};

/// Default main-pool sizing. Structured policies get the block-table quota
/// ceil((C + B + prefill) / B) per sequence per layer; FullCache and the
/// per-token evictors additionally get room for every page the trace can
/// touch, since holes keep old pages alive.
std::size_t default_pool_pages(const PolicyConfig& policy, const TraceConfig& trace);

struct PrefillStats {
    std::uint64_t evicted = 0;         // summed over layers
    std::uint64_t pages_allocated = 0; // summed over layers
    std::uint64_t wall_ns = 0;
};

struct SequenceResult {
    std::uint32_t sequence = 0;
    PrefillStats prefill;
    std::vector<StepRecord> steps;  // layer-major within each step
    std::vector<std::size_t> final_retained;                    // per layer
    std::vector<std::vector<std::uint64_t>> final_positions;    // per layer
    std::uint64_t embedding_checksum = 0;
    std::uint64_t decode_wall_ns = 0;
};

struct RunResult {
    PolicyConfig policy;
    TraceConfig trace;
    std::vector<SequenceResult> sequences;
};

/// One sequence's live state across prefill and decode: per-layer block
/// tables, the policy instance, RNG streams and the closed-loop feedback
/// vector. Created by run_prefill, consumed by run_decode.
class SequenceState {
public:
    SequenceState(const ToyModelWeights& weights, const PolicyConfig& policy_config,
                  const TraceConfig& trace, PagePool& pool, PagePool* shadow_pool,
                  std::uint32_t sequence_index);

    const BlockTable& table(std::uint32_t layer) const { return tables_[layer]; }
    BlockTable& table(std::uint32_t layer) { return tables_[layer]; }
    const BlockTable* shadow_table(std::uint32_t layer) const {
        return shadow_ ? &(*shadow_)[layer] : nullptr;
    }
    std::uint32_t sequence_index() const { return seq_; }
    std::uint64_t embedding_checksum() const { return checksum_.value(); }

private:
    friend PrefillStats run_prefill(SequenceState& state);
    friend std::vector<StepRecord> run_decode(SequenceState& state);

    std::vector<float> next_embedding();
    KvVector project_kv(std::uint32_t layer, std::span<const float> embedding,
                        std::uint64_t position) const;
    std::vector<float> project_query(std::uint32_t layer,
                                     std::span<const float> embedding) const;

    const ToyModelWeights* weights_;
    const TraceConfig* trace_;
    std::unique_ptr<EvictionPolicy> policy_;
    std::vector<BlockTable> tables_;
    std::optional<std::vector<BlockTable>> shadow_;
    GaussianStream embedding_rng_;
    GaussianStream noise_rng_;
    StreamChecksum checksum_;
    std::vector<float> feedback_;  // last layer's attention output
    std::uint64_t next_position_ = 0;
    std::uint32_t seq_ = 0;
};

/// Generates the prompt embeddings, projects K/V per layer, applies the
/// policy's prefill compression and partitions the survivors into pages.
PrefillStats run_prefill(SequenceState& state);

/// Runs decode_len steps: per layer append + policy eviction + paged
/// attention, logging one StepRecord per layer per step (deviation measured
/// against the FullCache shadow fed the same embeddings).
std::vector<StepRecord> run_decode(SequenceState& state);

/// Runs one policy/trace combination over the whole batch, sequences in
/// parallel, sharing one page pool. Deterministic for a fixed seed.
RunResult run_trace(const PolicyConfig& policy, const TraceConfig& trace);

struct RunSpec {
    PolicyConfig policy;
    TraceConfig trace;
    /// Repetitions for wall-clock medians; counters come from the first run.
    /// With reps > 1 the first repetition is warmup and is discarded.
    std::uint32_t reps = 1;
};

/// Aggregates a run into one MetricsRecord (fields per schemas/metrics.csv.md).
MetricsRecord build_record(const RunResult& result, std::uint64_t prefill_wall_ns,
                           std::uint64_t decode_wall_ns);

/// Executes each spec and returns one record per spec, in order. When
/// `steps_out` is non-null it receives every run's step log, run-major.
std::vector<MetricsRecord> run_matrix(std::span<const RunSpec> specs,
                                      std::vector<StepRecord>* steps_out = nullptr);

/// Step logs of every sequence of a run, sequence-major, with `run` stamped.
std::vector<StepRecord> collect_steps(const RunResult& result, std::uint32_t run_index);

} // namespace pagedevict
