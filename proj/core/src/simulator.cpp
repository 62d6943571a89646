// Copyright (c) 2026 pagedevict authors
// SPDX-License-Identifier: Apache-2.0

#include "pagedevict/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iterator>
#include <limits>
#include <mutex>
#include <thread>

namespace pagedevict {

namespace {

// Salts for decoupled RNG streams.
constexpr std::uint64_t kWeightSalt = 0x77;
constexpr std::uint64_t kEmbeddingSalt = 0xE0;
constexpr std::uint64_t kNoiseSalt = 0x6E;

std::uint64_t now_ns() {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::steady_clock::now().time_since_epoch())
            .count());
}

/// y = M x with M row-major (rows x cols), double accumulation.
std::vector<float> matvec(std::span<const float> m, std::size_t rows, std::size_t cols,
                          std::span<const float> x) {
    std::vector<float> y(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        const float* row = m.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) {
            acc += static_cast<double>(row[c]) * static_cast<double>(x[c]);
        }
        y[r] = static_cast<float>(acc);
    }
    return y;
}

std::size_t pages_for(std::size_t tokens, std::uint32_t page_size) {
    return (tokens + page_size - 1) / page_size;
}

} // namespace

ToyModelWeights ToyModelWeights::make(std::uint32_t d_model, std::uint32_t head_count,
                                      std::uint32_t head_dim, std::uint32_t layer_count,
                                      std::uint64_t seed) {
    ToyModelWeights weights;
    weights.d_model = d_model;
    weights.head_count = head_count;
    weights.head_dim = head_dim;
    weights.seed = seed;
    const std::size_t proj = static_cast<std::size_t>(head_count) * head_dim;
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_model));
    weights.layers.reserve(layer_count);
    for (std::uint32_t l = 0; l < layer_count; ++l) {
        GaussianStream rng(derive_seed(seed, kWeightSalt + l));
        LayerWeights lw;
        lw.w_q = rng.draw(proj * d_model, scale);
        lw.w_k = rng.draw(proj * d_model, scale);
        lw.w_v = rng.draw(proj * d_model, scale);
        lw.w_o = rng.draw(static_cast<std::size_t>(d_model) * proj, scale);
        weights.layers.push_back(std::move(lw));
    }
    return weights;
}

void TraceConfig::validate() const {
    if (prefill_len == 0 || decode_len == 0 || batch == 0 || d_model == 0 ||
        head_count == 0 || head_dim == 0 || layer_count == 0) {
        throw Error("trace dimensions must be positive");
    }
}

std::size_t default_pool_pages(const PolicyConfig& policy, const TraceConfig& trace) {
    const std::uint32_t b = policy.page_size;
    std::size_t per_layer =
        pages_for(policy.cache_budget + b + trace.prefill_len, b);
    const bool keeps_old_pages = policy.kind == PolicyKind::FullCache ||
                                 policy.kind == PolicyKind::InvKeyL2 ||
                                 policy.kind == PolicyKind::KeyDiff;
    if (keeps_old_pages) {
        // Holes (or no eviction at all) can keep every page the trace ever
        // opens alive at once.
        per_layer = std::max(per_layer,
                             pages_for(trace.prefill_len + trace.decode_len + 1, b) + 1);
    }
    return per_layer * trace.layer_count * trace.batch;
}

SequenceState::SequenceState(const ToyModelWeights& weights, const PolicyConfig& policy_config,
                             const TraceConfig& trace, PagePool& pool, PagePool* shadow_pool,
                             std::uint32_t sequence_index)
    : weights_(&weights), trace_(&trace), policy_(make_policy(policy_config)),
      embedding_rng_(derive_seed(trace.seed, (kEmbeddingSalt << 32) + sequence_index)),
      noise_rng_(derive_seed(trace.seed, (kNoiseSalt << 32) + sequence_index)),
      seq_(sequence_index) {
    tables_.reserve(trace.layer_count);
    for (std::uint32_t l = 0; l < trace.layer_count; ++l) {
        tables_.emplace_back(pool);
    }
    if (shadow_pool != nullptr) {
        shadow_.emplace();
        shadow_->reserve(trace.layer_count);
        for (std::uint32_t l = 0; l < trace.layer_count; ++l) {
            shadow_->emplace_back(*shadow_pool);
        }
    }
}

std::vector<float> SequenceState::next_embedding() {
    std::vector<float> x;
    if (trace_->mode == GeneratorMode::ClosedLoop && !feedback_.empty()) {
        // x_{t+1} = normalize(W_O * attention output) + 0.1 * noise. Eviction
        // errors feed the next token, compounding as in real autoregression.
        const auto& lw = weights_->layers.back();
        const std::size_t proj = static_cast<std::size_t>(weights_->head_count) *
                                 weights_->head_dim;
        x = matvec(lw.w_o, weights_->d_model, proj, feedback_);
        const double norm = l2_norm(x);
        for (float& v : x) {
            v = static_cast<float>(v / std::max(norm, 1e-12));
        }
        for (float& v : x) {
            v += static_cast<float>(0.1 * noise_rng_.next());
        }
    } else {
        x = embedding_rng_.draw(weights_->d_model);
    }
    checksum_.update(x);
    return x;
}

KvVector SequenceState::project_kv(std::uint32_t layer, std::span<const float> embedding,
                                   std::uint64_t position) const {
    const auto& lw = weights_->layers[layer];
    const std::size_t proj = static_cast<std::size_t>(weights_->head_count) *
                             weights_->head_dim;
    return make_kv(matvec(lw.w_k, proj, weights_->d_model, embedding),
                   matvec(lw.w_v, proj, weights_->d_model, embedding), position);
}

std::vector<float> SequenceState::project_query(std::uint32_t layer,
                                                std::span<const float> embedding) const {
    const auto& lw = weights_->layers[layer];
    const std::size_t proj = static_cast<std::size_t>(weights_->head_count) *
                             weights_->head_dim;
    return matvec(lw.w_q, proj, weights_->d_model, embedding);
}

PrefillStats run_prefill(SequenceState& state) {
    const TraceConfig& trace = *state.trace_;
    const std::uint64_t started = now_ns();

    std::vector<std::vector<float>> embeddings;
    embeddings.reserve(trace.prefill_len);
    for (std::size_t t = 0; t < trace.prefill_len; ++t) {
        embeddings.push_back(state.next_embedding());
    }
    state.next_position_ = trace.prefill_len;

    PrefillStats stats;
    for (std::uint32_t l = 0; l < trace.layer_count; ++l) {
        std::vector<KvVector> tokens;
        tokens.reserve(trace.prefill_len);
        for (std::size_t t = 0; t < trace.prefill_len; ++t) {
            tokens.push_back(state.project_kv(l, embeddings[t], t));
        }
        if (state.shadow_) {
            for (const auto& kv : tokens) {
                (*state.shadow_)[l].append_token(kv);
            }
        }
        auto result = state.policy_->prefill_compress(std::move(tokens));
        stats.evicted += result.decision.positions.size();
        for (auto& kv : result.retained) {
            if (state.tables_[l].append_token(std::move(kv)).page_opened) {
                ++stats.pages_allocated;
            }
        }
    }

    // Closed-loop feedback seed: the last prompt token's attention output
    // over the compressed cache of the last layer.
    if (trace.mode == GeneratorMode::ClosedLoop) {
        const std::uint32_t last = trace.layer_count - 1;
        auto query = state.project_query(last, embeddings.back());
        state.feedback_ = attend({query, &state.tables_[last], trace.head_count,
                                  trace.head_dim});
    }

    stats.wall_ns = now_ns() - started;
    return stats;
}

std::vector<StepRecord> run_decode(SequenceState& state) {
    const TraceConfig& trace = *state.trace_;
    std::vector<StepRecord> log;
    log.reserve(trace.decode_len * trace.layer_count);
    const bool want_attention = state.shadow_.has_value() ||
                                trace.mode == GeneratorMode::ClosedLoop;

    for (std::size_t t = 1; t <= trace.decode_len; ++t) {
        const auto embedding = state.next_embedding();
        const std::uint64_t position = state.next_position_++;

        for (std::uint32_t l = 0; l < trace.layer_count; ++l) {
            KvVector kv = state.project_kv(l, embedding, position);
            if (state.shadow_) {
                (*state.shadow_)[l].append_token(kv);
            }
            auto decision =
                state.policy_->decode_step(state.tables_[l], std::move(kv),
                                           static_cast<std::int64_t>(t));

            StepRecord record;
            record.sequence = state.seq_;
            record.layer = l;
            record.step = static_cast<std::int64_t>(t);
            record.retained_len = state.tables_[l].retained_len();
            record.decision = std::move(decision);
            record.fragmentation = state.tables_[l].fragmentation_ratio();
            record.fragmentation_excl_newest =
                state.tables_[l].fragmentation_ratio_excluding_newest();
            record.deviation = std::numeric_limits<double>::quiet_NaN();

            if (want_attention) {
                auto query = state.project_query(l, embedding);
                auto output = attend({query, &state.tables_[l], trace.head_count,
                                      trace.head_dim});
                if (state.shadow_) {
                    auto reference = attend({query, &(*state.shadow_)[l],
                                             trace.head_count, trace.head_dim});
                    record.deviation = output_deviation(output, reference);
                }
                if (l == trace.layer_count - 1) {
                    state.feedback_ = std::move(output);
                }
            }
            log.push_back(std::move(record));
        }
    }
    return log;
}

RunResult run_trace(const PolicyConfig& policy, const TraceConfig& trace) {
    policy.validate();
    trace.validate();

    const auto weights = ToyModelWeights::make(trace.d_model, trace.head_count,
                                               trace.head_dim, trace.layer_count,
                                               derive_seed(trace.seed, kWeightSalt));
    const std::size_t pool_pages =
        trace.pool_pages != 0 ? trace.pool_pages : default_pool_pages(policy, trace);
    PagePool pool(pool_pages, policy.page_size);

    std::optional<PagePool> shadow_pool;
    if (trace.compute_deviation) {
        shadow_pool.emplace(pages_for(trace.prefill_len + trace.decode_len + 1,
                                      policy.page_size) *
                                trace.layer_count * trace.batch,
                            policy.page_size);
    }

    RunResult result;
    result.policy = policy;
    result.trace = trace;
    result.sequences.resize(trace.batch);

    std::uint32_t workers = trace.threads != 0
                                ? trace.threads
                                : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<std::uint32_t>(
        std::min<std::size_t>(workers, trace.batch));

    std::atomic<std::size_t> next_sequence{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;

    auto worker = [&]() {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::size_t s = next_sequence.fetch_add(1);
            if (s >= trace.batch) {
                return;
            }
            try {
                SequenceState state(weights, policy, trace, pool,
                                    shadow_pool ? &*shadow_pool : nullptr,
                                    static_cast<std::uint32_t>(s));
                SequenceResult& out = result.sequences[s];
                out.sequence = static_cast<std::uint32_t>(s);
                out.prefill = run_prefill(state);
                const std::uint64_t decode_started = now_ns();
                out.steps = run_decode(state);
                out.decode_wall_ns = now_ns() - decode_started;
                out.embedding_checksum = state.embedding_checksum();
                for (std::uint32_t l = 0; l < trace.layer_count; ++l) {
                    out.final_retained.push_back(state.table(l).retained_len());
                    out.final_positions.push_back(state.table(l).retained_positions());
                }
            } catch (const std::exception& e) {
                std::lock_guard lock(failure_mutex);
                failed.store(true);
                if (failure.empty()) {
                    failure = e.what();
                }
                return;
            }
        }
    };

    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (std::uint32_t w = 0; w < workers; ++w) {
            threads.emplace_back(worker);
        }
        for (auto& th : threads) {
            th.join();
        }
    }
    if (failed.load()) {
        throw Error("run failed: " + failure);
    }
    return result;
}

MetricsRecord build_record(const RunResult& result, std::uint64_t prefill_wall_ns,
                           std::uint64_t decode_wall_ns) {
    MetricsRecord rec;
    rec.policy = std::string(to_string(result.policy.kind));
    rec.cache_budget = result.policy.cache_budget;
    rec.page_size = result.policy.page_size;
    rec.prefill_len = result.trace.prefill_len;
    rec.decode_steps = result.trace.decode_len;
    rec.batch = result.trace.batch;
    rec.layer_count = result.trace.layer_count;
    rec.seed = result.trace.seed;
    rec.prefill_wall_ns = prefill_wall_ns;
    rec.decode_wall_ns = decode_wall_ns;

    double frag_sum = 0.0;
    std::size_t frag_count = 0;
    std::vector<double> deviations;
    for (const auto& seq : result.sequences) {
        rec.prefill_evicted += seq.prefill.evicted;
        for (const auto& step : seq.steps) {
            switch (step.decision.kind) {
            case EvictionDecision::Kind::None:
                break;
            case EvictionDecision::Kind::Tokens:
                ++rec.evictions_total;
                ++rec.block_table_updates;
                rec.token_evictions += step.decision.positions.size();
                break;
            case EvictionDecision::Kind::Page:
                ++rec.evictions_total;
                ++rec.block_table_updates;
                ++rec.page_evictions;
                break;
            }
            frag_sum += step.fragmentation;
            ++frag_count;
            rec.max_fragmentation = std::max(rec.max_fragmentation, step.fragmentation);
            rec.max_fragmentation_excl_newest = std::max(
                rec.max_fragmentation_excl_newest, step.fragmentation_excl_newest);
            if (!std::isnan(step.deviation)) {
                deviations.push_back(step.deviation);
            }
        }
        for (std::size_t retained : seq.final_retained) {
            rec.retained_bytes += memory_bytes(retained, 1, result.trace.head_count,
                                               result.trace.head_dim, 2);
        }
    }
    if (frag_count > 0) {
        rec.mean_fragmentation = frag_sum / static_cast<double>(frag_count);
    }
    if (!deviations.empty()) {
        double sum = 0.0;
        for (double d : deviations) {
            sum += d;
        }
        rec.mean_deviation = sum / static_cast<double>(deviations.size());
        std::sort(deviations.begin(), deviations.end());
        const std::size_t idx = static_cast<std::size_t>(
            std::ceil(0.95 * static_cast<double>(deviations.size()))) - 1;
        rec.p95_deviation = deviations[std::min(idx, deviations.size() - 1)];
    }
    return rec;
}

std::vector<MetricsRecord> run_matrix(std::span<const RunSpec> specs,
                                      std::vector<StepRecord>* steps_out) {
    std::vector<MetricsRecord> records;
    records.reserve(specs.size());
    std::uint32_t run_index = 0;
    for (const auto& spec : specs) {
        const std::uint32_t reps = std::max(1u, spec.reps);
        std::vector<std::uint64_t> prefill_ns;
        std::vector<std::uint64_t> decode_ns;
        std::optional<RunResult> kept;
        for (std::uint32_t r = 0; r < reps; ++r) {
            RunResult result = run_trace(spec.policy, spec.trace);
            std::uint64_t prefill_total = 0;
            std::uint64_t decode_total = 0;
            for (const auto& seq : result.sequences) {
                prefill_total += seq.prefill.wall_ns;
                decode_total += seq.decode_wall_ns;
            }
            const bool warmup = reps > 1 && r == 0;
            if (!warmup) {
                prefill_ns.push_back(prefill_total);
                decode_ns.push_back(decode_total);
            }
            if (!kept) {
                kept = std::move(result);
            }
        }
        auto median = [](std::vector<std::uint64_t>& v) -> std::uint64_t {
            std::sort(v.begin(), v.end());
            return v[v.size() / 2];
        };
        records.push_back(build_record(*kept, median(prefill_ns), median(decode_ns)));
        if (steps_out != nullptr) {
            auto steps = collect_steps(*kept, run_index);
            steps_out->insert(steps_out->end(), std::make_move_iterator(steps.begin()),
                              std::make_move_iterator(steps.end()));
        }
        ++run_index;
    }
    return records;
}

std::vector<StepRecord> collect_steps(const RunResult& result, std::uint32_t run_index) {
    std::vector<StepRecord> steps;
    for (const auto& seq : result.sequences) {
        for (const auto& step : seq.steps) {
            steps.push_back(step);
            steps.back().run = run_index;
        }
    }
    return steps;
}

} // namespace pagedevict
