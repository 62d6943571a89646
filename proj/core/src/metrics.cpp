// Copyright (c) 2026 pagedevict authors
// SPDX-License-Identifier: Apache-2.0

#include "pagedevict/metrics.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

namespace pagedevict {

namespace {

/// Shortest round-trip decimal form, locale-independent.
std::string format_double(double value) {
    std::array<char, 64> buf;
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

std::string quote_csv(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) {
        return field;
    }
    std::string quoted = "\"";
    for (char c : field) {
        if (c == '"') {
            quoted += '"';
        }
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

} // namespace

std::string emit_csv(std::span<const MetricsRecord> records) {
    std::ostringstream out;
    out << "policy,cache_budget,page_size,prefill_len,decode_steps,batch,layer_count,seed,"
           "prefill_evicted,evictions_total,page_evictions,token_evictions,"
           "block_table_updates,mean_fragmentation,max_fragmentation,"
           "max_fragmentation_excl_newest,mean_deviation,p95_deviation,retained_bytes,"
           "prefill_wall_ns,decode_wall_ns\n";
    for (const auto& r : records) {
        out << quote_csv(r.policy) << ',' << r.cache_budget << ',' << r.page_size << ','
            << r.prefill_len << ',' << r.decode_steps << ',' << r.batch << ','
            << r.layer_count << ',' << r.seed << ',' << r.prefill_evicted << ','
            << r.evictions_total << ',' << r.page_evictions << ',' << r.token_evictions
            << ',' << r.block_table_updates << ',' << format_double(r.mean_fragmentation)
            << ',' << format_double(r.max_fragmentation) << ','
            << format_double(r.max_fragmentation_excl_newest) << ','
            << format_double(r.mean_deviation) << ',' << format_double(r.p95_deviation)
            << ',' << r.retained_bytes << ',' << r.prefill_wall_ns << ','
            << r.decode_wall_ns << '\n';
    }
    return out.str();
}

std::string emit_jsonl(std::span<const StepRecord> steps) {
    std::string out;
    for (const auto& s : steps) {
        nlohmann::ordered_json line;
        line["run"] = s.run;
        line["seq"] = s.sequence;
        line["layer"] = s.layer;
        line["step"] = s.step;
        line["retained_len"] = s.retained_len;
        nlohmann::ordered_json decision;
        switch (s.decision.kind) {
        case EvictionDecision::Kind::None:
            decision["kind"] = nullptr;
            break;
        case EvictionDecision::Kind::Tokens:
            decision["kind"] = "tokens";
            decision["positions"] = s.decision.positions;
            break;
        case EvictionDecision::Kind::Page:
            decision["kind"] = "page";
            decision["logical_index"] = s.decision.logical_index;
            break;
        }
        line["decision"] = std::move(decision);
        line["fragmentation"] = s.fragmentation;
        if (std::isnan(s.deviation)) {
            line["deviation"] = nullptr;
        } else {
            line["deviation"] = s.deviation;
        }
        out += line.dump();
        out += '\n';
    }
    return out;
}

std::vector<SummaryRow> summarize(std::span<const MetricsRecord> records) {
    if (records.empty()) {
        throw EmptyInput("summarize requires at least one record");
    }
    // Keyed by policy spelling; emitted in PolicyKind order.
    std::map<std::string, SummaryRow> rows;
    for (const auto& r : records) {
        SummaryRow& row = rows[r.policy];
        row.policy = r.policy;
        ++row.runs;
        row.evictions_total += r.evictions_total;
        row.block_table_updates += r.block_table_updates;
        row.max_fragmentation_excl_newest =
            std::max(row.max_fragmentation_excl_newest, r.max_fragmentation_excl_newest);
        row.mean_deviation += r.mean_deviation;
    }
    double paged_updates = 0.0;
    if (auto it = rows.find(std::string(to_string(PolicyKind::PagedEviction)));
        it != rows.end()) {
        paged_updates = static_cast<double>(it->second.block_table_updates);
    }
    std::vector<SummaryRow> ordered;
    for (PolicyKind kind : {PolicyKind::PagedEviction, PolicyKind::StreamingLlm,
                            PolicyKind::InvKeyL2, PolicyKind::KeyDiff, PolicyKind::FullCache}) {
        auto it = rows.find(std::string(to_string(kind)));
        if (it == rows.end()) {
            continue;
        }
        SummaryRow row = it->second;
        row.mean_deviation /= static_cast<double>(row.runs);
        row.cadence_ratio =
            paged_updates > 0.0
                ? static_cast<double>(row.block_table_updates) / paged_updates
                : std::numeric_limits<double>::quiet_NaN();
        ordered.push_back(std::move(row));
    }
    return ordered;
}

std::string format_summary(std::span<const SummaryRow> rows) {
    auto fixed = [](double value) {
        std::ostringstream s;
        s << std::fixed << std::setprecision(4) << value;
        return s.str();
    };
    std::ostringstream out;
    out << std::left << std::setw(16) << "policy" << std::right << std::setw(6) << "runs"
        << std::setw(11) << "evictions" << std::setw(15) << "table_updates"
        << std::setw(10) << "cadence" << std::setw(22) << "max_frag_excl_newest"
        << std::setw(16) << "mean_deviation" << '\n';
    for (const auto& r : rows) {
        out << std::left << std::setw(16) << r.policy << std::right << std::setw(6)
            << r.runs << std::setw(11) << r.evictions_total << std::setw(15)
            << r.block_table_updates << std::setw(10)
            << (std::isnan(r.cadence_ratio) ? std::string("n/a") : fixed(r.cadence_ratio))
            << std::setw(22) << fixed(r.max_fragmentation_excl_newest) << std::setw(16)
            << fixed(r.mean_deviation) << '\n';
    }
    return out.str();
}

} // namespace pagedevict
