// Copyright (c) 2026 pagedevict authors
// SPDX-License-Identifier: Apache-2.0

#include "pagedevict/importance.hpp"

#include <algorithm>
#include <string>

namespace pagedevict {

double token_importance(const KvVector& kv) {
    return kv.value_norm / std::max(kv.key_norm, kNormEpsilon);
}

TokenScore token_score(const KvVector& kv) {
    return TokenScore{kv.position, token_importance(kv)};
}

PageScore page_score(const Page& page, std::size_t logical_index) {
    if (page.fill() == 0) {
        throw EmptyPage();
    }
    double sum = 0.0;
    for (std::uint32_t s = 0; s < page.write_cursor(); ++s) {
        if (page.occupied(s)) {
            sum += token_importance(page.at(s));
        }
    }
    return PageScore{logical_index, sum / page.fill(), page.fill()};
}

std::vector<PageScore> score_pages(const BlockTable& table) {
    std::vector<PageScore> scores;
    scores.reserve(table.page_count());
    for (std::size_t j = 0; j < table.page_count(); ++j) {
        scores.push_back(page_score(table.page_at(j), j));
    }
    return scores;
}

std::vector<std::uint64_t> rank_tokens(std::span<const TokenScore> scores, std::size_t k) {
    if (k > scores.size()) {
        throw KTooLarge("k = " + std::to_string(k) + " exceeds " +
                        std::to_string(scores.size()) + " scored tokens");
    }
    std::vector<TokenScore> order(scores.begin(), scores.end());
    std::sort(order.begin(), order.end(), [](const TokenScore& a, const TokenScore& b) {
        if (a.score != b.score) {
            return a.score < b.score;
        }
        return a.position < b.position;
    });
    std::vector<std::uint64_t> selected;
    selected.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        selected.push_back(order[i].position);
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

std::size_t rank_pages(std::span<const PageScore> scores) {
    if (scores.empty()) {
        throw NoEligiblePage();
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i].score < scores[best].score ||
            (scores[i].score == scores[best].score &&
             scores[i].logical_index < scores[best].logical_index)) {
            best = i;
        }
    }
    return scores[best].logical_index;
}

} // namespace pagedevict
