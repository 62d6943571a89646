// Copyright (c) 2026 pagedevict authors
// SPDX-License-Identifier: Apache-2.0

#include "pagedevict/block_table.hpp"

#include <string>

namespace pagedevict {

AppendOutcome BlockTable::append_token(KvVector kv) {
    AppendOutcome outcome;
    if (entries_.empty() || pool_->page(entries_.back()).write_full()) {
        entries_.push_back(pool_->allocate());
        outcome.page_opened = true;
    }
    pool_->page(entries_.back()).write(std::move(kv));
    ++retained_len_;
    return outcome;
}

void BlockTable::free_page(std::size_t logical_index) {
    if (logical_index >= entries_.size()) {
        throw IndexOutOfRange("logical page index " + std::to_string(logical_index) +
                              " out of range, table has " + std::to_string(entries_.size()) +
                              " pages");
    }
    PageId id = entries_[logical_index];
    retained_len_ -= pool_->page(id).fill();
    pool_->release(id);
    entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(logical_index));
}

void BlockTable::evict_slot(std::uint64_t position) {
    for (std::size_t logical = 0; logical < entries_.size(); ++logical) {
        Page& page = pool_->page(entries_[logical]);
        if (page.evict(position)) {
            --retained_len_;
            if (page.fill() == 0) {
                pool_->release(entries_[logical]);
                entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(logical));
            }
            return;
        }
    }
    throw UnknownPosition("no retained token at position " + std::to_string(position));
}

double BlockTable::fragmentation_ratio() const {
    if (entries_.empty()) {
        return 0.0;
    }
    const double slots = static_cast<double>(entries_.size()) * pool_->page_size();
    return 1.0 - static_cast<double>(retained_len_) / slots;
}

double BlockTable::fragmentation_ratio_excluding_newest() const {
    if (entries_.size() <= 1) {
        return 0.0;
    }
    const std::size_t newest_fill = pool_->page(entries_.back()).fill();
    const double slots = static_cast<double>(entries_.size() - 1) * pool_->page_size();
    return 1.0 - static_cast<double>(retained_len_ - newest_fill) / slots;
}

std::vector<std::uint64_t> BlockTable::retained_positions() const {
    std::vector<std::uint64_t> positions;
    positions.reserve(retained_len_);
    for_each_retained([&](const KvVector& kv) { positions.push_back(kv.position); });
    return positions;
}

void BlockTable::clear() {
    for (PageId id : entries_) {
        pool_->release(id);
    }
    entries_.clear();
    retained_len_ = 0;
}

} // namespace pagedevict
