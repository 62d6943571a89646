// Copyright (c) 2026 pagedevict authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "pagedevict/page_pool.hpp"

namespace pagedevict {

struct AppendOutcome {
    bool page_opened = false;
};

/// Ordered mapping from a sequence's logical blocks to physical pages.
/// Appends always target the newest page's write cursor; freed pages return
/// to the pool and the remaining entries close ranks, preserving logical
/// order. Owned by one sequence and mutated single-threaded.
class BlockTable {
public:
    explicit BlockTable(PagePool& pool) : pool_(&pool) {}
    ~BlockTable() { clear(); }

    BlockTable(const BlockTable&) = delete;
    BlockTable& operator=(const BlockTable&) = delete;

    BlockTable(BlockTable&& other) noexcept
        : pool_(other.pool_), entries_(std::move(other.entries_)),
          retained_len_(other.retained_len_) {
        other.entries_.clear();
        other.retained_len_ = 0;
    }

    BlockTable& operator=(BlockTable&& other) noexcept {
        if (this != &other) {
            clear();
            pool_ = other.pool_;
            entries_ = std::move(other.entries_);
            retained_len_ = other.retained_len_;
            other.entries_.clear();
            other.retained_len_ = 0;
        }
        return *this;
    }

    /// Writes `kv` into the next slot, opening a fresh page when the newest
    /// one is write-full (or none exists). Throws PoolExhausted.
    AppendOutcome append_token(KvVector kv);

    /// Returns the page at `logical_index` to the pool whole. Token
    /// positions are not renumbered. Throws IndexOutOfRange.
    void free_page(std::size_t logical_index);

    /// Clears the slot holding `position`, leaving a hole; the page is
    /// returned to the pool automatically once its fill reaches zero.
    /// Throws UnknownPosition.
    void evict_slot(std::uint64_t position);

    std::size_t page_count() const { return entries_.size(); }
    std::size_t retained_len() const { return retained_len_; }
    bool empty() const { return retained_len_ == 0; }

    const Page& page_at(std::size_t logical_index) const {
        return pool_->page(entries_[logical_index]);
    }
    PageId physical_id_at(std::size_t logical_index) const { return entries_[logical_index]; }

    /// 1 - retained_len / (N * B); 0 for an empty table.
    double fragmentation_ratio() const;

    /// Same ratio computed over all pages except the newest (the one still
    /// being written). 0 when at most one page is mapped.
    double fragmentation_ratio_excluding_newest() const;

    /// Currently retained positions in logical order (strictly increasing).
    std::vector<std::uint64_t> retained_positions() const;

    /// Visits retained tokens in logical order, skipping holes.
    template <typename Fn>
    void for_each_retained(Fn&& fn) const {
        for (PageId id : entries_) {
            const Page& page = pool_->page(id);
            for (std::uint32_t s = 0; s < page.write_cursor(); ++s) {
                if (page.occupied(s)) {
                    fn(page.at(s));
                }
            }
        }
    }

    /// Releases every mapped page back to the pool.
    void clear();

    PagePool& pool() { return *pool_; }

private:
    PagePool* pool_;
    std::vector<PageId> entries_;
    std::size_t retained_len_ = 0;
};

} // namespace pagedevict
