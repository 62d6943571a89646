// Copyright (c) 2026 pagedevict authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <mutex>
#include <vector>

#include "pagedevict/errors.hpp"
#include "pagedevict/page.hpp"

namespace pagedevict {

/// Fixed pool of physical pages with a LIFO free list. Pages are allocated
/// on demand and returned whole; allocate/release are safe to call from
/// multiple sequences concurrently. Page *contents* are not guarded: a page
/// belongs to exactly one block table between allocate and release.
class PagePool {
public:
    PagePool(std::size_t capacity, std::uint32_t page_size);

    /// Pops a free page, reset to empty. Throws PoolExhausted when none left.
    PageId allocate();

    /// Returns a page to the free list.
    void release(PageId id);

    Page& page(PageId id) { return pages_[id]; }
    const Page& page(PageId id) const { return pages_[id]; }

    std::uint32_t page_size() const { return page_size_; }
    std::size_t capacity() const { return pages_.size(); }
    std::size_t free_count() const;
    std::size_t allocated() const;

private:
    mutable std::mutex mutex_;
    std::vector<Page> pages_;
    std::vector<PageId> free_list_;
    std::uint32_t page_size_;
};

/// KV cache footprint in bytes for `seq_len` tokens: keys and values, all
/// layers and heads, at the given scalar width. Throws Overflow if the
/// product does not fit in 64 bits.
std::uint64_t memory_bytes(std::uint64_t seq_len, std::uint64_t layer_count,
                           std::uint64_t head_count, std::uint64_t head_dim,
                           std::uint64_t bytes_per_scalar);

} // namespace pagedevict
