// Copyright (c) 2026 pagedevict authors
// SPDX-License-Identifier: Apache-2.0

#include "pagedevict/page_pool.hpp"

namespace pagedevict {

PagePool::PagePool(std::size_t capacity, std::uint32_t page_size)
    : page_size_(page_size) {
    if (page_size == 0) {
        throw Error("page size must be positive");
    }
    pages_.reserve(capacity);
    free_list_.reserve(capacity);
    for (std::size_t i = 0; i < capacity; ++i) {
        pages_.emplace_back(page_size, static_cast<PageId>(i));
    }
    // LIFO free list; popping from the back hands out low ids first.
    for (std::size_t i = capacity; i > 0; --i) {
        free_list_.push_back(static_cast<PageId>(i - 1));
    }
}

PageId PagePool::allocate() {
    std::lock_guard lock(mutex_);
    if (free_list_.empty()) {
        throw PoolExhausted();
    }
    PageId id = free_list_.back();
    free_list_.pop_back();
    pages_[id].reset();
    return id;
}

void PagePool::release(PageId id) {
    std::lock_guard lock(mutex_);
    free_list_.push_back(id);
}

std::size_t PagePool::free_count() const {
    std::lock_guard lock(mutex_);
    return free_list_.size();
}

std::size_t PagePool::allocated() const {
    std::lock_guard lock(mutex_);
    return pages_.size() - free_list_.size();
}

std::uint64_t memory_bytes(std::uint64_t seq_len, std::uint64_t layer_count,
                           std::uint64_t head_count, std::uint64_t head_dim,
                           std::uint64_t bytes_per_scalar) {
    std::uint64_t total = 2;
    for (std::uint64_t factor : {seq_len, layer_count, head_count, head_dim, bytes_per_scalar}) {
        if (factor != 0 && total > UINT64_MAX / factor) {
            throw Overflow("KV cache byte count exceeds 64 bits");
        }
        total *= factor;
    }
    return total;
}

} // namespace pagedevict
