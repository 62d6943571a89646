// Copyright (c) 2026 pagedevict authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cassert>
#include <cstdint>
#include <optional>
#include <vector>

#include "pagedevict/kv_vector.hpp"

namespace pagedevict {

using PageId = std::uint32_t;

/// A fixed-size block of token slots. Writes fill slots 0..B-1 in order
/// (`write_cursor` tracks the next write slot); per-token eviction clears a
/// slot without moving its neighbours, so unstructured policies leave holes.
/// `fill` counts occupied slots and is always <= write_cursor.
class Page {
public:
    Page(std::uint32_t slot_count, PageId physical_id)
        : slots_(slot_count), physical_id_(physical_id) {}

    std::uint32_t slot_count() const { return static_cast<std::uint32_t>(slots_.size()); }
    std::uint32_t fill() const { return fill_; }
    std::uint32_t write_cursor() const { return cursor_; }
    bool write_full() const { return cursor_ == slots_.size(); }
    PageId physical_id() const { return physical_id_; }

    bool occupied(std::uint32_t slot) const { return slots_[slot].has_value(); }

    const KvVector& at(std::uint32_t slot) const {
        assert(slots_[slot].has_value());
        return *slots_[slot];
    }

    void write(KvVector kv) {
        assert(!write_full());
        slots_[cursor_] = std::move(kv);
        ++cursor_;
        ++fill_;
    }

    /// Clears the slot holding `position`. Returns false if not present.
    bool evict(std::uint64_t position) {
        for (std::uint32_t s = 0; s < cursor_; ++s) {
            if (slots_[s] && slots_[s]->position == position) {
                slots_[s].reset();
                --fill_;
                return true;
            }
        }
        return false;
    }

    void reset() {
        for (auto& slot : slots_) {
            slot.reset();
        }
        cursor_ = 0;
        fill_ = 0;
    }

private:
    std::vector<std::optional<KvVector>> slots_;
    std::uint32_t cursor_ = 0;
    std::uint32_t fill_ = 0;
    PageId physical_id_ = 0;
};

} // namespace pagedevict
