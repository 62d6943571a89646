// Copyright (c) 2026 pagedevict authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pagedevict/policy.hpp"

namespace pagedevict {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Validates an eviction-decision log against the expected PagedEviction
/// cadence: exactly floor(D / B) page evictions over D decode steps past
/// budget, each exactly at a page boundary, and nothing else.
CheckResult check_trigger_cadence(std::span<const EvictionDecision> decisions,
                                  std::uint32_t page_size, std::uint64_t decode_steps);

/// Validates a retained-length trajectory against the budget bound:
/// PagedEviction stays in (C - B, C + B] once past budget and returns to C
/// at each trigger; per-step evictors stay <= C at rest.
CheckResult check_budget_bound(PolicyKind kind, std::span<const std::size_t> retained,
                               std::size_t cache_budget, std::uint32_t page_size);

/// Runs the built-in verification suite: scoring and ranking oracles, the
/// dense attention oracle, budget/cadence properties over seeded traces,
/// page conservation under random operation sequences, and determinism of
/// repeated runs. The seed varies the data, never the verdicts.
std::vector<CheckResult> run_selfchecks(std::uint64_t seed);

} // namespace pagedevict
