#include <doctest.h>

#include "pagedevict/selfcheck.hpp"

using namespace pagedevict;

namespace {

/// Decision log of a healthy PagedEviction trace: one page eviction at every
/// page boundary, None elsewhere.
std::vector<EvictionDecision> healthy_log(std::uint32_t page_size, std::uint64_t steps) {
    std::vector<EvictionDecision> log;
    for (std::uint64_t t = 1; t <= steps; ++t) {
        if (t % page_size == 0) {
            log.push_back(EvictionDecision::page(0, static_cast<std::int64_t>(t)));
        } else {
            log.push_back(EvictionDecision::none(static_cast<std::int64_t>(t)));
        }
    }
    return log;
}

} // namespace

TEST_CASE("cadence check accepts a healthy trace") {
    auto log = healthy_log(16, 160);
    auto result = check_trigger_cadence(log, 16, 160);
    CHECK(result.passed);
    CHECK(result.name == "trigger cadence");
}

TEST_CASE("cadence check catches a skipped budget guard") {
    // A policy without the budget guard fires a spurious eviction on the
    // first boundary after prefill (one extra Page decision off-cadence).
    auto log = healthy_log(16, 160);
    log.insert(log.begin(), EvictionDecision::page(0, 0));
    auto result = check_trigger_cadence(log, 16, 160);
    CHECK(!result.passed);
    CHECK(result.name == "trigger cadence");
    CHECK(result.detail.find("expected 10") != std::string::npos);
}

TEST_CASE("cadence check catches off-boundary page evictions") {
    auto log = healthy_log(16, 160);
    log[4] = EvictionDecision::page(1, 5);
    log[15] = EvictionDecision::none(16);
    auto result = check_trigger_cadence(log, 16, 160);
    CHECK(!result.passed);
    CHECK(result.detail.find("off the page boundary") != std::string::npos);
}

TEST_CASE("budget bound check flags violations") {
    std::vector<std::size_t> fine = {64, 65, 70, 80, 64, 65};
    CHECK(check_budget_bound(PolicyKind::PagedEviction, fine, 64, 16).passed);

    std::vector<std::size_t> runaway = {64, 70, 81};  // exceeds C + B
    CHECK(!check_budget_bound(PolicyKind::PagedEviction, runaway, 64, 16).passed);

    std::vector<std::size_t> leak = {64, 65};  // per-step evictor above C at rest
    CHECK(!check_budget_bound(PolicyKind::StreamingLlm, leak, 64, 16).passed);

    std::vector<std::size_t> unbounded = {100, 200};
    CHECK(check_budget_bound(PolicyKind::FullCache, unbounded, 64, 16).passed);
}

TEST_CASE("the self-check suite passes for several seeds") {
    for (std::uint64_t seed : {0ULL, 42ULL, 20260809ULL}) {
        auto results = run_selfchecks(seed);
        REQUIRE(results.size() == 6);
        for (const auto& r : results) {
            INFO(r.name, ": ", r.detail);
            CHECK(r.passed);
        }
    }
}
