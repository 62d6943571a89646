#include <doctest.h>

#include <cstring>

#include "pagedevict/attention.hpp"
#include "pagedevict/rng.hpp"

#include "oracles.hpp"

using namespace pagedevict;

TEST_CASE("a single retained token returns its value exactly") {
    PagePool pool(1, 4);
    BlockTable table(pool);
    table.append_token(make_kv({0.3f, -0.7f, 1.1f, 0.2f}, {4.0f, 3.0f, 2.0f, 1.0f}, 0));
    std::vector<float> query = {1.0f, 1.0f, 1.0f, 1.0f};
    auto out = attend({query, &table, 2, 2});
    CHECK(out == std::vector<float>{4.0f, 3.0f, 2.0f, 1.0f});
}

TEST_CASE("identical keys give the mean of the values") {
    PagePool pool(1, 4);
    BlockTable table(pool);
    table.append_token(make_kv({1.0f, 2.0f}, {2.0f, 0.0f}, 0));
    table.append_token(make_kv({1.0f, 2.0f}, {4.0f, 6.0f}, 1));
    std::vector<float> query = {0.5f, -0.25f};
    auto out = attend({query, &table, 1, 2});
    CHECK(out[0] == doctest::Approx(3.0f));
    CHECK(out[1] == doctest::Approx(3.0f));
}

TEST_CASE("paged attention matches the dense oracle") {
    GaussianStream rng(90);
    PagePool pool(16, 16);
    BlockTable table(pool);
    std::vector<KvVector> dense;
    for (std::uint64_t i = 0; i < 48; ++i) {
        auto kv = oracle::random_kv(rng, 32, i);  // H=4, d=8
        dense.push_back(kv);
        table.append_token(std::move(kv));
    }
    auto query = rng.draw(32);
    auto paged = attend({query, &table, 4, 8});
    auto expected = oracle::dense_attention(dense, query, 4, 8);
    CHECK(output_deviation(paged, expected) < 1e-5);
}

TEST_CASE("attention skips holes") {
    GaussianStream rng(91);
    PagePool pool(4, 8);
    BlockTable table(pool);
    std::vector<KvVector> all;
    for (std::uint64_t i = 0; i < 24; ++i) {
        auto kv = oracle::random_kv(rng, 16, i);
        all.push_back(kv);
        table.append_token(std::move(kv));
    }
    for (std::uint64_t victim : {2, 3, 11, 17, 23}) {
        table.evict_slot(victim);
    }
    std::vector<KvVector> survivors;
    for (const auto& kv : all) {
        if (kv.position != 2 && kv.position != 3 && kv.position != 11 &&
            kv.position != 17 && kv.position != 23) {
            survivors.push_back(kv);
        }
    }
    auto query = rng.draw(16);
    auto paged = attend({query, &table, 2, 8});
    auto expected = oracle::dense_attention(survivors, query, 2, 8);
    CHECK(output_deviation(paged, expected) < 1e-5);
}

TEST_CASE("softmax weights sum to one per head") {
    GaussianStream rng(92);
    PagePool pool(8, 16);
    BlockTable table(pool);
    for (std::uint64_t i = 0; i < 100; ++i) {
        table.append_token(oracle::random_kv(rng, 24, i));
    }
    auto query = rng.draw(24);
    auto detail = attend_detailed({query, &table, 3, 8});
    REQUIRE(detail.weight_sums.size() == 3);
    for (double sum : detail.weight_sums) {
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("physical page placement does not change the output") {
    GaussianStream rng(93);
    std::vector<KvVector> tokens;
    for (std::uint64_t i = 0; i < 40; ++i) {
        tokens.push_back(oracle::random_kv(rng, 16, i));
    }
    auto query = rng.draw(16);

    // Straight append: physical ids 0,1,2,...
    PagePool pool_a(8, 8);
    BlockTable table_a(pool_a);
    for (const auto& kv : tokens) {
        table_a.append_token(kv);
    }

    // Same logical content on scrambled physical ids: churn the pool first so
    // the free list hands out a different order.
    PagePool pool_b(8, 8);
    BlockTable scratch(pool_b);
    for (std::uint64_t i = 0; i < 24; ++i) {
        scratch.append_token(tokens[i % tokens.size()]);
    }
    scratch.free_page(1);
    scratch.free_page(0);
    BlockTable table_b(pool_b);
    for (const auto& kv : tokens) {
        table_b.append_token(kv);
    }
    scratch.clear();

    bool ids_differ = false;
    for (std::size_t j = 0; j < table_a.page_count(); ++j) {
        if (table_a.physical_id_at(j) != table_b.physical_id_at(j)) {
            ids_differ = true;
        }
    }
    CHECK(ids_differ);

    auto out_a = attend({query, &table_a, 2, 8});
    auto out_b = attend({query, &table_b, 2, 8});
    REQUIRE(out_a.size() == out_b.size());
    CHECK(std::memcmp(out_a.data(), out_b.data(), out_a.size() * sizeof(float)) == 0);
}

TEST_CASE("attention error paths") {
    PagePool pool(1, 4);
    BlockTable table(pool);
    std::vector<float> query = {1.0f, 1.0f};
    CHECK_THROWS_AS(attend({query, &table, 1, 2}), EmptyCache);

    table.append_token(make_kv({1.0f, 0.0f}, {1.0f, 0.0f}, 0));
    CHECK_THROWS_AS(attend({query, &table, 2, 2}), LengthMismatch);
}

TEST_CASE("output deviation") {
    std::vector<float> a = {1.0f, 2.0f, -3.0f};
    CHECK(output_deviation(a, a) == 0.0);

    std::vector<float> twice = {2.0f, 4.0f, -6.0f};
    CHECK(output_deviation(twice, a) == doctest::Approx(1.0));

    std::vector<float> shorter = {1.0f};
    CHECK_THROWS_AS(output_deviation(shorter, a), LengthMismatch);
}
