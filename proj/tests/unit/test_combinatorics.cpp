#include "fermi/combinatorics.hpp"

#include <doctest.h>
#include <set>

using namespace fermi;

TEST_CASE("partition counts are Bell numbers") {
    const long long bell[] = {1, 2, 5, 15, 52, 203, 877, 4140};
    for (int n = 1; n <= 8; ++n) {
        auto ps = enumerate_partitions(n);
        CHECK(ps.size() == std::size_t(bell[n - 1]));
        std::set<std::string> seen;
        for (const auto& p : ps) seen.insert(p.to_string());
        CHECK(seen.size() == ps.size());
    }
    CHECK_THROWS_AS(enumerate_partitions(0), GuardError);
    CHECK_THROWS_AS(enumerate_partitions(9), GuardError);
}

TEST_CASE("partition invariants") {
    for (const auto& g : enumerate_partitions(5)) {
        int total = 0;
        for (const auto& p : g.parts()) total += int(p.size());
        CHECK(total == 5);
        CHECK(int(g.g_in().size()) == g.num_parts());
        CHECK(int(g.g_out().size()) == g.num_parts());
    }
    CHECK_THROWS(Partition(3, {{0, 1}}));
    CHECK_THROWS(Partition(3, {{0, 1}, {1, 2}}));
}

TEST_CASE("type I classification") {
    CHECK(is_type_one(Partition::from_one_based(3, {{1, 2}, {3}})));
    CHECK_FALSE(is_type_one(Partition::from_one_based(5, {{1, 4}, {2, 3, 5}})));
    for (int n = 1; n <= 6; ++n) {
        int count = 0;
        for (const auto& g : enumerate_partitions(n)) count += is_type_one(g);
        CHECK(count == (1 << (n - 1)));
        CHECK(enumerate_type_one(n).size() == std::size_t(1 << (n - 1)));
        for (const auto& g : enumerate_type_one(n)) CHECK(is_type_one(g));
    }
}

TEST_CASE("matching counts") {
    CHECK(enumerate_matchings(0, 3).size() == 1);
    CHECK(enumerate_matchings(0, 3)[0].pairs.empty());
    CHECK(enumerate_matchings(2, 2).size() == 7);
    CHECK(enumerate_matchings(3, 3).size() == 34);
    for (int m = 0; m <= 5; ++m)
        for (int n = 0; n <= 5; ++n)
            CHECK(enumerate_matchings(m, n).size() == std::size_t(matching_count(m, n)));
    CHECK_THROWS_AS(enumerate_matchings(7, 1), GuardError);
}

TEST_CASE("crossing-line sign of the worked diagram") {
    const auto g = Partition::from_one_based(5, {{1, 4}, {2, 3, 5}});
    CHECK(g.g_out() == std::vector<int>{3, 4});
    CHECK(g.g_in() == std::vector<int>{0, 1});
    // exactly the pairs (2,1), (4,3), (5,4) in 1-based labels
    std::set<std::pair<int, int>> pairs;
    for (int i = 0; i < 5; ++i)
        for (int j = i + 1; j < 5; ++j)
            if (crosses(g, j, i)) pairs.insert({j + 1, i + 1});
    CHECK(pairs == std::set<std::pair<int, int>>{{2, 1}, {4, 3}, {5, 4}});
    CHECK(sign_xi(g, Bits(5, 1), Bits(5, 1)) == 3);
    CHECK(crossing_condition(g, 1, 0) == Crossing::InUnderLine);
    CHECK(crossing_condition(g, 3, 2) == Crossing::Nested);
    CHECK(crossing_condition(g, 4, 3) == Crossing::OutOverLine);
}

TEST_CASE("singleton partition sign") {
    CHECK(sign_xi(Partition::singletons(1), {1}, {1}) == 0);
    CHECK(sign_xi(Partition::singletons(2), {1, 0}, {0, 1}) == 1);
    for (int n = 1; n <= 4; ++n) {
        const auto g = Partition::singletons(n);
        for (int am = 0; am < (1 << n); ++am)
            for (int bm = 0; bm < (1 << n); ++bm) {
                Bits a(n), b(n);
                for (int k = 0; k < n; ++k) {
                    a[k] = am >> k & 1;
                    b[k] = bm >> k & 1;
                }
                int expect = 0;
                for (int i = 0; i < n; ++i)
                    for (int j = i + 1; j < n; ++j) expect += b[j] * a[i];
                CHECK(sign_xi(g, a, b) == expect);
                CHECK(crossing_condition(g, n - 1, 0) == (n > 1 ? Crossing::OutIn : Crossing::None));
            }
    }
    CHECK_THROWS_AS(sign_xi(Partition::singletons(2), {1}, {1, 1}), DimensionError);
}

TEST_CASE("sign ignores alpha where no crossing uses it") {
    for (const auto& g : enumerate_partitions(4))
        for (int i = 0; i < 4; ++i) {
            bool used = false;
            for (int j = i + 1; j < 4; ++j) used |= crosses(g, j, i);
            if (used) continue;
            Bits a(4, 1), b(4, 1);
            const int x = sign_xi(g, a, b);
            a[i] = 0;
            CHECK(sign_xi(g, a, b) == x);
        }
}

TEST_CASE("matching sign") {
    Matching empty{2, 2, {}};
    CHECK(sign_xi_matching(empty, {0, 0}, {0, 0}) == 0);
    Matching one{1, 1, {{0, 0}}};
    CHECK(sign_xi_matching(one, {1}, {1}) == 0);
    Matching none{1, 1, {}};
    CHECK(sign_xi_matching(none, {1}, {1}) == 1);
    CHECK(matching_partition(one).to_string() == "{{1,2}}");
}

TEST_CASE("occupation profiles") {
    auto p = occupation_profile(Partition::singletons(3));
    CHECK(p.counts == std::vector<int>{3});
    CHECK(p.E() == 3);
    CHECK(p.N() == 3);
    auto q = occupation_profile(Partition::from_one_based(5, {{1, 4}, {2, 3, 5}}));
    CHECK(q.counts == std::vector<int>{0, 1, 1});
    CHECK(q.E() == 5);
    CHECK(q.N() == 2);
    for (const auto& g : enumerate_partitions(4)) CHECK(occupation_profile(g).E() == 4);
    // profile classes cover the Bell number
    std::size_t total = 0;
    for (auto prof : {OccupationProfile{{4}}, OccupationProfile{{2, 1}}, OccupationProfile{{0, 2}},
                      OccupationProfile{{1, 0, 1}}, OccupationProfile{{0, 0, 0, 1}}})
        total += partitions_with_profile(prof).size();
    CHECK(total == 15);
    CHECK(partitions_with_profile(OccupationProfile{{0, 2, 0}}).size() == 3);
}
