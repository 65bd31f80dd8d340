#include <doctest.h>

#include <algorithm>
#include <set>

#include "qcf/curation.hpp"
#include "test_util.hpp"

using namespace qcf;

namespace {

ScoredSet make_scored(const std::vector<std::pair<std::string, double>>& rows) {
    ScoredSet scored;
    scored.set.dim = 1;
    for (const auto& [id, score] : rows) {
        scored.set.records.push_back(
            qcf::test::make_record(id, Label::fake, {0.0f}));
        scored.scores.push_back(score);
    }
    return scored;
}

std::set<std::string> ids_of(const FeatureSet& s) {
    std::set<std::string> out;
    for (const auto& r : s.records) out.insert(r.id);
    return out;
}

}  // namespace

TEST_CASE("hold_out_test basics") {
    Rng rng(2);
    const FeatureSet pool = qcf::test::random_set(100, 2, rng, Label::fake);

    SUBCASE("test_size 0 returns the pool untouched") {
        auto [test, rest] = hold_out_test(pool, 0, 1);
        CHECK(test.empty());
        REQUIRE(rest.size() == 100);
        for (std::size_t i = 0; i < 100; ++i) {
            CHECK(rest.records[i].id == pool.records[i].id);
        }
    }
    SUBCASE("paper-scale sizes") {
        Rng big_rng(4);
        const FeatureSet big = qcf::test::random_set(20000, 2, big_rng, Label::fake);
        auto [test, rest] = hold_out_test(big, 2000, 7);
        CHECK(test.size() == 2000);
        CHECK(rest.size() == 18000);
    }
    SUBCASE("same seed identical, different seeds eventually differ") {
        auto [t1, r1] = hold_out_test(pool, 30, 5);
        auto [t2, r2] = hold_out_test(pool, 30, 5);
        CHECK(ids_of(t1) == ids_of(t2));
        bool any_diff = false;
        for (std::uint64_t s = 0; s < 20; ++s) {
            auto [ts, rs] = hold_out_test(pool, 30, s);
            if (ids_of(ts) != ids_of(t1)) any_diff = true;
        }
        CHECK(any_diff);
    }
    SUBCASE("remainder preserves original order") {
        auto [test, rest] = hold_out_test(pool, 40, 11);
        std::size_t last = 0;
        for (const auto& r : rest.records) {
            const std::size_t idx = std::stoul(r.id.substr(1));
            CHECK(idx >= last);
            last = idx;
        }
    }
    SUBCASE("oversized test rejected") {
        CHECK_THROWS_AS(hold_out_test(pool, 100, 0), std::invalid_argument);
    }
}

TEST_CASE("select_top_k") {
    SUBCASE("k == size reorders by descending score") {
        const ScoredSet s = make_scored({{"a", 5}, {"b", 1}, {"c", 9}});
        const FeatureSet out = select_top_k(s, 3);
        REQUIRE(out.size() == 3);
        CHECK(out.records[0].id == "c");
        CHECK(out.records[1].id == "a");
        CHECK(out.records[2].id == "b");
    }
    SUBCASE("takes the k best") {
        const ScoredSet s = make_scored({{"a", 5}, {"b", 1}, {"c", 9}});
        const FeatureSet out = select_top_k(s, 2);
        CHECK(ids_of(out) == std::set<std::string>{"c", "a"});
    }
    SUBCASE("ties break by ascending id, cross-checked by brute force") {
        const ScoredSet s = make_scored({{"b", 3.0}, {"a", 3.0}, {"c", 2.0}});
        const FeatureSet out = select_top_k(s, 1);
        REQUIRE(out.size() == 1);
        // Brute force: best (score, -id) pair.
        std::vector<std::pair<double, std::string>> pairs;
        for (std::size_t i = 0; i < s.size(); ++i) {
            pairs.emplace_back(s.scores[i], s.set.records[i].id);
        }
        std::sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) {
            if (x.first != y.first) return x.first > y.first;
            return x.second < y.second;
        });
        CHECK(out.records[0].id == pairs[0].second);
        CHECK(out.records[0].id == "a");
    }
    SUBCASE("k too large rejected") {
        const ScoredSet s = make_scored({{"a", 1}});
        CHECK_THROWS_AS(select_top_k(s, 2), std::invalid_argument);
    }
    SUBCASE("dominance: every selected score >= every excluded score") {
        Rng rng(19);
        ScoredSet s;
        s.set.dim = 1;
        for (int i = 0; i < 60; ++i) {
            s.set.records.push_back(qcf::test::make_record(
                "x" + std::to_string(i), Label::fake, {0.0f}));
            s.scores.push_back(rng.below(10));  // plenty of ties
        }
        const FeatureSet top = select_top_k(s, 25);
        const auto chosen = ids_of(top);
        double min_in = 1e300, max_out = -1e300;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (chosen.count(s.set.records[i].id)) {
                min_in = std::min(min_in, s.scores[i]);
            } else {
                max_out = std::max(max_out, s.scores[i]);
            }
        }
        CHECK(min_in >= max_out);
    }
}

TEST_CASE("select_random_k") {
    Rng rng(23);
    const FeatureSet set = qcf::test::random_set(30, 2, rng, Label::fake);
    const FeatureSet all = select_random_k(set, 30, 3);
    CHECK(ids_of(all) == ids_of(set));
    CHECK(select_random_k(set, 0, 3).empty());
    const FeatureSet a = select_random_k(set, 10, 5);
    const FeatureSet b = select_random_k(set, 10, 5);
    CHECK(ids_of(a) == ids_of(b));
}

TEST_CASE("quartile_partition") {
    SUBCASE("n=8 splits evenly") {
        ScoredSet s = make_scored({{"a", 1}, {"b", 2}, {"c", 3}, {"d", 4},
                                   {"e", 5}, {"f", 6}, {"g", 7}, {"h", 8}});
        const auto bins = quartile_partition(s);
        for (const auto& b : bins) CHECK(b.size() == 2);
        CHECK(bins[0].records[0].id == "a");  // lowest quality first
        CHECK(bins[3].records[1].id == "h");
    }
    SUBCASE("n=10 remainder goes to the lowest bins") {
        std::vector<std::pair<std::string, double>> rows;
        for (int i = 0; i < 10; ++i) {
            rows.emplace_back("q" + std::to_string(i), i);
        }
        const auto bins = quartile_partition(make_scored(rows));
        CHECK(bins[0].size() == 3);
        CHECK(bins[1].size() == 3);
        CHECK(bins[2].size() == 2);
        CHECK(bins[3].size() == 2);
    }
    SUBCASE("bins form a partition") {
        Rng rng(29);
        ScoredSet s;
        s.set.dim = 1;
        for (int i = 0; i < 37; ++i) {
            s.set.records.push_back(qcf::test::make_record(
                "p" + std::to_string(i), Label::fake, {0.0f}));
            s.scores.push_back(rng.normal());
        }
        const auto bins = quartile_partition(s);
        std::set<std::string> all;
        std::size_t total = 0;
        for (const auto& b : bins) {
            total += b.size();
            for (const auto& r : b.records) CHECK(all.insert(r.id).second);
        }
        CHECK(total == 37);
        for (const auto& b : bins) {
            CHECK(b.size() >= 37 / 4);
            CHECK(b.size() <= 37 / 4 + 1);
        }
    }
    SUBCASE("lowest scores land in bin 0") {
        ScoredSet s = make_scored(
            {{"low", -10}, {"mid1", 0}, {"mid2", 1}, {"high", 10}});
        const auto bins = quartile_partition(s);
        CHECK(bins[0].records[0].id == "low");
        CHECK(bins[3].records[0].id == "high");
    }
    SUBCASE("too small rejected") {
        CHECK_THROWS_AS(quartile_partition(make_scored({{"a", 1}, {"b", 2}})),
                        std::invalid_argument);
    }
}

TEST_CASE("build_curated_split") {
    Rng rng(31);
    ScoredSet fakes;
    fakes.set = qcf::test::random_set(200, 2, rng, Label::fake);
    for (std::size_t i = 0; i < 200; ++i) fakes.scores.push_back(rng.normal());
    for (auto& r : fakes.set.records) r.id = "f" + r.id;
    const FeatureSet reals = qcf::test::random_set(150, 2, rng, Label::real);

    CurationPlan plan{200, 20, 100, 9};

    SUBCASE("counts and disjointness") {
        const CuratedSplit split =
            build_curated_split(fakes, reals, plan, Strategy::qc);
        CHECK(split.train_fake.size() == 100);
        CHECK(split.test_fake.size() == 20);
        CHECK(split.train_real.size() == 100);
        CHECK(split.test_real.size() == 20);
        auto train_ids = ids_of(split.train_fake);
        for (const auto& r : split.test_fake.records) {
            CHECK(!train_ids.count(r.id));
        }
        auto train_real_ids = ids_of(split.train_real);
        for (const auto& r : split.test_real.records) {
            CHECK(!train_real_ids.count(r.id));
        }
    }
    SUBCASE("strategies share the identical test partition") {
        const CuratedSplit qc =
            build_curated_split(fakes, reals, plan, Strategy::qc);
        const CuratedSplit rnd =
            build_curated_split(fakes, reals, plan, Strategy::random);
        CHECK(ids_of(qc.test_fake) == ids_of(rnd.test_fake));
        CHECK(ids_of(qc.test_real) == ids_of(rnd.test_real));
        CHECK(ids_of(qc.train_fake) != ids_of(rnd.train_fake));
    }
    SUBCASE("degenerate plan takes the whole pool") {
        CurationPlan all{200, 0, 200, 1};
        const CuratedSplit qc = build_curated_split(
            fakes, qcf::test::random_set(200, 2, rng), all, Strategy::qc);
        CHECK(qc.train_fake.size() == 200);
        const CuratedSplit rnd = build_curated_split(
            fakes, qcf::test::random_set(200, 2, rng), all, Strategy::random);
        CHECK(ids_of(qc.train_fake) == ids_of(rnd.train_fake));
    }
    SUBCASE("insufficient reals rejected") {
        const FeatureSet few = qcf::test::random_set(50, 2, rng);
        CHECK_THROWS_AS(build_curated_split(fakes, few, plan, Strategy::qc),
                        std::invalid_argument);
    }
    SUBCASE("pool size mismatch rejected") {
        CurationPlan wrong{199, 20, 100, 9};
        CHECK_THROWS_AS(build_curated_split(fakes, reals, wrong, Strategy::qc),
                        std::invalid_argument);
    }
}

TEST_CASE("curated split round trips through disk") {
    Rng rng(33);
    ScoredSet fakes;
    fakes.set = qcf::test::random_set(40, 3, rng, Label::fake);
    for (auto& r : fakes.set.records) r.id = "f" + r.id;
    for (std::size_t i = 0; i < 40; ++i) fakes.scores.push_back(rng.normal());
    const FeatureSet reals = qcf::test::random_set(30, 3, rng);

    CurationPlan plan{40, 4, 20, 13};
    const CuratedSplit split =
        build_curated_split(fakes, reals, plan, Strategy::random);
    const std::string dir = qcf::test::temp_dir("split");
    save_curated_split(split, dir);
    const CuratedSplit back = load_curated_split(dir);
    CHECK(ids_of(back.train_fake) == ids_of(split.train_fake));
    CHECK(back.plan.k == plan.k);
    CHECK(back.strategy == Strategy::random);
}
