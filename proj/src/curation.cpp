#include "qcf/curation.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "qcf/rng.hpp"

namespace qcf {

namespace {

std::uint64_t fnv1a(std::uint64_t h, const std::string& s) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    h ^= 0x1f;  // separator
    h *= 0x100000001b3ULL;
    return h;
}

std::uint64_t id_lists_hash(const CuratedSplit& split) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const FeatureSet* s : {&split.train_fake, &split.train_real,
                                &split.test_fake, &split.test_real}) {
        for (const FeatureRecord& r : s->records) h = fnv1a(h, r.id);
    }
    return h;
}

// Sorted index sample without replacement via seeded shuffle.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k,
                                        std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    rng.shuffle(idx);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

FeatureSet take(const FeatureSet& set, const std::vector<std::size_t>& idx) {
    FeatureSet out;
    out.dim = set.dim;
    out.records.reserve(idx.size());
    for (std::size_t i : idx) out.records.push_back(set.records[i]);
    return out;
}

}  // namespace

const char* to_string(Strategy s) {
    return s == Strategy::qc ? "qc" : "random";
}

Strategy strategy_from_string(const std::string& s) {
    if (s == "qc") return Strategy::qc;
    if (s == "random") return Strategy::random;
    throw std::invalid_argument("unknown strategy: " + s);
}

void CurationPlan::validate() const {
    if (test_size >= pool_size) {
        throw std::invalid_argument("test_size must be below pool_size");
    }
    if (k > pool_size - test_size) {
        throw std::invalid_argument("k exceeds pool remainder after hold-out");
    }
}

std::pair<FeatureSet, FeatureSet> hold_out_test(const FeatureSet& pool,
                                                std::size_t test_size,
                                                std::uint64_t seed) {
    const std::size_t n = pool.size();
    if (test_size >= n) {
        throw std::invalid_argument("test_size must be below pool size");
    }
    const std::vector<std::size_t> chosen = sample_indices(n, test_size, seed);
    std::vector<bool> in_test(n, false);
    for (std::size_t i : chosen) in_test[i] = true;

    FeatureSet test = take(pool, chosen);
    FeatureSet remainder;
    remainder.dim = pool.dim;
    for (std::size_t i = 0; i < n; ++i) {
        if (!in_test[i]) remainder.records.push_back(pool.records[i]);
    }
    return {std::move(test), std::move(remainder)};
}

FeatureSet select_top_k(const ScoredSet& scored, std::size_t k) {
    const std::size_t n = scored.size();
    if (k > n) throw std::invalid_argument("k exceeds scored set size");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (scored.scores[a] != scored.scores[b]) {
            return scored.scores[a] > scored.scores[b];
        }
        return scored.set.records[a].id < scored.set.records[b].id;
    });
    idx.resize(k);
    return take(scored.set, idx);
}

FeatureSet select_random_k(const FeatureSet& set, std::size_t k,
                           std::uint64_t seed) {
    if (k > set.size()) throw std::invalid_argument("k exceeds set size");
    std::vector<std::size_t> idx(set.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    rng.shuffle(idx);
    idx.resize(k);
    return take(set, idx);
}

std::array<FeatureSet, 4> quartile_partition(const ScoredSet& scored) {
    const std::size_t n = scored.size();
    if (n < 4) throw std::invalid_argument("need at least 4 records");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (scored.scores[a] != scored.scores[b]) {
            return scored.scores[a] < scored.scores[b];
        }
        return scored.set.records[a].id < scored.set.records[b].id;
    });

    std::array<FeatureSet, 4> bins;
    const std::size_t base = n / 4;
    const std::size_t rem = n % 4;
    std::size_t pos = 0;
    for (std::size_t b = 0; b < 4; ++b) {
        const std::size_t sz = base + (b < rem ? 1 : 0);
        bins[b].dim = scored.set.dim;
        for (std::size_t i = 0; i < sz; ++i) {
            bins[b].records.push_back(scored.set.records[idx[pos++]]);
        }
    }
    return bins;
}

CuratedSplit build_curated_split(const ScoredSet& fakes,
                                 const FeatureSet& reals,
                                 const CurationPlan& plan, Strategy strategy) {
    plan.validate();
    if (fakes.size() != plan.pool_size) {
        throw std::invalid_argument("fake pool size " +
                                    std::to_string(fakes.size()) +
                                    " does not match plan pool_size " +
                                    std::to_string(plan.pool_size));
    }
    if (reals.size() < plan.k + plan.test_size) {
        throw std::invalid_argument("insufficient reals: need " +
                                    std::to_string(plan.k + plan.test_size) +
                                    ", have " + std::to_string(reals.size()));
    }

    // Test hold-out comes first and depends only on the seed, never on the
    // strategy, so qc and random arms share an identical test partition.
    auto [test_fake, remainder] =
        hold_out_test(fakes.set, plan.test_size, plan.seed);

    std::vector<bool> in_test(fakes.size(), false);
    ScoredSet remainder_scored;
    remainder_scored.set = remainder;
    {
        std::size_t ri = 0;
        std::unordered_set<std::string> test_ids;
        for (const FeatureRecord& r : test_fake.records) test_ids.insert(r.id);
        for (std::size_t i = 0; i < fakes.size(); ++i) {
            if (!test_ids.count(fakes.set.records[i].id)) {
                remainder_scored.scores.push_back(fakes.scores[i]);
                ++ri;
            }
        }
        (void)ri;
    }

    FeatureSet train_fake =
        strategy == Strategy::qc
            ? select_top_k(remainder_scored, plan.k)
            : select_random_k(remainder, plan.k,
                              plan.seed ^ 0x517cc1b727220a95ULL);

    // Reals: disjoint test/train samples, strategy-independent.
    std::vector<std::size_t> shuffled(reals.size());
    std::iota(shuffled.begin(), shuffled.end(), 0);
    {
        Rng rng(plan.seed ^ 0x9e3779b97f4a7c15ULL);
        rng.shuffle(shuffled);
    }
    std::vector<std::size_t> test_real_idx(shuffled.begin(),
                                           shuffled.begin() + plan.test_size);
    std::vector<std::size_t> train_real_idx(
        shuffled.begin() + plan.test_size,
        shuffled.begin() + plan.test_size + plan.k);
    std::sort(test_real_idx.begin(), test_real_idx.end());
    std::sort(train_real_idx.begin(), train_real_idx.end());

    CuratedSplit split;
    split.train_fake = std::move(train_fake);
    split.train_real = take(reals, train_real_idx);
    split.test_fake = std::move(test_fake);
    split.test_real = take(reals, test_real_idx);
    split.plan = plan;
    split.strategy = strategy;
    return split;
}

void save_curated_split(const CuratedSplit& split, const std::string& dir) {
    write_feature_set(split.train_fake, dir + "/train_fake.qcfs");
    write_feature_set(split.train_real, dir + "/train_real.qcfs");
    write_feature_set(split.test_fake, dir + "/test_fake.qcfs");
    write_feature_set(split.test_real, dir + "/test_real.qcfs");

    nlohmann::json j;
    j["plan"] = {{"pool_size", split.plan.pool_size},
                 {"test_size", split.plan.test_size},
                 {"k", split.plan.k},
                 {"seed", split.plan.seed}};
    j["strategy"] = to_string(split.strategy);
    j["id_lists_hash"] = id_lists_hash(split);
    std::ofstream f(dir + "/provenance.json", std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write provenance in " + dir);
    f << j.dump(2) << "\n";
}

CuratedSplit load_curated_split(const std::string& dir) {
    CuratedSplit split;
    split.train_fake = read_feature_set(dir + "/train_fake.qcfs");
    split.train_real = read_feature_set(dir + "/train_real.qcfs");
    split.test_fake = read_feature_set(dir + "/test_fake.qcfs");
    split.test_real = read_feature_set(dir + "/test_real.qcfs");

    std::ifstream f(dir + "/provenance.json");
    if (!f) throw std::runtime_error("missing provenance.json in " + dir);
    nlohmann::json j = nlohmann::json::parse(f);
    split.plan.pool_size = j.at("plan").at("pool_size").get<std::size_t>();
    split.plan.test_size = j.at("plan").at("test_size").get<std::size_t>();
    split.plan.k = j.at("plan").at("k").get<std::size_t>();
    split.plan.seed = j.at("plan").at("seed").get<std::uint64_t>();
    split.strategy = strategy_from_string(j.at("strategy").get<std::string>());
    if (j.at("id_lists_hash").get<std::uint64_t>() != id_lists_hash(split)) {
        throw std::runtime_error("curated split id hash mismatch in " + dir);
    }
    return split;
}

}  // namespace qcf
