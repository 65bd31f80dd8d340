#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "qcf/feature_store.hpp"
#include "qcf/gmm.hpp"

namespace qcf {

enum class Strategy { qc, random };

const char* to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct CurationPlan {
    std::size_t pool_size = 20000;
    std::size_t test_size = 2000;
    std::size_t k = 10000;
    std::uint64_t seed = 0;

    void validate() const;
};

struct CuratedSplit {
    FeatureSet train_fake;
    FeatureSet train_real;
    FeatureSet test_fake;
    FeatureSet test_real;
    CurationPlan plan;
    Strategy strategy = Strategy::qc;
};

// Uniform sample without replacement via seeded shuffle. The remainder keeps
// the pool's original order.
std::pair<FeatureSet, FeatureSet> hold_out_test(const FeatureSet& pool,
                                                std::size_t test_size,
                                                std::uint64_t seed);

// k highest-scoring records, ties broken by ascending id; output ordered by
// descending score.
FeatureSet select_top_k(const ScoredSet& scored, std::size_t k);

FeatureSet select_random_k(const FeatureSet& set, std::size_t k,
                           std::uint64_t seed);

// Four contiguous rank bins, ascending score (ties by id). Bin 0 is the
// lowest-quality quarter; size remainders go to the lowest bins first.
std::array<FeatureSet, 4> quartile_partition(const ScoredSet& scored);

// Full curation: test held out of the fake pool before selection, train
// fakes picked by strategy from the remainder, reals sampled disjointly for
// test and train at matching counts.
CuratedSplit build_curated_split(const ScoredSet& fakes,
                                 const FeatureSet& reals,
                                 const CurationPlan& plan, Strategy strategy);

// Persists the four QCFS files plus a provenance sidecar JSON.
void save_curated_split(const CuratedSplit& split, const std::string& dir);
CuratedSplit load_curated_split(const std::string& dir);

}  // namespace qcf
