#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "qcf/curation.hpp"
#include "qcf/gmm.hpp"
#include "qcf/probe.hpp"

namespace qcf {

struct EvalResult {
    double auc = 0.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
};

struct CrossCell {
    double mean = 0.0;
    double std_dev = 0.0;
    std::size_t seeds = 0;
    bool intra_concept = false;
};

struct CrossConceptReport {
    // Row key: (train tag, strategy); column key: test tag.
    std::vector<std::string> train_tags;
    std::vector<Strategy> strategies;  // parallel to rows, two per train tag
    std::vector<std::string> test_tags;
    std::vector<std::vector<CrossCell>> cells;  // rows x columns
    std::vector<std::string> warnings;
};

// Probability a fake outscores a real, ties counted half. Rank-sum with
// average ranks, exact for ties.
double auc(const std::vector<double>& fake_scores,
           const std::vector<double>& real_scores);

// Mean and sample (n-1) standard deviation; std 0 for a single value.
std::pair<double, double> aggregate_seeds(const std::vector<double>& aucs);

struct TestSplit {
    FeatureSet fakes;
    FeatureSet reals;
};

// models[(train tag, strategy)] -> one probe per seed.
using ModelGrid =
    std::map<std::pair<std::string, Strategy>, std::vector<ProbeModel>>;

CrossConceptReport cross_concept_matrix(
    const ModelGrid& models, const std::map<std::string, TestSplit>& tests);

// AUC of each fake quality quartile against the full real test set,
// ordered lowest quality first.
std::array<EvalResult, 4> quartile_eval(const ProbeModel& model,
                                        const ScoredSet& test_fakes,
                                        const FeatureSet& test_reals);

// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

std::string report_to_csv(const CrossConceptReport& report);
std::string report_to_markdown(const CrossConceptReport& report);

}  // namespace qcf
