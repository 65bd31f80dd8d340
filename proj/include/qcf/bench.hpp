#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qcf/curation.hpp"
#include "qcf/eval.hpp"
#include "qcf/feature_store.hpp"
#include "qcf/probe.hpp"

namespace qcf {

// Synthetic cross-concept geometry: reals are unit-noise Gaussians around a
// per-concept mean; fakes add a small shared artifact (delta along u_s,
// common to every concept) plus a per-image concept artifact (severity s
// along u_c). All artifact directions and concept-mean differences are
// mutually orthogonal axes, so the two signals are separable by
// construction.
struct SyntheticSpec {
    std::size_t d = 16;
    std::vector<std::string> concepts = {"alpha", "beta"};
    double concept_mean_scale = 4.0;   // mu_c = scale * axis_c
    double delta = 0.8;                // shared artifact magnitude
    double severity_mean = 2.0;        // exponential, clipped below
    double severity_clip = 8.0;
    std::size_t n_real = 4000;
    std::size_t n_fake = 4000;
    std::uint64_t seed = 0;

    void validate() const;
    std::vector<double> concept_mean(std::size_t idx) const;
    std::vector<double> shared_artifact() const;   // u_s
    std::vector<double> concept_artifact(std::size_t idx) const;  // u_c
};

// Linear probe, short schedule: the benchmark's signal is a linear
// direction and the weight vector is itself a diagnostic.
inline TrainConfig default_bench_probe() {
    TrainConfig t;
    t.hidden = {};
    t.dropout = 0.0;
    t.epochs = 12;
    return t;
}

struct ExperimentConfig {
    SyntheticSpec spec;
    CurationPlan plan{4000, 400, 2000, 0};
    TrainConfig probe = default_bench_probe();
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    std::size_t gmm_components = 4;
};

struct ExperimentReport {
    CrossConceptReport matrix;
    std::string provenance_json;
};

// Fake ids embed the drawn severity for diagnostics.
double severity_from_id(const std::string& id);

std::pair<FeatureSet, FeatureSet> generate_concept(const SyntheticSpec& spec,
                                                   const std::string& concept_name);

ExperimentReport run_experiment(const ExperimentConfig& cfg);

// report.csv, report.md, provenance.json under dir.
void emit_report(const ExperimentReport& report, const std::string& dir);

std::string spec_to_json(const SyntheticSpec& spec);
SyntheticSpec spec_from_json(const std::string& text);

}  // namespace qcf
