#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qcf/feature_store.hpp"

namespace qcf {

// Diagonal-covariance Gaussian mixture fitted to real-image features.
// Scores are log-densities: the raw density underflows at high dimension
// and every consumer only uses the ranking, which logs preserve.
struct GaussianMixture {
    std::size_t components = 0;           // M
    std::size_t dim = 0;                  // d
    std::vector<double> weights;          // M
    std::vector<std::vector<double>> means;      // M x d
    std::vector<std::vector<double>> variances;  // M x d
    double cov_floor = 1e-6;

    void validate() const;
};

struct EMConfig {
    std::size_t components = 50;
    std::size_t max_iters = 200;
    double rel_tol = 1e-4;   // on mean log-likelihood
    double cov_floor = 1e-6;
    std::uint64_t seed = 0;
};

struct FitReport {
    std::size_t iterations = 0;
    std::vector<double> log_likelihood_trace;  // mean per-point, one per iter
    bool converged = false;
};

struct ScoredSet {
    FeatureSet set;
    std::vector<double> scores;

    std::size_t size() const { return scores.size(); }
};

// EM on diagonal mixtures, k-means++ seeded initialization, deterministic
// per cfg.seed. All records must carry label=real.
std::pair<GaussianMixture, FitReport> fit_em(const FeatureSet& real_features,
                                             const EMConfig& cfg);

double log_density(const GaussianMixture& gmm, const std::vector<double>& x);

// QC score of a feature vector: the log of the mixture density.
// Order-equivalent to the density itself.
double qc_score(const GaussianMixture& gmm, const std::vector<double>& x);
double qc_score(const GaussianMixture& gmm, const std::vector<float>& x);

ScoredSet score_set(const GaussianMixture& gmm, const FeatureSet& set);

std::string gmm_to_json(const GaussianMixture& gmm);
GaussianMixture gmm_from_json(const std::string& text);
void save_gmm(const GaussianMixture& gmm, const std::string& path);
GaussianMixture load_gmm(const std::string& path);

// k-means++ centers over the record vectors; ties broken by lowest index.
std::vector<std::size_t> kmeanspp_centers(
    const std::vector<std::vector<double>>& points, std::size_t k,
    std::uint64_t seed);

}  // namespace qcf
