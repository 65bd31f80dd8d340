#include "qcf/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include <nlohmann/json.hpp>

#include "qcf/rng.hpp"

namespace qcf {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double log_component(const std::vector<double>& mean,
                     const std::vector<double>& var,
                     const std::vector<double>& x) {
    double acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double diff = x[j] - mean[j];
        acc += diff * diff / var[j] + std::log(var[j]);
    }
    return -0.5 * (acc + static_cast<double>(x.size()) * kLog2Pi);
}

std::vector<std::vector<double>> to_points(const FeatureSet& set) {
    std::vector<std::vector<double>> pts;
    pts.reserve(set.records.size());
    for (const FeatureRecord& r : set.records) {
        pts.emplace_back(r.vector.begin(), r.vector.end());
    }
    return pts;
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace

void GaussianMixture::validate() const {
    if (components == 0 || dim == 0) {
        throw std::invalid_argument("empty mixture");
    }
    if (weights.size() != components || means.size() != components ||
        variances.size() != components) {
        throw std::invalid_argument("mixture field sizes disagree with M");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw std::invalid_argument("negative or non-finite weight");
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("weights do not sum to 1");
    }
    if (!(cov_floor > 0.0)) throw std::invalid_argument("cov_floor must be > 0");
    for (std::size_t i = 0; i < components; ++i) {
        if (means[i].size() != dim || variances[i].size() != dim) {
            throw std::invalid_argument("component dim mismatch");
        }
        for (double m : means[i]) {
            if (!std::isfinite(m)) throw std::invalid_argument("non-finite mean");
        }
        for (double v : variances[i]) {
            if (!std::isfinite(v) || v < cov_floor) {
                throw std::invalid_argument("variance below floor");
            }
        }
    }
}

std::vector<std::size_t> kmeanspp_centers(
    const std::vector<std::vector<double>>& points, std::size_t k,
    std::uint64_t seed) {
    const std::size_t n = points.size();
    if (k == 0 || k > n) throw std::invalid_argument("k outside 1..n");

    Rng rng(seed);
    std::vector<std::size_t> centers;
    centers.reserve(k);
    centers.push_back(rng.below(n));

    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    while (centers.size() < k) {
        const std::vector<double>& c = points[centers.back()];
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            best[i] = std::min(best[i], sq_dist(points[i], c));
            total += best[i];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            // Walk the cumulative mass; the first index crossing the draw
            // wins, so equal masses resolve to the lowest index.
            const double target = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += best[i];
                if (acc > target) {
                    pick = i;
                    break;
                }
            }
        } else {
            // All points coincide with existing centers; take the lowest
            // index not already chosen.
            rng.uniform();  // keep the draw count fixed
            std::vector<bool> used(n, false);
            for (std::size_t c2 : centers) used[c2] = true;
            while (pick < n && used[pick]) ++pick;
            if (pick == n) pick = 0;
        }
        centers.push_back(pick);
    }
    return centers;
}

std::pair<GaussianMixture, FitReport> fit_em(const FeatureSet& real_features,
                                             const EMConfig& cfg) {
    if (cfg.components < 1) throw std::invalid_argument("M must be >= 1");
    if (!(cfg.rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be > 0");
    for (const FeatureRecord& r : real_features.records) {
        if (r.label != Label::real) {
            throw std::invalid_argument(
                "fit_em expects only real-labeled records, found fake id " +
                r.id);
        }
    }
    const std::size_t n = real_features.size();
    const std::size_t M = cfg.components;
    const std::size_t d = real_features.dim;
    if (n < M) {
        throw std::invalid_argument("record count " + std::to_string(n) +
                                    " below component count " +
                                    std::to_string(M));
    }

    const std::vector<std::vector<double>> pts = to_points(real_features);

    GaussianMixture gmm;
    gmm.components = M;
    gmm.dim = d;
    gmm.cov_floor = cfg.cov_floor;
    gmm.weights.assign(M, 1.0 / static_cast<double>(M));

    const std::vector<std::size_t> centers = kmeanspp_centers(pts, M, cfg.seed);
    for (std::size_t i : centers) gmm.means.push_back(pts[i]);

    // Global per-dimension variance as the starting spread.
    std::vector<double> global_mean(d, 0.0);
    for (const auto& p : pts) {
        for (std::size_t j = 0; j < d; ++j) global_mean[j] += p[j];
    }
    for (double& v : global_mean) v /= static_cast<double>(n);
    std::vector<double> global_var(d, 0.0);
    for (const auto& p : pts) {
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = p[j] - global_mean[j];
            global_var[j] += diff * diff;
        }
    }
    for (double& v : global_var) {
        v = std::max(v / static_cast<double>(n), cfg.cov_floor);
    }
    gmm.variances.assign(M, global_var);

    FitReport report;
    std::vector<double> resp(n * M);
    std::vector<double> log_terms(M);

    for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
        // E-step: responsibilities via log-sum-exp; the same pass yields the
        // mean log-likelihood at the current parameters.
        double ll_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double max_term = -std::numeric_limits<double>::infinity();
            for (std::size_t m = 0; m < M; ++m) {
                log_terms[m] = gmm.weights[m] > 0.0
                                   ? std::log(gmm.weights[m]) +
                                         log_component(gmm.means[m],
                                                       gmm.variances[m], pts[i])
                                   : -std::numeric_limits<double>::infinity();
                max_term = std::max(max_term, log_terms[m]);
            }
            double sum = 0.0;
            for (std::size_t m = 0; m < M; ++m) {
                sum += std::exp(log_terms[m] - max_term);
            }
            const double lse = max_term + std::log(sum);
            ll_sum += lse;
            for (std::size_t m = 0; m < M; ++m) {
                resp[i * M + m] = std::exp(log_terms[m] - lse);
            }
        }
        const double ll = ll_sum / static_cast<double>(n);
        report.log_likelihood_trace.push_back(ll);
        report.iterations = iter + 1;

        if (iter > 0) {
            const double prev = report.log_likelihood_trace[iter - 1];
            const double denom = std::max(std::abs(prev), 1e-12);
            if (std::abs(ll - prev) / denom < cfg.rel_tol) {
                report.converged = true;
                break;
            }
        }

        // M-step.
        for (std::size_t m = 0; m < M; ++m) {
            double nk = 0.0;
            for (std::size_t i = 0; i < n; ++i) nk += resp[i * M + m];
            gmm.weights[m] = nk / static_cast<double>(n);
            if (nk <= 0.0) continue;  // dead component keeps its parameters
            std::vector<double> mean(d, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double r = resp[i * M + m];
                for (std::size_t j = 0; j < d; ++j) mean[j] += r * pts[i][j];
            }
            for (double& v : mean) v /= nk;
            std::vector<double> var(d, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double r = resp[i * M + m];
                for (std::size_t j = 0; j < d; ++j) {
                    const double diff = pts[i][j] - mean[j];
                    var[j] += r * diff * diff;
                }
            }
            for (double& v : var) v = std::max(v / nk, cfg.cov_floor);
            gmm.means[m] = std::move(mean);
            gmm.variances[m] = std::move(var);
        }
        // Renormalize against accumulated rounding in the weights.
        double wsum = 0.0;
        for (double w : gmm.weights) wsum += w;
        for (double& w : gmm.weights) w /= wsum;
    }

    gmm.validate();
    return {std::move(gmm), std::move(report)};
}

double log_density(const GaussianMixture& gmm, const std::vector<double>& x) {
    if (x.size() != gmm.dim) {
        throw std::invalid_argument("vector dim " + std::to_string(x.size()) +
                                    " does not match mixture dim " +
                                    std::to_string(gmm.dim));
    }
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(gmm.components,
                              -std::numeric_limits<double>::infinity());
    for (std::size_t m = 0; m < gmm.components; ++m) {
        if (gmm.weights[m] <= 0.0) continue;
        terms[m] = std::log(gmm.weights[m]) +
                   log_component(gmm.means[m], gmm.variances[m], x);
        max_term = std::max(max_term, terms[m]);
    }
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - max_term);
    return max_term + std::log(sum);
}

double qc_score(const GaussianMixture& gmm, const std::vector<double>& x) {
    return log_density(gmm, x);
}

double qc_score(const GaussianMixture& gmm, const std::vector<float>& x) {
    return log_density(gmm, std::vector<double>(x.begin(), x.end()));
}

ScoredSet score_set(const GaussianMixture& gmm, const FeatureSet& set) {
    if (set.dim != gmm.dim) {
        throw std::invalid_argument("set dim does not match mixture dim");
    }
    ScoredSet scored;
    scored.set = set;
    scored.scores.reserve(set.size());
    for (const FeatureRecord& r : set.records) {
        scored.scores.push_back(qc_score(gmm, r.vector));
    }
    return scored;
}

std::string gmm_to_json(const GaussianMixture& gmm) {
    nlohmann::json j;
    j["M"] = gmm.components;
    j["d"] = gmm.dim;
    j["weights"] = gmm.weights;
    j["means"] = gmm.means;
    j["variances"] = gmm.variances;
    j["cov_floor"] = gmm.cov_floor;
    return j.dump(2);
}

GaussianMixture gmm_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    GaussianMixture gmm;
    gmm.components = j.at("M").get<std::size_t>();
    gmm.dim = j.at("d").get<std::size_t>();
    gmm.weights = j.at("weights").get<std::vector<double>>();
    gmm.means = j.at("means").get<std::vector<std::vector<double>>>();
    gmm.variances = j.at("variances").get<std::vector<std::vector<double>>>();
    gmm.cov_floor = j.at("cov_floor").get<double>();
    gmm.validate();
    return gmm;
}

void save_gmm(const GaussianMixture& gmm, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << gmm_to_json(gmm) << "\n";
}

GaussianMixture load_gmm(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::string text((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
    return gmm_from_json(text);
}

}  // namespace qcf
