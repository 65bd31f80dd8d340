// Acceptance harness: ten pinned criteria covering the numerical core
// (EM, densities, AUC, gradients, AdamW, FFT), the curation contracts, the
// synthetic cross-concept benchmark's headline effect, and end-to-end CLI
// determinism on the bundled toy corpus.
//
// Usage: acceptance <path-to-qcf-cli> <path-to-toy-corpus>
// Prints one PASS/FAIL line per criterion and exits nonzero on any failure.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "qcf/bench.hpp"
#include "qcf/curation.hpp"
#include "qcf/eval.hpp"
#include "qcf/fft.hpp"
#include "qcf/gmm.hpp"
#include "qcf/probe.hpp"
#include "qcf/rng.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool ok,
            const std::string& detail) {
    std::cout << (ok ? "PASS" : "FAIL") << " [" << id << "] " << name << ": "
              << detail << "\n";
    if (!ok) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

qcf::FeatureSet random_reals(std::size_t n, std::size_t d, qcf::Rng& rng) {
    qcf::FeatureSet set;
    set.dim = static_cast<std::uint32_t>(d);
    for (std::size_t i = 0; i < n; ++i) {
        qcf::FeatureRecord r;
        r.id = "x" + std::to_string(i);
        r.label = qcf::Label::real;
        r.vector.resize(d);
        for (float& v : r.vector) {
            v = static_cast<float>(3.0 * rng.normal() +
                                   (i % 2 == 0 ? -2.0 : 2.0));
        }
        set.records.push_back(std::move(r));
    }
    return set;
}

// Criterion 1: EM log-likelihood traces never decrease.
void check_em_monotone() {
    const auto t0 = Clock::now();
    qcf::Rng rng(101);
    double worst_drop = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t d = 1 + rng.below(4);
        const std::size_t M = 1 + rng.below(4);
        const std::size_t n = M + 1 + rng.below(500 - M);
        const qcf::FeatureSet set = random_reals(n, d, rng);
        qcf::EMConfig cfg;
        cfg.components = M;
        cfg.seed = rng.below(1u << 30);
        auto [gmm, fit] = qcf::fit_em(set, cfg);
        (void)gmm;
        for (std::size_t i = 1; i < fit.log_likelihood_trace.size(); ++i) {
            worst_drop = std::min(worst_drop, fit.log_likelihood_trace[i] -
                                                  fit.log_likelihood_trace[i - 1]);
        }
    }
    const double elapsed = seconds_since(t0);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "200 fits, worst trace step %.3e (tolerance -1e-9), %.1fs "
                  "(budget 30s)",
                  worst_drop, elapsed);
    report(1, "EM monotonicity", worst_drop >= -1e-9 && elapsed < 30.0, buf);
}

// Criterion 2: log-density vs extended-precision direct summation.
void check_density_oracle() {
    qcf::Rng rng(103);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t M = 1 + rng.below(4);
        const std::size_t d = 1 + rng.below(3);
        qcf::GaussianMixture gmm;
        gmm.components = M;
        gmm.dim = d;
        double wsum = 0.0;
        for (std::size_t m = 0; m < M; ++m) {
            gmm.weights.push_back(0.1 + rng.uniform());
            wsum += gmm.weights.back();
            std::vector<double> mean(d), var(d);
            for (std::size_t j = 0; j < d; ++j) {
                mean[j] = 3.0 * rng.normal();
                var[j] = 0.2 + 2.0 * rng.uniform();
            }
            gmm.means.push_back(mean);
            gmm.variances.push_back(var);
        }
        for (double& w : gmm.weights) w /= wsum;

        std::vector<double> x(d);
        for (double& v : x) v = 4.0 * rng.normal();

        long double direct = 0.0L;
        for (std::size_t m = 0; m < M; ++m) {
            long double g = 1.0L;
            for (std::size_t j = 0; j < d; ++j) {
                const long double var = gmm.variances[m][j];
                const long double diff = x[j] - gmm.means[m][j];
                g *= expl(-diff * diff / (2.0L * var)) /
                     sqrtl(2.0L * std::numbers::pi_v<long double> * var);
            }
            direct += static_cast<long double>(gmm.weights[m]) * g;
        }
        const double expected = static_cast<double>(logl(direct));
        worst = std::max(worst, std::abs(qcf::log_density(gmm, x) - expected));
    }
    char buf[120];
    std::snprintf(buf, sizeof(buf),
                  "100 mixtures, worst |error| %.3e (tolerance 1e-10)", worst);
    report(2, "GMM density oracle", worst < 1e-10, buf);
}

// Criterion 3: rank-based AUC equals the brute-force pairwise statistic.
void check_auc_oracle() {
    const auto t0 = Clock::now();
    qcf::Rng rng(107);
    bool exact = true;
    for (int trial = 0; trial < 500 && exact; ++trial) {
        const std::size_t nf = 1 + rng.below(120);
        const std::size_t nr = 1 + rng.below(120);
        std::vector<double> f(nf), r(nr);
        // Coarse integer grid guarantees heavy tie traffic.
        for (double& v : f) v = static_cast<double>(rng.below(12));
        for (double& v : r) v = static_cast<double>(rng.below(12));
        double wins = 0.0;
        for (double a : f) {
            for (double b : r) wins += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
        }
        const double brute = wins / (double(nf) * double(nr));
        if (qcf::auc(f, r) != brute) exact = false;
    }
    const double elapsed = seconds_since(t0);
    char buf[120];
    std::snprintf(buf, sizeof(buf),
                  "500 score sets with ties, exact match %s, %.1fs (budget 10s)",
                  exact ? "yes" : "no", elapsed);
    report(3, "AUC oracle", exact && elapsed < 10.0, buf);
}

// Criterion 4: analytic gradients vs central differences.
void check_gradients() {
    qcf::Rng rng(109);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t d = 2 + rng.below(5);
        qcf::TrainConfig cfg;
        cfg.hidden = {3 + rng.below(5)};
        cfg.seed = 5000 + trial;
        const qcf::ProbeModel model = qcf::init_probe(d, cfg);
        std::vector<std::vector<double>> xs;
        std::vector<double> ys;
        for (int i = 0; i < 6; ++i) {
            std::vector<double> x(d);
            for (double& v : x) v = rng.normal();
            xs.push_back(x);
            ys.push_back(static_cast<double>(rng.below(2)));
        }
        worst = std::max(worst, qcf::grad_check(model, xs, ys));
    }
    char buf[120];
    std::snprintf(buf, sizeof(buf),
                  "50 probes, worst relative error %.3e (tolerance 1e-4)",
                  worst);
    report(4, "gradient correctness", worst < 1e-4, buf);
}

// Criterion 5: with zero gradients AdamW reduces to pure decoupled decay.
void check_adamw_decoupling() {
    qcf::TrainConfig cfg;
    std::vector<std::vector<double>> params = {{1.0, -0.25}, {2.0}};
    const std::vector<std::vector<double>> init = params;
    std::vector<std::vector<double>> grads = {{0.0, 0.0}, {0.0}};
    qcf::OptimizerState state;
    double product = 1.0;
    double worst = 0.0;
    for (std::size_t step = 0; step < 20; ++step) {
        const double lr = qcf::lr_at(step, cfg);  // exercises the decay schedule
        qcf::adamw_step(params, grads, state, cfg, lr);
        product *= 1.0 - lr * cfg.weight_decay;
        for (std::size_t b = 0; b < params.size(); ++b) {
            for (std::size_t i = 0; i < params[b].size(); ++i) {
                worst = std::max(worst, std::abs(params[b][i] -
                                                 init[b][i] * product));
            }
        }
    }
    char buf[140];
    std::snprintf(buf, sizeof(buf),
                  "20 zero-gradient steps, worst deviation from the decay "
                  "product %.3e (tolerance 1e-12)",
                  worst);
    report(5, "AdamW decoupling", worst < 1e-12, buf);
}

// Criterion 6: Parseval and constant-grid DC response on awkward sizes.
void check_fft_identities() {
    qcf::Rng rng(113);
    const int sizes[] = {5, 6, 7, 9, 10, 12, 15, 17, 21, 24};
    double worst_parseval = 0.0, worst_dc = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int w = sizes[rng.below(10)];
        const int h = sizes[rng.below(10)];
        qcf::FloatGrid g(w, h);
        for (double& v : g.data) v = rng.normal();
        const auto freq = qcf::fft2(g);
        long double space = 0.0L, frequency = 0.0L;
        for (double v : g.data) space += static_cast<long double>(v) * v;
        for (const auto& z : freq) {
            frequency += static_cast<long double>(std::norm(z));
        }
        worst_parseval = std::max(
            worst_parseval,
            std::abs(static_cast<double>(
                frequency / (space * static_cast<long double>(w) * h) - 1.0L)));

        qcf::FloatGrid c(w, h);
        const double level = 0.25 + rng.uniform();
        for (double& v : c.data) v = level;
        const auto cf = qcf::fft2(c);
        for (int i = 0; i < w * h; ++i) {
            const double mag = std::abs(cf[i]);
            const double expected = i == 0 ? level * w * h : 0.0;
            worst_dc = std::max(worst_dc, std::abs(mag - expected));
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "100 non-power-of-two grids, Parseval %.3e (tol 1e-6), DC "
                  "response %.3e (tol 1e-9)",
                  worst_parseval, worst_dc);
    report(6, "FFT identities", worst_parseval < 1e-6 && worst_dc < 1e-9, buf);
}

// Criterion 7: exact curation contracts.
void check_curation_exactness() {
    qcf::Rng rng(127);
    bool ok = true;
    std::string detail = "top-k dominance, quartile sizes, shared test "
                         "partitions: all exact";

    // Top-k dominance under ties, several instances.
    for (int trial = 0; trial < 20 && ok; ++trial) {
        qcf::ScoredSet s;
        s.set.dim = 1;
        const std::size_t n = 20 + rng.below(80);
        for (std::size_t i = 0; i < n; ++i) {
            s.set.records.push_back(
                {"t" + std::to_string(i), qcf::Label::fake, "", "", {0.0f}});
            s.scores.push_back(static_cast<double>(rng.below(9)));
        }
        const std::size_t k = 1 + rng.below(n);
        const qcf::FeatureSet top = qcf::select_top_k(s, k);
        std::vector<bool> chosen(n, false);
        for (const auto& r : top.records) {
            chosen[std::stoul(r.id.substr(1))] = true;
        }
        double min_in = 1e300, max_out = -1e300;
        bool any_out = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (chosen[i]) {
                min_in = std::min(min_in, s.scores[i]);
            } else {
                any_out = true;
                max_out = std::max(max_out, s.scores[i]);
            }
        }
        if (top.size() != k || (any_out && min_in < max_out)) {
            ok = false;
            detail = "top-k dominance violated";
        }
    }

    // Quartile sizes at n=10 must be [3,3,2,2], lowest-score bins first.
    if (ok) {
        qcf::ScoredSet s;
        s.set.dim = 1;
        for (int i = 0; i < 10; ++i) {
            s.set.records.push_back(
                {"q" + std::to_string(i), qcf::Label::fake, "", "", {0.0f}});
            s.scores.push_back(static_cast<double>(9 - i));
        }
        const auto bins = qcf::quartile_partition(s);
        if (bins[0].size() != 3 || bins[1].size() != 3 || bins[2].size() != 2 ||
            bins[3].size() != 2) {
            ok = false;
            detail = "quartile sizes at n=10 are not [3,3,2,2]";
        }
    }

    // qc and random strategies must share the byte-identical test partition
    // for every plan seed.
    for (std::uint64_t seed = 0; seed < 5 && ok; ++seed) {
        qcf::ScoredSet fakes;
        fakes.set = random_reals(60, 2, rng);
        for (auto& r : fakes.set.records) {
            r.id = "f" + r.id;
            r.label = qcf::Label::fake;
        }
        for (int i = 0; i < 60; ++i) fakes.scores.push_back(rng.normal());
        const qcf::FeatureSet reals = random_reals(50, 2, rng);
        const qcf::CurationPlan plan{60, 10, 30, seed};
        const auto qc =
            qcf::build_curated_split(fakes, reals, plan, qcf::Strategy::qc);
        const auto rnd =
            qcf::build_curated_split(fakes, reals, plan, qcf::Strategy::random);
        if (qcf::encode_feature_set(qc.test_fake) !=
                qcf::encode_feature_set(rnd.test_fake) ||
            qcf::encode_feature_set(qc.test_real) !=
                qcf::encode_feature_set(rnd.test_real)) {
            ok = false;
            detail = "strategies disagree on the test partition";
        }
    }
    report(7, "curation exactness", ok, detail);
}

// Criteria 8 and 9 share one benchmark run.
void check_benchmark(double* cross_gap_out) {
    const auto t0 = Clock::now();
    qcf::ExperimentConfig cfg;  // paper-shaped defaults, desk scale
    const qcf::ExperimentReport rep = qcf::run_experiment(cfg);
    const double elapsed = seconds_since(t0);

    // Pair qc/random rows per train tag and average the strategy deltas.
    double cross_gap_sum = 0.0, intra_abs_max = 0.0;
    std::size_t cross_cells = 0;
    const auto& m = rep.matrix;
    for (std::size_t row = 0; row < m.train_tags.size(); ++row) {
        if (m.strategies[row] != qcf::Strategy::qc) continue;
        std::size_t partner = row;
        for (std::size_t r2 = 0; r2 < m.train_tags.size(); ++r2) {
            if (m.train_tags[r2] == m.train_tags[row] &&
                m.strategies[r2] == qcf::Strategy::random) {
                partner = r2;
            }
        }
        for (std::size_t col = 0; col < m.test_tags.size(); ++col) {
            const double delta =
                m.cells[row][col].mean - m.cells[partner][col].mean;
            if (m.cells[row][col].intra_concept) {
                intra_abs_max = std::max(intra_abs_max, std::abs(delta));
            } else {
                cross_gap_sum += delta;
                ++cross_cells;
            }
        }
    }
    const double cross_gap = cross_gap_sum / double(cross_cells);
    *cross_gap_out = cross_gap;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "mean cross-concept AUC(qc)-AUC(random) %+.4f (need >= "
                  "+0.05), max intra |delta| %.4f (tol 0.02), %.0fs (budget "
                  "120s)",
                  cross_gap, intra_abs_max, elapsed);
    report(8, "headline directional reproduction",
           cross_gap >= 0.05 && intra_abs_max <= 0.02 && elapsed < 120.0, buf);
}

// Criterion 9: the QC score tracks (inverse) artifact severity and curation
// exploits it.
void check_qc_mechanism() {
    const qcf::SyntheticSpec spec;  // defaults
    double worst_rho = 1.0;
    bool severity_ordered = true;
    double example_top = 0.0, example_rand = 0.0;

    for (std::size_t ci = 0; ci < spec.concepts.size(); ++ci) {
        auto [reals, fakes] = qcf::generate_concept(spec, spec.concepts[ci]);
        qcf::EMConfig em;
        em.components = 4;
        em.seed = spec.seed;
        auto [gmm, fit] = qcf::fit_em(reals, em);
        (void)fit;
        const qcf::ScoredSet scored = qcf::score_set(gmm, fakes);

        std::vector<double> neg_sev;
        for (const auto& r : fakes.records) {
            neg_sev.push_back(-qcf::severity_from_id(r.id));
        }
        worst_rho = std::min(worst_rho, qcf::spearman(scored.scores, neg_sev));

        for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
            const qcf::CurationPlan plan{4000, 400, 2000, seed};
            const auto qc = qcf::build_curated_split(scored, reals, plan,
                                                     qcf::Strategy::qc);
            const auto rnd = qcf::build_curated_split(scored, reals, plan,
                                                      qcf::Strategy::random);
            auto mean_severity = [](const qcf::FeatureSet& s) {
                double sum = 0.0;
                for (const auto& r : s.records) {
                    sum += qcf::severity_from_id(r.id);
                }
                return sum / double(s.size());
            };
            const double top = mean_severity(qc.train_fake);
            const double rand = mean_severity(rnd.train_fake);
            if (!(top < rand)) severity_ordered = false;
            example_top = top;
            example_rand = rand;
        }
    }
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "worst Spearman(qc, -severity) %.4f (need > 0.8); top-k "
                  "mean severity < random-k on every seed: %s (e.g. %.3f vs "
                  "%.3f)",
                  worst_rho, severity_ordered ? "yes" : "no", example_top,
                  example_rand);
    report(9, "QC-selection mechanism", worst_rho > 0.8 && severity_ordered,
           buf);
}

// Criterion 10: byte-identical CLI chain on the bundled corpus.
std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

bool run(const std::string& cmd) {
    return std::system((cmd + " > /dev/null 2>&1").c_str()) == 0;
}

bool run_chain(const std::string& cli, const std::string& corpus,
               const std::string& out) {
    fs::create_directories(out);
    const std::string seed = " --seed 7 ";
    return run(cli + " extract --manifest " + corpus + "/reals.json --out " +
               out + "/reals.qcfs --dim 16 --resize 64") &&
           run(cli + " extract --manifest " + corpus + "/fakes.json --out " +
               out + "/fakes.qcfs --dim 16 --resize 64") &&
           run(cli + seed + "fit-gmm --features " + out + "/reals.qcfs --out " +
               out + "/gmm.json --components 3") &&
           run(cli + " score --gmm " + out + "/gmm.json --features " + out +
               "/fakes.qcfs --out " + out + "/scores.csv") &&
           run(cli + seed + "curate --fakes " + out + "/fakes.qcfs --scores " +
               out + "/scores.csv --reals " + out + "/reals.qcfs --out " + out +
               "/split --strategy qc --pool-size 30 --test-size 6 --k 12") &&
           run(cli + seed + "train --split " + out + "/split --out " + out +
               "/model.json --log " + out + "/log.csv --epochs 10") &&
           run(cli + " eval --model " + out + "/model.json --test-fakes " +
               out + "/split/test_fake.qcfs --test-reals " + out +
               "/split/test_real.qcfs --out " + out + "/eval.json --scores " +
               out + "/scores.csv") &&
           run(cli + " spectra --manifest " + corpus + "/fakes.json --out " +
               out + "/spectra");
}

void check_cli_determinism(const std::string& cli, const std::string& corpus) {
    const std::string base =
        (fs::temp_directory_path() / "qcf_acceptance").string();
    const std::string a = base + "_a", b = base + "_b";
    fs::remove_all(a);
    fs::remove_all(b);
    if (!run_chain(cli, corpus, a) || !run_chain(cli, corpus, b)) {
        report(10, "CLI determinism", false, "a chain stage exited nonzero");
        return;
    }
    std::vector<std::string> diffs;
    std::size_t compared = 0;
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
        if (!entry.is_regular_file()) continue;
        const std::string rel = fs::relative(entry.path(), a).string();
        ++compared;
        if (slurp(entry.path().string()) != slurp(b + "/" + rel)) {
            diffs.push_back(rel);
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "%zu artifacts compared across two seeded runs, %zu differ%s%s",
                  compared, diffs.size(), diffs.empty() ? "" : ", first: ",
                  diffs.empty() ? "" : diffs.front().c_str());
    report(10, "CLI determinism", compared >= 10 && diffs.empty(), buf);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: acceptance <qcf-cli> <toy-corpus-dir>\n";
        return 2;
    }
    check_em_monotone();
    check_density_oracle();
    check_auc_oracle();
    check_gradients();
    check_adamw_decoupling();
    check_fft_identities();
    check_curation_exactness();
    double cross_gap = 0.0;
    check_benchmark(&cross_gap);
    check_qc_mechanism();
    check_cli_determinism(argv[1], argv[2]);

    std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED"
                                  : "CRITERIA FAILED: " +
                                        std::to_string(g_failures))
              << "\n";
    return g_failures == 0 ? 0 : 1;
}
