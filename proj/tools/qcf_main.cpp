// qcf: quality-curated synthetic image detection toolkit.
//
// Subcommands cover the pipeline end to end: extract features from a
// manifest, fit the real-feature mixture, score fakes, curate training
// splits, train and evaluate the probe classifier, render residual
// spectrograms, and run the synthetic cross-concept benchmark.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qcf/bench.hpp"
#include "qcf/curation.hpp"
#include "qcf/eval.hpp"
#include "qcf/feature_store.hpp"
#include "qcf/gmm.hpp"
#include "qcf/pixels.hpp"
#include "qcf/probe.hpp"
#include "qcf/spectra.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitDecode = 3;
constexpr int kExitExtractor = 4;
constexpr int kExitNumeric = 5;

// Config-file values fill in any flag the user did not pass; flags win.
void apply_config(CLI::App* cmd, const std::string& config_path) {
    if (config_path.empty()) return;
    std::ifstream f(config_path);
    if (!f) throw std::runtime_error("cannot open config: " + config_path);
    nlohmann::json j = nlohmann::json::parse(f);
    for (auto& [key, value] : j.items()) {
        CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (opt == nullptr || opt->count() > 0) continue;
        std::string text = value.is_string() ? value.get<std::string>()
                                             : value.dump();
        opt->add_result(text);
        opt->run_callback();
    }
}

int resolve_threads(int threads_flag) {
    if (threads_flag > 0) return threads_flag;
    if (const char* env = std::getenv("QCF_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

std::vector<std::pair<std::string, double>> read_scores_csv(
    const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open scores file: " + path);
    std::vector<std::pair<std::string, double>> out;
    std::string line;
    std::getline(f, line);  // header
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const std::size_t comma = line.rfind(',');
        if (comma == std::string::npos) {
            throw std::runtime_error("malformed scores line: " + line);
        }
        out.emplace_back(line.substr(0, comma),
                         std::stod(line.substr(comma + 1)));
    }
    return out;
}

qcf::ScoredSet attach_scores(const qcf::FeatureSet& set,
                             const std::string& scores_path) {
    const auto rows = read_scores_csv(scores_path);
    std::map<std::string, double> by_id(rows.begin(), rows.end());
    qcf::ScoredSet scored;
    scored.set = set;
    for (const qcf::FeatureRecord& r : set.records) {
        auto it = by_id.find(r.id);
        if (it == by_id.end()) {
            throw std::runtime_error("no score for id: " + r.id);
        }
        scored.scores.push_back(it->second);
    }
    return scored;
}

int cmd_extract(const std::string& manifest_path, const std::string& out_path,
                const std::string& kind, std::uint32_t dim,
                std::uint64_t projection_seed, const std::string& model_path,
                std::size_t batch, int resize) {
    qcf::DatasetManifest manifest;
    try {
        manifest = qcf::read_manifest(manifest_path);
    } catch (const std::exception& e) {
        std::cerr << "bad manifest: " << e.what() << "\n";
        return kExitInput;
    }

    qcf::FeatureExtractor fx;
    fx.kind = kind == "external" ? qcf::ExtractorKind::external
                                 : qcf::ExtractorKind::toy;
    fx.dim = dim;
    fx.projection_seed = projection_seed;
    fx.model_path = model_path;

    qcf::FeatureSet set;
    set.dim = fx.dim;
    std::vector<qcf::Image> images;
    images.reserve(manifest.entries.size());
    for (const qcf::ManifestEntry& e : manifest.entries) {
        const std::string full = manifest.image_root + "/" + e.path;
        try {
            qcf::Image img = qcf::load_image(full);
            images.push_back(qcf::resize_bilinear(img, resize, resize));
        } catch (const std::exception& ex) {
            std::cerr << "decode failure: " << full << ": " << ex.what() << "\n";
            return kExitDecode;
        }
    }
    try {
        qcf::FeatureSet extracted = qcf::extract_features(images, fx, batch);
        for (std::size_t i = 0; i < extracted.records.size(); ++i) {
            qcf::FeatureRecord& r = extracted.records[i];
            r.id = manifest.entries[i].path;
            r.label = manifest.entries[i].label;
            r.concept_tag = manifest.concept_tag;
            r.source = manifest.source;
        }
        set = std::move(extracted);
    } catch (const std::exception& ex) {
        std::cerr << "extractor failure: " << ex.what() << "\n";
        return kExitExtractor;
    }
    qcf::write_feature_set(set, out_path);
    return kExitOk;
}

void ensure_dir(const std::string& dir) { fs::create_directories(dir); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quality-curated synthetic image detection toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    int threads = 0;
    app.add_option("--config", config_path, "JSON config file; flags override");
    app.add_option("--seed", seed, "global random seed");
    app.add_option("--threads", threads, "worker threads (0 = auto)");

    // extract
    auto* extract = app.add_subcommand("extract", "manifest images -> QCFS features");
    std::string manifest_path, out_path, extractor_kind = "toy", model_path;
    std::uint32_t dim = 64;
    std::uint64_t projection_seed = 0;
    std::size_t batch = 50;
    int resize = 224;
    extract->add_option("--manifest", manifest_path)->required();
    extract->add_option("--out", out_path)->required();
    extract->add_option("--extractor", extractor_kind)
        ->check(CLI::IsMember({"toy", "external"}));
    extract->add_option("--dim", dim);
    extract->add_option("--projection-seed", projection_seed);
    extract->add_option("--model", model_path);
    extract->add_option("--batch", batch);
    extract->add_option("--resize", resize);

    // fit-gmm
    auto* fit = app.add_subcommand("fit-gmm", "fit mixture on real features");
    std::string features_path, gmm_out;
    std::size_t components = 50, max_iters = 200;
    double rel_tol = 1e-4, cov_floor = 1e-6;
    fit->add_option("--features", features_path)->required();
    fit->add_option("--out", gmm_out)->required();
    fit->add_option("--components", components);
    fit->add_option("--max-iters", max_iters);
    fit->add_option("--rel-tol", rel_tol);
    fit->add_option("--cov-floor", cov_floor);

    // score
    auto* score = app.add_subcommand("score", "QC-score features under a mixture");
    std::string gmm_path, score_features, scores_out;
    score->add_option("--gmm", gmm_path)->required();
    score->add_option("--features", score_features)->required();
    score->add_option("--out", scores_out)->required();

    // curate
    auto* curate = app.add_subcommand("curate", "build a curated train/test split");
    std::string fakes_path, scores_path, reals_path, curate_out, strategy = "qc";
    std::size_t pool_size = 20000, test_size = 2000, top_k = 10000;
    curate->add_option("--fakes", fakes_path)->required();
    curate->add_option("--scores", scores_path)->required();
    curate->add_option("--reals", reals_path)->required();
    curate->add_option("--out", curate_out)->required();
    curate->add_option("--strategy", strategy)
        ->check(CLI::IsMember({"qc", "random"}));
    curate->add_option("--pool-size", pool_size);
    curate->add_option("--test-size", test_size);
    curate->add_option("--k", top_k);

    // train
    auto* train = app.add_subcommand("train", "train the probe on a split");
    std::string split_dir, model_out, log_out;
    qcf::TrainConfig tc;
    std::vector<std::size_t> hidden = {64};
    train->add_option("--split", split_dir)->required();
    train->add_option("--out", model_out)->required();
    train->add_option("--log", log_out);
    train->add_option("--lr", tc.learning_rate);
    train->add_option("--weight-decay", tc.weight_decay);
    train->add_option("--epochs", tc.epochs);
    train->add_option("--batch-size", tc.batch_size);
    train->add_option("--dropout", tc.dropout);
    train->add_option("--step-every", tc.step_every);
    train->add_option("--step-gamma", tc.step_gamma);
    train->add_option("--hidden", hidden);

    // eval
    auto* evalc = app.add_subcommand("eval", "AUC of a probe on a test split");
    std::string eval_model, eval_fakes, eval_reals, eval_out, eval_scores;
    evalc->add_option("--model", eval_model)->required();
    evalc->add_option("--test-fakes", eval_fakes)->required();
    evalc->add_option("--test-reals", eval_reals)->required();
    evalc->add_option("--out", eval_out)->required();
    evalc->add_option("--scores", eval_scores,
                      "QC scores of the test fakes; enables quartile AUC");

    // spectra
    auto* spectra = app.add_subcommand("spectra", "averaged residual spectrogram");
    std::string spectra_manifest, spectra_out, method = "median3";
    double sigma = 1.0;
    spectra->add_option("--manifest", spectra_manifest)->required();
    spectra->add_option("--out", spectra_out)->required();
    spectra->add_option("--method", method)
        ->check(CLI::IsMember({"median3", "gaussian"}));
    spectra->add_option("--sigma", sigma);

    // bench
    auto* bench = app.add_subcommand("bench", "synthetic cross-concept benchmark");
    std::string spec_path, bench_out;
    std::size_t n_seeds = 3;
    bench->add_option("--spec", spec_path, "SyntheticSpec JSON");
    bench->add_option("--out", bench_out)->required();
    bench->add_option("--seeds", n_seeds, "number of training seeds");

    try {
        app.parse(argc, argv);
        apply_config(app.get_subcommands().front(), config_path);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    (void)resolve_threads(threads);

    try {
        if (*extract) {
            return cmd_extract(manifest_path, out_path, extractor_kind, dim,
                               projection_seed, model_path, batch, resize);
        }
        if (*fit) {
            const qcf::FeatureSet set = qcf::read_feature_set(features_path);
            qcf::EMConfig cfg;
            cfg.components = components;
            cfg.max_iters = max_iters;
            cfg.rel_tol = rel_tol;
            cfg.cov_floor = cov_floor;
            cfg.seed = seed;
            auto [gmm, report] = qcf::fit_em(set, cfg);
            qcf::save_gmm(gmm, gmm_out);
            std::cout << "iterations=" << report.iterations
                      << " converged=" << (report.converged ? 1 : 0) << "\n";
            return kExitOk;
        }
        if (*score) {
            const qcf::GaussianMixture gmm = qcf::load_gmm(gmm_path);
            const qcf::FeatureSet set = qcf::read_feature_set(score_features);
            const qcf::ScoredSet scored = qcf::score_set(gmm, set);
            std::ofstream f(scores_out, std::ios::trunc);
            if (!f) throw std::runtime_error("cannot write: " + scores_out);
            f << "id,qc_score\n";
            f.precision(17);
            for (std::size_t i = 0; i < scored.size(); ++i) {
                f << scored.set.records[i].id << "," << scored.scores[i] << "\n";
            }
            return kExitOk;
        }
        if (*curate) {
            const qcf::FeatureSet fakes = qcf::read_feature_set(fakes_path);
            const qcf::FeatureSet reals = qcf::read_feature_set(reals_path);
            const qcf::ScoredSet scored = attach_scores(fakes, scores_path);
            qcf::CurationPlan plan{pool_size, test_size, top_k, seed};
            const qcf::CuratedSplit split = qcf::build_curated_split(
                scored, reals, plan, qcf::strategy_from_string(strategy));
            ensure_dir(curate_out);
            qcf::save_curated_split(split, curate_out);
            return kExitOk;
        }
        if (*train) {
            const qcf::CuratedSplit split = qcf::load_curated_split(split_dir);
            tc.hidden = hidden;
            tc.seed = seed;
            auto [model, log] = qcf::train_probe(split, tc);
            qcf::save_probe(model, model_out);
            if (!log_out.empty()) qcf::write_training_log(log, log_out);
            return kExitOk;
        }
        if (*evalc) {
            const qcf::ProbeModel model = qcf::load_probe(eval_model);
            const qcf::FeatureSet fakes = qcf::read_feature_set(eval_fakes);
            const qcf::FeatureSet reals = qcf::read_feature_set(eval_reals);
            const double a = qcf::auc(qcf::predict_scores(model, fakes),
                                      qcf::predict_scores(model, reals));
            nlohmann::json j;
            j["auc"] = a;
            j["auc_x100"] = 100.0 * a;
            j["n_pos"] = fakes.size();
            j["n_neg"] = reals.size();
            if (!eval_scores.empty()) {
                const qcf::ScoredSet scored = attach_scores(fakes, eval_scores);
                const auto quartiles = qcf::quartile_eval(model, scored, reals);
                j["quartiles"] = nlohmann::json::array();
                const char* names[] = {"0-25%", "25-50%", "50-75%", "75-100%"};
                for (std::size_t q = 0; q < 4; ++q) {
                    j["quartiles"].push_back({{"range", names[q]},
                                              {"auc", quartiles[q].auc},
                                              {"n_pos", quartiles[q].n_pos}});
                }
            }
            std::ofstream f(eval_out, std::ios::trunc);
            if (!f) throw std::runtime_error("cannot write: " + eval_out);
            f << j.dump(2) << "\n";
            return kExitOk;
        }
        if (*spectra) {
            const qcf::DatasetManifest m = qcf::read_manifest(spectra_manifest);
            qcf::DenoiseConfig dcfg;
            dcfg.method = method == "gaussian" ? qcf::DenoiseMethod::gaussian
                                               : qcf::DenoiseMethod::median3;
            dcfg.sigma = sigma;
            qcf::ResidualStack stack;
            for (const qcf::ManifestEntry& e : m.entries) {
                const qcf::Image img =
                    qcf::load_image(m.image_root + "/" + e.path);
                qcf::accumulate(stack, qcf::residual(img, qcf::denoise(img, dcfg)));
            }
            if (stack.count == 0) {
                throw std::runtime_error("manifest lists no images");
            }
            const qcf::Spectrogram spec = qcf::fft2_spectrum(stack.grid());
            ensure_dir(spectra_out);
            const std::string base =
                spectra_out + "/" + m.concept_tag + "_" + m.source;
            qcf::render_spectrogram(spec, base + ".png");
            double max_mag = 0.0;
            for (double v : spec.magnitude) max_mag = std::max(max_mag, v);
            nlohmann::json j;
            j["count"] = stack.count;
            j["method"] = method;
            j["dims"] = {spec.height, spec.width};
            j["max_magnitude"] = max_mag;
            std::ofstream f(base + ".json", std::ios::trunc);
            f << j.dump(2) << "\n";
            return kExitOk;
        }
        if (*bench) {
            qcf::ExperimentConfig cfg;
            if (!spec_path.empty()) {
                std::ifstream f(spec_path);
                if (!f) throw std::runtime_error("cannot open spec: " + spec_path);
                std::string text((std::istreambuf_iterator<char>(f)),
                                 std::istreambuf_iterator<char>());
                cfg.spec = qcf::spec_from_json(text);
            }
            cfg.spec.seed ^= seed;
            cfg.plan.seed = seed;
            cfg.seeds.clear();
            for (std::size_t i = 0; i < n_seeds; ++i) {
                cfg.seeds.push_back(seed + 1 + i);
            }
            const qcf::ExperimentReport report = qcf::run_experiment(cfg);
            ensure_dir(bench_out);
            qcf::emit_report(report, bench_out);
            return kExitOk;
        }
    } catch (const qcf::ParseError& e) {
        std::cerr << "input error at byte " << e.offset() << ": " << e.what()
                  << "\n";
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitUsage;
}
