#include "qcf/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "qcf/rng.hpp"

namespace qcf {

namespace {

std::size_t concept_index(const SyntheticSpec& spec, const std::string& name) {
    for (std::size_t i = 0; i < spec.concepts.size(); ++i) {
        if (spec.concepts[i] == name) return i;
    }
    throw std::invalid_argument("unknown concept: " + name);
}

std::string format_severity(double s) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", s);
    return buf;
}

}  // namespace

void SyntheticSpec::validate() const {
    if (concepts.empty()) throw std::invalid_argument("no concepts");
    if (d < 2 * concepts.size() + 1) {
        throw std::invalid_argument(
            "dimension too small for orthogonal construction: need d >= 2C+1");
    }
    if (!(delta > 0.0) || !(severity_mean > 0.0) || !(severity_clip > 0.0)) {
        throw std::invalid_argument("artifact magnitudes must be positive");
    }
    if (n_real == 0 || n_fake == 0) throw std::invalid_argument("empty concept");
}

std::vector<double> SyntheticSpec::concept_mean(std::size_t idx) const {
    std::vector<double> v(d, 0.0);
    v[idx] = concept_mean_scale;
    return v;
}

std::vector<double> SyntheticSpec::shared_artifact() const {
    std::vector<double> v(d, 0.0);
    v[concepts.size()] = 1.0;
    return v;
}

std::vector<double> SyntheticSpec::concept_artifact(std::size_t idx) const {
    std::vector<double> v(d, 0.0);
    v[concepts.size() + 1 + idx] = 1.0;
    return v;
}

double severity_from_id(const std::string& id) {
    const std::size_t pos = id.rfind("_s=");
    if (pos == std::string::npos) {
        throw std::invalid_argument("id carries no severity tag: " + id);
    }
    return std::stod(id.substr(pos + 3));
}

std::pair<FeatureSet, FeatureSet> generate_concept(const SyntheticSpec& spec,
                                                   const std::string& concept_name) {
    spec.validate();
    const std::size_t idx = concept_index(spec, concept_name);
    const std::vector<double> mean_vec = spec.concept_mean(idx);
    const std::vector<double> u_s = spec.shared_artifact();
    const std::vector<double> u_c = spec.concept_artifact(idx);

    Rng rng(spec.seed ^ ((idx + 1) * 0x9e3779b97f4a7c15ULL));

    FeatureSet reals;
    reals.dim = static_cast<std::uint32_t>(spec.d);
    for (std::size_t i = 0; i < spec.n_real; ++i) {
        FeatureRecord r;
        r.id = "real_" + concept_name + "_" + std::to_string(i);
        r.label = Label::real;
        r.concept_tag = concept_name;
        r.source = "camera";
        r.vector.resize(spec.d);
        for (std::size_t j = 0; j < spec.d; ++j) {
            r.vector[j] = static_cast<float>(mean_vec[j] + rng.normal());
        }
        reals.records.push_back(std::move(r));
    }

    FeatureSet fakes;
    fakes.dim = static_cast<std::uint32_t>(spec.d);
    for (std::size_t i = 0; i < spec.n_fake; ++i) {
        const double severity =
            std::min(rng.exponential(spec.severity_mean), spec.severity_clip);
        FeatureRecord r;
        r.id = "fake_" + concept_name + "_" + std::to_string(i) + "_s=" +
               format_severity(severity);
        r.label = Label::fake;
        r.concept_tag = concept_name;
        r.source = "generator";
        r.vector.resize(spec.d);
        for (std::size_t j = 0; j < spec.d; ++j) {
            r.vector[j] = static_cast<float>(mean_vec[j] + rng.normal() +
                                             spec.delta * u_s[j] +
                                             severity * u_c[j]);
        }
        fakes.records.push_back(std::move(r));
    }
    return {std::move(reals), std::move(fakes)};
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.spec.validate();
    if (cfg.spec.concepts.size() < 1) {
        throw std::invalid_argument("experiment needs at least one concept");
    }
    if (cfg.seeds.empty()) throw std::invalid_argument("no training seeds");

    ModelGrid grid;
    std::map<std::string, TestSplit> tests;

    for (std::size_t ci = 0; ci < cfg.spec.concepts.size(); ++ci) {
        const std::string& name = cfg.spec.concepts[ci];
        auto [reals, fakes] = generate_concept(cfg.spec, name);

        EMConfig em;
        em.components = cfg.gmm_components;
        em.seed = cfg.spec.seed;
        auto [gmm, fit] = fit_em(reals, em);
        (void)fit;
        const ScoredSet scored = score_set(gmm, fakes);

        CurationPlan plan = cfg.plan;
        plan.seed = cfg.plan.seed ^ (ci * 0x2545f4914f6cdd1dULL);
        const CuratedSplit split_qc =
            build_curated_split(scored, reals, plan, Strategy::qc);
        const CuratedSplit split_rand =
            build_curated_split(scored, reals, plan, Strategy::random);

        tests[name] = {split_qc.test_fake, split_qc.test_real};

        for (Strategy strategy : {Strategy::qc, Strategy::random}) {
            const CuratedSplit& split =
                strategy == Strategy::qc ? split_qc : split_rand;
            for (std::uint64_t seed : cfg.seeds) {
                TrainConfig tc = cfg.probe;
                tc.seed = seed;
                auto [model, log] = train_probe(split, tc);
                (void)log;
                grid[{name, strategy}].push_back(std::move(model));
            }
        }
    }

    ExperimentReport report;
    report.matrix = cross_concept_matrix(grid, tests);

    nlohmann::json prov;
    prov["spec"] = nlohmann::json::parse(spec_to_json(cfg.spec));
    prov["plan"] = {{"pool_size", cfg.plan.pool_size},
                    {"test_size", cfg.plan.test_size},
                    {"k", cfg.plan.k},
                    {"seed", cfg.plan.seed}};
    prov["seeds"] = cfg.seeds;
    prov["gmm_components"] = cfg.gmm_components;
    prov["probe"] = {{"learning_rate", cfg.probe.learning_rate},
                     {"weight_decay", cfg.probe.weight_decay},
                     {"epochs", cfg.probe.epochs},
                     {"batch_size", cfg.probe.batch_size},
                     {"hidden", cfg.probe.hidden},
                     {"dropout", cfg.probe.dropout},
                     {"step_every", cfg.probe.step_every},
                     {"step_gamma", cfg.probe.step_gamma}};
    report.provenance_json = prov.dump(2);
    return report;
}

void emit_report(const ExperimentReport& report, const std::string& dir) {
    auto write = [&](const std::string& name, const std::string& content) {
        std::ofstream f(dir + "/" + name, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + dir + "/" + name);
        f << content;
    };
    write("report.csv", report_to_csv(report.matrix));
    write("report.md", report_to_markdown(report.matrix));
    write("provenance.json", report.provenance_json + "\n");
}

std::string spec_to_json(const SyntheticSpec& spec) {
    nlohmann::json j;
    j["d"] = spec.d;
    j["concepts"] = spec.concepts;
    j["concept_mean_scale"] = spec.concept_mean_scale;
    j["delta"] = spec.delta;
    j["severity_mean"] = spec.severity_mean;
    j["severity_clip"] = spec.severity_clip;
    j["n_real"] = spec.n_real;
    j["n_fake"] = spec.n_fake;
    j["seed"] = spec.seed;
    return j.dump(2);
}

SyntheticSpec spec_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    SyntheticSpec spec;
    if (j.contains("d")) spec.d = j["d"].get<std::size_t>();
    if (j.contains("concepts")) {
        spec.concepts = j["concepts"].get<std::vector<std::string>>();
    }
    if (j.contains("concept_mean_scale")) {
        spec.concept_mean_scale = j["concept_mean_scale"].get<double>();
    }
    if (j.contains("delta")) spec.delta = j["delta"].get<double>();
    if (j.contains("severity_mean")) {
        spec.severity_mean = j["severity_mean"].get<double>();
    }
    if (j.contains("severity_clip")) {
        spec.severity_clip = j["severity_clip"].get<double>();
    }
    if (j.contains("n_real")) spec.n_real = j["n_real"].get<std::size_t>();
    if (j.contains("n_fake")) spec.n_fake = j["n_fake"].get<std::size_t>();
    if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
    spec.validate();
    return spec;
}

}  // namespace qcf
