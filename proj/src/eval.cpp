#include "qcf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace qcf {

namespace {

// Average ranks (1-based) with ties sharing the mean of their rank range.
std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return values[a] < values[b];
    });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * (static_cast<double>(i + 1) +
                                  static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

std::string fmt(double v, int prec) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(prec);
    os << v;
    return os.str();
}

}  // namespace

double auc(const std::vector<double>& fake_scores,
           const std::vector<double>& real_scores) {
    if (fake_scores.empty() || real_scores.empty()) {
        throw std::invalid_argument("auc needs non-empty score sets");
    }
    std::vector<double> all = fake_scores;
    all.insert(all.end(), real_scores.begin(), real_scores.end());
    const std::vector<double> ranks = average_ranks(all);
    const double nf = static_cast<double>(fake_scores.size());
    const double nr = static_cast<double>(real_scores.size());
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < fake_scores.size(); ++i) rank_sum += ranks[i];
    const double u = rank_sum - nf * (nf + 1.0) / 2.0;
    return u / (nf * nr);
}

std::pair<double, double> aggregate_seeds(const std::vector<double>& aucs) {
    if (aucs.empty()) throw std::invalid_argument("no values to aggregate");
    const double n = static_cast<double>(aucs.size());
    const double mean = std::accumulate(aucs.begin(), aucs.end(), 0.0) / n;
    if (aucs.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double v : aucs) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw std::invalid_argument("spearman needs two equal-length vectors");
    }
    const std::vector<double> ra = average_ranks(a);
    const std::vector<double> rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (va == 0.0 || vb == 0.0) {
        throw std::invalid_argument("spearman undefined for constant input");
    }
    return cov / std::sqrt(va * vb);
}

CrossConceptReport cross_concept_matrix(
    const ModelGrid& models, const std::map<std::string, TestSplit>& tests) {
    CrossConceptReport report;
    for (const auto& [tag, split] : tests) {
        report.test_tags.push_back(tag);
        (void)split;
    }

    std::size_t expected_seeds = 0;
    for (const auto& [key, seeds] : models) {
        expected_seeds = std::max(expected_seeds, seeds.size());
    }

    for (const auto& [key, seed_models] : models) {
        const auto& [train_tag, strategy] = key;
        if (seed_models.size() < expected_seeds) {
            report.warnings.push_back(
                "row dropped: train=" + train_tag + " strategy=" +
                to_string(strategy) + " has " +
                std::to_string(seed_models.size()) + "/" +
                std::to_string(expected_seeds) + " seeds");
            continue;
        }
        report.train_tags.push_back(train_tag);
        report.strategies.push_back(strategy);
        std::vector<CrossCell> row;
        for (const std::string& test_tag : report.test_tags) {
            const TestSplit& ts = tests.at(test_tag);
            std::vector<double> aucs;
            for (const ProbeModel& model : seed_models) {
                const std::vector<double> fs = predict_scores(model, ts.fakes);
                const std::vector<double> rs = predict_scores(model, ts.reals);
                aucs.push_back(auc(fs, rs));
            }
            auto [mean, sd] = aggregate_seeds(aucs);
            row.push_back({mean, sd, aucs.size(), train_tag == test_tag});
        }
        report.cells.push_back(std::move(row));
    }
    return report;
}

std::array<EvalResult, 4> quartile_eval(const ProbeModel& model,
                                        const ScoredSet& test_fakes,
                                        const FeatureSet& test_reals) {
    const std::array<FeatureSet, 4> bins = quartile_partition(test_fakes);
    const std::vector<double> real_scores = predict_scores(model, test_reals);
    std::array<EvalResult, 4> out;
    for (std::size_t b = 0; b < 4; ++b) {
        const std::vector<double> fake_scores = predict_scores(model, bins[b]);
        out[b].auc = auc(fake_scores, real_scores);
        out[b].n_pos = fake_scores.size();
        out[b].n_neg = real_scores.size();
    }
    return out;
}

std::string report_to_csv(const CrossConceptReport& report) {
    std::ostringstream os;
    os << "train,strategy,test,intra,auc_mean,auc_std,auc_mean_x100,auc_std_x100\n";
    for (std::size_t r = 0; r < report.cells.size(); ++r) {
        for (std::size_t c = 0; c < report.test_tags.size(); ++c) {
            const CrossCell& cell = report.cells[r][c];
            os << report.train_tags[r] << "," << to_string(report.strategies[r])
               << "," << report.test_tags[c] << ","
               << (cell.intra_concept ? 1 : 0) << "," << fmt(cell.mean, 6)
               << "," << fmt(cell.std_dev, 6) << "," << fmt(cell.mean * 100, 4)
               << "," << fmt(cell.std_dev * 100, 4) << "\n";
        }
    }
    return os.str();
}

std::string report_to_markdown(const CrossConceptReport& report) {
    std::ostringstream os;
    os << "| training | sampling |";
    for (const std::string& t : report.test_tags) os << " " << t << " |";
    os << "\n|---|---|";
    for (std::size_t c = 0; c < report.test_tags.size(); ++c) os << "---|";
    os << "\n";
    for (std::size_t r = 0; r < report.cells.size(); ++r) {
        os << "| " << report.train_tags[r] << " | "
           << to_string(report.strategies[r]) << " |";
        for (std::size_t c = 0; c < report.test_tags.size(); ++c) {
            const CrossCell& cell = report.cells[r][c];
            os << " " << fmt(cell.mean * 100, 1) << "±"
               << fmt(cell.std_dev * 100, 2);
            if (cell.intra_concept) os << " (intra)";
            os << " |";
        }
        os << "\n";
    }
    for (const std::string& w : report.warnings) os << "\n> warning: " << w << "\n";
    return os.str();
}

}  // namespace qcf
