#include "synthweight/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "json_io.hpp"

namespace synthweight {

double pearson(std::span<const double> x, std::span<const double> y, bool* degenerate) {
    if (x.size() != y.size()) throw InvalidArgument("pearson: length mismatch");
    if (x.empty()) throw InvalidArgument("pearson: empty input");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    if (degenerate) *degenerate = false;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && values[idx[j + 1]] == values[idx[i]]) ++j;
        const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y, bool* degenerate) {
    if (x.size() != y.size()) throw InvalidArgument("spearman: length mismatch");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    return pearson(rx, ry, degenerate);
}

double BinaryCounts::f1() const {
    if (tp == 0) return 0.0;
    return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

double BinaryCounts::accuracy() const {
    const std::size_t total = tp + fp + tn + fn;
    if (total == 0) return 0.0;
    return static_cast<double>(tp + tn) / static_cast<double>(total);
}

namespace {

void check_binary_inputs(std::span<const double> preds, std::span<const double> labels) {
    if (preds.size() != labels.size()) throw InvalidArgument("threshold: length mismatch");
    if (preds.empty()) throw InvalidArgument("threshold: empty input");
    for (double l : labels) {
        if (l != 0.0 && l != 1.0) throw InvalidArgument("threshold: labels must be 0 or 1");
    }
}

}  // namespace

BinaryCounts count_at(std::span<const double> preds, std::span<const double> labels, double threshold) {
    check_binary_inputs(preds, labels);
    BinaryCounts c;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const bool positive = preds[i] >= threshold;
        const bool truth = labels[i] == 1.0;
        if (positive && truth) ++c.tp;
        else if (positive) ++c.fp;
        else if (truth) ++c.fn;
        else ++c.tn;
    }
    return c;
}

std::vector<double> threshold_candidates(std::span<const double> preds) {
    std::vector<double> v(preds.begin(), preds.end());
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    std::vector<double> out;
    if (v.empty()) return out;
    constexpr double kEps = 1e-6;
    out.push_back(v.front() - kEps);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) out.push_back((v[i] + v[i + 1]) / 2.0);
    out.push_back(v.back() + kEps);
    return out;
}

double select_threshold(std::span<const double> preds, std::span<const double> labels) {
    check_binary_inputs(preds, labels);
    const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1.0));
    if (positives == 0 || positives == labels.size()) {
        throw InvalidArgument("select_threshold: labels must contain both classes");
    }

    // Sorted predictions with a suffix count of positive labels: the number of
    // predictions >= t is found by binary search, so every candidate is scored
    // with exactly the pred >= t rule.
    std::vector<std::size_t> idx(preds.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return preds[a] < preds[b]; });
    std::vector<double> sorted(preds.size());
    std::vector<std::size_t> pos_suffix(preds.size() + 1, 0);
    for (std::size_t k = 0; k < idx.size(); ++k) sorted[k] = preds[idx[k]];
    for (std::size_t k = idx.size(); k-- > 0;) pos_suffix[k] = pos_suffix[k + 1] + (labels[idx[k]] == 1.0);

    double best_t = 0.0;
    double best_f1 = -1.0;
    for (double t : threshold_candidates(preds)) {
        const auto first = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
        BinaryCounts c;
        c.tp = pos_suffix[first];
        c.fp = (sorted.size() - first) - c.tp;
        c.fn = positives - c.tp;
        const double f1 = c.f1();
        if (f1 > best_f1) {
            best_f1 = f1;
            best_t = t;
        }
    }
    return best_t;
}

bool labels_are_binary(std::span<const double> labels) {
    return std::all_of(labels.begin(), labels.end(), [](double l) { return l == 0.0 || l == 1.0; });
}

EvalReport evaluate_predictions(std::span<const double> preds, std::span<const double> labels,
                                std::span<const double> dev_preds, std::span<const double> dev_labels) {
    if (preds.empty()) throw InvalidArgument("evaluate: no pairs");
    if (preds.size() != labels.size()) throw InvalidArgument("evaluate: length mismatch");
    EvalReport r;
    r.count = preds.size();
    bool degenerate = false;
    r.pearson = pearson(preds, labels, &degenerate);
    if (degenerate) {
        r.diagnostics.push_back("zero variance in predictions or labels; correlations set to 0");
    }
    r.spearman = spearman(preds, labels);

    if (labels_are_binary(labels)) {
        if (dev_preds.empty()) {
            throw InvalidArgument("evaluate: binary labels need dev pairs for threshold tuning");
        }
        const double t = select_threshold(dev_preds, dev_labels);
        const BinaryCounts c = count_at(preds, labels, t);
        r.threshold = t;
        r.accuracy = 100.0 * c.accuracy();
        r.f1 = 100.0 * c.f1();
    }
    return r;
}

EvalReport evaluate(const EncoderModel& model, const std::vector<PairedExample>& pairs,
                    const std::vector<PairedExample>* dev_pairs) {
    auto predict_all = [&](const std::vector<PairedExample>& xs, std::vector<double>& preds,
                           std::vector<double>& labels) {
        for (const auto& ex : xs) {
            preds.push_back(predict_similarity(model, tokenize(ex.human_text), tokenize(ex.machine_text)));
            labels.push_back(ex.label);
        }
    };
    std::vector<double> preds, labels, dev_preds, dev_labels;
    predict_all(pairs, preds, labels);
    if (dev_pairs && labels_are_binary(labels)) predict_all(*dev_pairs, dev_preds, dev_labels);
    return evaluate_predictions(preds, labels, dev_preds, dev_labels);
}

std::string eval_to_json(const EvalReport& r) {
    detail::ordered_json j;
    j["count"] = r.count;
    j["pearson"] = r.pearson;
    j["spearman"] = r.spearman;
    j["threshold"] = r.threshold ? detail::ordered_json(*r.threshold) : detail::ordered_json(nullptr);
    j["accuracy"] = r.accuracy ? detail::ordered_json(*r.accuracy) : detail::ordered_json(nullptr);
    j["f1"] = r.f1 ? detail::ordered_json(*r.f1) : detail::ordered_json(nullptr);
    j["diagnostics"] = r.diagnostics;
    return j.dump(2);
}

std::string eval_summary_line(const EvalReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "n=%zu pearson=%.4f spearman=%.4f", r.count, r.pearson, r.spearman);
    std::string line = buf;
    if (r.threshold) {
        std::snprintf(buf, sizeof(buf), " threshold=%.4f accuracy=%.2f f1=%.2f", *r.threshold, *r.accuracy, *r.f1);
        line += buf;
    }
    return line;
}

}  // namespace synthweight
