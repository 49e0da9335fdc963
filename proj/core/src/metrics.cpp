#include "synthweight/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "json_io.hpp"
#include "synthweight/ngram.hpp"

namespace synthweight {

std::string_view to_string(GroupKind kind) {
    switch (kind) {
        case GroupKind::human: return "human";
        case GroupKind::top_decile: return "top_decile";
        case GroupKind::bottom_decile: return "bottom_decile";
        case GroupKind::custom: return "custom";
    }
    return "custom";
}

double bleu_n(const Tokens& hypothesis, const Tokens& reference, int n) {
    if (hypothesis.empty()) throw InvalidArgument("bleu_n: empty hypothesis");
    if (n < 1) throw InvalidArgument("bleu_n: n must be >= 1");
    const auto order = static_cast<std::size_t>(n);
    if (order > hypothesis.size()) return 0.0;

    const NgramCounts hyp = count_ngrams(hypothesis, order);
    const NgramCounts ref = count_ngrams(reference, order);
    std::size_t clipped = 0;
    for (const auto& [gram, count] : hyp) {
        auto it = ref.find(gram);
        if (it != ref.end()) clipped += std::min(count, it->second);
    }
    if (clipped == 0) return 0.0;

    const double total = static_cast<double>(hypothesis.size() - order + 1);
    const double hyp_len = static_cast<double>(hypothesis.size());
    const double ref_len = static_cast<double>(reference.size());
    const double bp = hyp_len >= ref_len ? 1.0 : std::exp(1.0 - ref_len / hyp_len);
    return 100.0 * bp * static_cast<double>(clipped) / total;
}

double jaccard(const Tokens& a, const Tokens& b) {
    const std::unordered_set<std::string> sa(a.begin(), a.end());
    const std::unordered_set<std::string> sb(b.begin(), b.end());
    if (sa.empty() && sb.empty()) return 100.0;
    std::size_t inter = 0;
    for (const auto& t : sa) inter += sb.count(t);
    const std::size_t uni = sa.size() + sb.size() - inter;
    return 100.0 * static_cast<double>(inter) / static_cast<double>(uni);
}

double distinct_n(const std::vector<Tokens>& group, int n) {
    if (n < 1) throw InvalidArgument("distinct_n: n must be >= 1");
    NgramCounts counts;
    std::size_t total = 0;
    for (const auto& sentence : group) {
        total += accumulate_ngrams(sentence, static_cast<std::size_t>(n), counts);
    }
    if (total == 0) {
        throw InvalidArgument("distinct_n: no sentence has at least " + std::to_string(n) + " tokens");
    }
    return 100.0 * static_cast<double>(counts.size()) / static_cast<double>(total);
}

double zipf_coefficient(const std::vector<Tokens>& group) {
    std::unordered_map<std::string_view, std::size_t> counts;
    for (const auto& sentence : group) {
        for (const auto& t : sentence) ++counts[t];
    }
    if (counts.size() < 10) {
        throw InvalidArgument("zipf_coefficient: need at least 10 distinct tokens (got " +
                              std::to_string(counts.size()) + ")");
    }
    std::vector<std::pair<std::string_view, std::size_t>> table(counts.begin(), counts.end());
    std::sort(table.begin(), table.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });

    const std::size_t m = table.size();
    std::vector<double> x(m), y(m);
    for (std::size_t r = 0; r < m; ++r) {
        x[r] = std::log(static_cast<double>(r + 1));
        y[r] = std::log(static_cast<double>(table[r].second));
    }
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(m);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(m);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        sxy += (x[r] - mx) * (y[r] - my);
        sxx += (x[r] - mx) * (x[r] - mx);
    }
    return -sxy / sxx;
}

std::size_t importance_group_size(std::size_t n, double fraction) {
    // The epsilon keeps products such as 0.29 * 100 from flooring to 28.
    const auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
    return std::max<std::size_t>(1, k);
}

std::vector<std::size_t> importance_order(const std::vector<ScoredPair>& scored) {
    std::vector<std::size_t> idx(scored.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (scored[a].importance != scored[b].importance) {
            return scored[a].importance > scored[b].importance;
        }
        return scored[a].example.id < scored[b].example.id;
    });
    return idx;
}

ImportanceGroups group_by_importance(const std::vector<ScoredPair>& scored, double fraction) {
    if (scored.empty()) throw InvalidArgument("group_by_importance: no scored pairs");
    if (!(fraction > 0.0 && fraction <= 0.5)) {
        throw InvalidArgument("group_by_importance: fraction must be in (0, 0.5]");
    }
    for (const auto& s : scored) {
        if (!(s.importance >= 0.0 && s.importance <= 1.0)) {
            throw InvalidArgument("group_by_importance: importance of '" + s.example.id +
                                  "' outside [0, 1]");
        }
    }
    const std::size_t n = scored.size();
    const std::size_t k = importance_group_size(n, fraction);
    if (2 * k > n) {
        throw InvalidArgument("group_by_importance: groups of " + std::to_string(k) +
                              " would overlap with only " + std::to_string(n) + " pairs");
    }
    const auto order = importance_order(scored);
    ImportanceGroups groups;
    for (std::size_t i = 0; i < k; ++i) groups.top.push_back(scored[order[i]]);
    for (std::size_t i = n - k; i < n; ++i) groups.bottom.push_back(scored[order[i]]);
    return groups;
}

GroupReport group_report(GroupKind kind, const std::vector<std::pair<Tokens, Tokens>>& pairs,
                         const std::vector<Tokens>& sentences) {
    GroupReport r;
    r.group = kind;
    r.size = pairs.size();
    if (!pairs.empty()) {
        // Fixed-order reduction so the sums are bit-stable across runs.
        for (int n = 1; n <= 4; ++n) {
            double sum = 0.0;
            for (const auto& [hyp, ref] : pairs) sum += bleu_n(hyp, ref, n);
            r.bleu[static_cast<std::size_t>(n - 1)] = sum / static_cast<double>(pairs.size());
        }
        double jsum = 0.0;
        for (const auto& [hyp, ref] : pairs) jsum += jaccard(hyp, ref);
        r.jaccard = jsum / static_cast<double>(pairs.size());
    }
    r.bleu_mean = (r.bleu[0] + r.bleu[1] + r.bleu[2] + r.bleu[3]) / 4.0;
    for (int n = 1; n <= 3; ++n) r.distinct[static_cast<std::size_t>(n - 1)] = distinct_n(sentences, n);
    r.distinct_mean = (r.distinct[0] + r.distinct[1] + r.distinct[2]) / 3.0;
    r.zipf = zipf_coefficient(sentences);
    return r;
}

namespace {

GroupReport machine_group(GroupKind kind, const std::vector<ScoredPair>& members) {
    std::vector<std::pair<Tokens, Tokens>> pairs;
    std::vector<Tokens> sentences;
    for (const auto& m : members) {
        Tokens machine = tokenize(m.example.machine_text);
        pairs.emplace_back(machine, tokenize(m.example.human_text));
        sentences.push_back(std::move(machine));
    }
    return group_report(kind, pairs, sentences);
}

}  // namespace

std::vector<GroupReport> analyze(const Corpus& corpus, const std::vector<ScoredPair>& scored,
                                 double fraction) {
    std::unordered_set<std::string_view> covered;
    for (const auto& s : scored) covered.insert(s.example.id);
    for (const auto& ex : corpus.examples) {
        if (!covered.count(ex.id)) {
            throw InvalidArgument("analyze: no importance score for machine sentence '" + ex.id + "'");
        }
    }

    std::vector<std::pair<Tokens, Tokens>> human_pairs;
    std::vector<Tokens> human_sentences;
    std::unordered_set<std::string_view> seen_human;
    for (const auto& ex : corpus.examples) {
        Tokens human = tokenize(ex.human_text);
        if (seen_human.insert(ex.human_text).second) human_sentences.push_back(human);
        human_pairs.emplace_back(std::move(human), tokenize(ex.machine_text));
    }

    const auto groups = group_by_importance(scored, fraction);
    return {group_report(GroupKind::human, human_pairs, human_sentences),
            machine_group(GroupKind::top_decile, groups.top),
            machine_group(GroupKind::bottom_decile, groups.bottom)};
}

std::string reports_to_json(const std::vector<GroupReport>& reports) {
    return detail::to_json(reports).dump(2);
}

std::string reports_to_table(const std::vector<GroupReport>& reports) {
    auto header_of = [](GroupKind k) -> std::string {
        switch (k) {
            case GroupKind::human: return "x_h";
            case GroupKind::top_decile: return "p_D(x_m) top";
            case GroupKind::bottom_decile: return "p_D(x_m) bottom";
            case GroupKind::custom: return "custom";
        }
        return "custom";
    };
    struct Row {
        std::string name;
        std::vector<std::string> cells;
    };
    auto fmt = [](double v, const char* format) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), format, v);
        return std::string(buf);
    };
    std::vector<Row> rows;
    for (int n = 0; n < 4; ++n) rows.push_back({"BLEU-" + std::to_string(n + 1), {}});
    rows.push_back({"BLEU-N", {}});
    rows.push_back({"Jaccard", {}});
    for (int n = 0; n < 3; ++n) rows.push_back({"Distinct-" + std::to_string(n + 1), {}});
    rows.push_back({"Distinct-N", {}});
    rows.push_back({"Zipf coeff.", {}});
    for (const auto& r : reports) {
        std::size_t i = 0;
        for (double b : r.bleu) rows[i++].cells.push_back(fmt(b, "%.2f"));
        rows[i++].cells.push_back(fmt(r.bleu_mean, "%.2f"));
        rows[i++].cells.push_back(fmt(r.jaccard, "%.2f"));
        for (double d : r.distinct) rows[i++].cells.push_back(fmt(d, "%.2f"));
        rows[i++].cells.push_back(fmt(r.distinct_mean, "%.2f"));
        rows[i++].cells.push_back(fmt(r.zipf, "%.2f"));
    }

    std::size_t name_w = 0;
    for (const auto& row : rows) name_w = std::max(name_w, row.name.size());
    std::vector<std::size_t> col_w;
    for (const auto& r : reports) col_w.push_back(header_of(r.group).size());
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.cells.size(); ++c) col_w[c] = std::max(col_w[c], row.cells[c].size());
    }

    auto pad_left = [](const std::string& s, std::size_t w) { return std::string(w - s.size(), ' ') + s; };
    auto pad_right = [](const std::string& s, std::size_t w) { return s + std::string(w - s.size(), ' '); };
    std::string out = pad_right("", name_w);
    for (std::size_t c = 0; c < reports.size(); ++c) out += "  " + pad_left(header_of(reports[c].group), col_w[c]);
    out += '\n';
    for (const auto& row : rows) {
        out += pad_right(row.name, name_w);
        for (std::size_t c = 0; c < row.cells.size(); ++c) out += "  " + pad_left(row.cells[c], col_w[c]);
        out += '\n';
    }
    return out;
}

}  // namespace synthweight
