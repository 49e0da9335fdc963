#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "synthweight/corpus.hpp"

namespace synthweight {

/// A pair together with the importance p_D of its machine sentence.
struct ScoredPair {
    PairedExample example;
    double importance = 0.0;
};

enum class GroupKind { human, top_decile, bottom_decile, custom };
std::string_view to_string(GroupKind kind);

/// Lexical profile of one sentence group. Percent values are in [0, 100].
struct GroupReport {
    GroupKind group = GroupKind::custom;
    std::size_t size = 0;  // pairs in the group
    std::array<double, 4> bleu{};  // BLEU-1..4
    double bleu_mean = 0.0;
    double jaccard = 0.0;
    std::array<double, 3> distinct{};  // Distinct-1..3
    double distinct_mean = 0.0;
    double zipf = 0.0;
};

/// Sentence-level BLEU restricted to the order-n precision:
/// 100 * BP * clipped_matches / (|hyp| - n + 1), BP = min(1, exp(1 - |ref|/|hyp|)).
/// No smoothing: zero matches give exactly 0. n > |hyp| gives 0.
/// Throws InvalidArgument on an empty hypothesis or n < 1.
double bleu_n(const Tokens& hypothesis, const Tokens& reference, int n);

/// 100 * |A ∩ B| / |A ∪ B| over token sets; two empty lists give 100.
double jaccard(const Tokens& a, const Tokens& b);

/// 100 * distinct n-grams / n-gram occurrences, pooled over the group.
/// Throws InvalidArgument if no sentence has at least n tokens.
double distinct_n(const std::vector<Tokens>& group, int n);

/// Exponent s of frequency ∝ rank^-s, by least squares on (log rank,
/// log frequency) over pooled unigram counts. Ties in frequency are ranked
/// by token (lexicographic). Throws InvalidArgument below 10 distinct tokens.
double zipf_coefficient(const std::vector<Tokens>& group);

/// Number of pairs per side: max(1, floor(fraction * n)).
std::size_t importance_group_size(std::size_t n, double fraction);

/// Indices of `scored` sorted by importance, highest first; equal scores are
/// ordered by example id.
std::vector<std::size_t> importance_order(const std::vector<ScoredPair>& scored);

struct ImportanceGroups {
    std::vector<ScoredPair> top;
    std::vector<ScoredPair> bottom;
};

/// Top and bottom importance_group_size(N, fraction) pairs. Throws
/// InvalidArgument when the two sides would overlap, when fraction is
/// outside (0, 0.5], or when an importance lies outside [0, 1].
ImportanceGroups group_by_importance(const std::vector<ScoredPair>& scored, double fraction);

/// Report for one group. BLEU/Jaccard are averaged over the (hypothesis,
/// reference) pairs; Distinct-N and Zipf use the pooled `sentences`.
GroupReport group_report(GroupKind kind, const std::vector<std::pair<Tokens, Tokens>>& pairs,
                         const std::vector<Tokens>& sentences);

/// Human, top-decile and bottom-decile reports, in that order. The machine
/// sentence is the BLEU hypothesis for the importance groups; the human
/// group scores each human sentence against its paired machine sentence.
/// Distinct-N and Zipf for the human group use each distinct human sentence
/// once. Every corpus example must appear in `scored`.
std::vector<GroupReport> analyze(const Corpus& corpus, const std::vector<ScoredPair>& scored,
                                 double fraction);

/// JSON object keyed by group, then metric.
std::string reports_to_json(const std::vector<GroupReport>& reports);

/// Aligned plain-text table: one column per group, one row per metric.
std::string reports_to_table(const std::vector<GroupReport>& reports);

}  // namespace synthweight
